// Recorded-session fetch stub: scripted responses, captured calls.

import { FetchLike } from "../src/api.js";

export interface RecordedCall {
  method: string;
  url: string;
  body: unknown;
  user: string | undefined;
}

export interface ScriptedResponse {
  status: number;
  json: unknown;
}

export function stubFetch(script: ScriptedResponse[]) {
  const calls: RecordedCall[] = [];
  let cursor = 0;
  const fetchFn: FetchLike = async (url, init) => {
    const headers = (init?.headers ?? {}) as Record<string, string>;
    calls.push({
      method: init?.method ?? "GET",
      url,
      body: init?.body ? JSON.parse(init.body as string) : undefined,
      user: headers["X-User"],
    });
    if (cursor >= script.length) {
      throw new Error(`unexpected call #${calls.length}: ${init?.method} ${url}`);
    }
    const next = script[cursor++];
    return new Response(JSON.stringify(next.json), {
      status: next.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetchFn, calls };
}
