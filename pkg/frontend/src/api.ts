// Typed client for the knowledge-base HTTP API.
// The fetch function is injectable so tests can replay recorded sessions.

export interface ConflictOut {
  object: string;
  kind: string;
  via_measure: boolean;
  advisory: boolean;
  rendered: string;
  corrective_template: string | null;
}

export interface CloneOut {
  new_term: string;
  for_user: string;
  dropped_definition: string | null;
}

export interface ReattributionOut {
  old_statement: string;
  new_statement: string;
  for_user: string;
}

export interface CloneReportOut {
  original_term: string | null;
  clones: CloneOut[];
  rewritten_statements: string[];
  reattributed: ReattributionOut[];
}

export interface OutcomeOut {
  status: string;
  reason: string | null;
  conflicts: ConflictOut[];
  clone_report: CloneReportOut | null;
  created: string[];
  removed: string[];
  warnings: string[];
}

export interface TreeNodeOut {
  label: string;
  link_kind: string | null;
  creator: string | null;
  display: string;
  children: TreeNodeOut[];
}

export interface CommandResponseOut {
  outcome: OutcomeOut | null;
  tree: TreeNodeOut | null;
  tree_text: string | null;
  results: string[];
  sequence: number | null;
}

export interface DraftResponse {
  would_accept: boolean;
  status: string;
  reason: string | null;
  conflicts: ConflictOut[];
  warnings: string[];
}

export interface RatingOut {
  id: string;
  rater: string;
  object: string;
  criterion: string;
  value: number;
  date: string;
}

export interface UserOut {
  name: string;
  kind: string;
}

export interface FilterResultOut {
  object: string;
  display: string;
}

export interface ApiError {
  error: string;
  detail: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    public user: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private headers(): Record<string, string> {
    return { "Content-Type": "application/json", "X-User": this.user };
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if ("error" in payload) {
      throw new Error(`${payload.error}: ${payload.detail}`);
    }
    return payload as T;
  }

  // Commands are accepted (200) or rejected (409/403/404) with the same
  // payload shape; both cases resolve so the UI can render the outcome.
  submitCommand(text: string): Promise<CommandResponseOut> {
    return this.request<CommandResponseOut>("POST", "/commands", { text });
  }

  draftConflicts(text: string): Promise<DraftResponse> {
    return this.request<DraftResponse>("POST", "/draft/conflicts", { text });
  }

  specializations(root: string, depth?: number, filter?: string): Promise<CommandResponseOut> {
    const params = new URLSearchParams({ root });
    if (depth !== undefined) params.set("depth", String(depth));
    if (filter) params.set("filter", filter);
    return this.request<CommandResponseOut>("GET", `/specializations?${params}`);
  }

  users(): Promise<UserOut[]> {
    return this.request<UserOut[]>("GET", "/users");
  }

  ratings(object: string): Promise<RatingOut[]> {
    return this.request<RatingOut[]>(
      "GET", `/ratings?${new URLSearchParams({ object })}`);
  }

  putRating(object: string, value: number, criterion = "acceptance"): Promise<CommandResponseOut> {
    return this.request<CommandResponseOut>("PUT", "/ratings", { object, criterion, value });
  }

  filterApply(filter: string, objects: string[]): Promise<FilterResultOut[]> {
    return this.request<FilterResultOut[]>("POST", "/filter/apply", { filter, objects });
  }
}
