// Replays a recorded compose-conflict-correct session against scripted
// server payloads and checks that the client issues exactly the API calls
// of the scenario's rejected assertion and its corrective re-submission,
// rendering everything from response payloads alone.

import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient, OutcomeOut } from "../src/api.js";
import { ComposeSession, renderConflict, renderOutcome } from "../src/session.js";
import { stubFetch } from "./helpers.js";

// Scenario step (b): the bare belief u2 tries first.
const STEP_B_TEXT = "u2#`75% of wn#bird can be agent of a flight´;";
// Scenario step (c): the corrective wrapper (identical to the server's
// pre-filled template).
const STEP_C_TEXT =
  "u2#`u1#s1 has for corrective_generalization " +
  "u2#`75% of wn#bird can be agent of a flight´´;";

// Payloads recorded from the live service for scenario steps (b) and (c).
const STEP_B_RESPONSE = {
  status: 409,
  json: {
    outcome: {
      status: "rejected",
      reason: "implicit-conflict",
      conflicts: [
        {
          object: "u1#s1",
          kind: "generalization",
          via_measure: false,
          advisory: false,
          rendered: "u1#`every wn#bird can be agent of a flight´",
          corrective_template: STEP_C_TEXT,
        },
      ],
      clone_report: null,
      created: [],
      removed: [],
      warnings: [],
    },
    tree: null,
    tree_text: null,
    results: [],
    sequence: null,
  },
};

const STEP_C_RESPONSE = {
  status: 200,
  json: {
    outcome: {
      status: "accepted",
      reason: null,
      conflicts: [],
      clone_report: null,
      created: ["u2#s3", "u2#s4"],
      removed: [],
      warnings: [],
    },
    tree: null,
    tree_text: null,
    results: [],
    sequence: 10,
  },
};

test("session replay issues exactly the scenario's API calls", async () => {
  const { fetchFn, calls } = stubFetch([STEP_B_RESPONSE, STEP_C_RESPONSE]);
  const session = new ComposeSession(new ApiClient("", "u2", fetchFn));

  const rejection = await session.submit(STEP_B_TEXT);
  assert.equal(rejection.outcome?.status, "rejected");
  assert.equal(session.state.conflicts.length, 1);

  const conflict = session.state.conflicts[0];
  const accepted = await session.submitCorrective(conflict);
  assert.equal(accepted?.outcome?.status, "accepted");

  assert.deepEqual(
    calls.map((c) => [c.method, c.url, (c.body as { text: string }).text, c.user]),
    [
      ["POST", "/commands", STEP_B_TEXT, "u2"],
      ["POST", "/commands", STEP_C_TEXT, "u2"],
    ],
  );
});

test("conflict rendering uses payload fields verbatim", async () => {
  const { fetchFn } = stubFetch([STEP_B_RESPONSE]);
  const session = new ComposeSession(new ApiClient("", "u2", fetchFn));
  await session.submit(STEP_B_TEXT);

  const payloadConflict = STEP_B_RESPONSE.json.outcome.conflicts[0];
  const line = renderConflict(session.state.conflicts[0]);
  assert.ok(line.includes(payloadConflict.object));
  assert.ok(line.includes(payloadConflict.kind));
  assert.ok(line.includes(payloadConflict.rendered));
  // the corrective text is the server's template, byte for byte
  assert.equal(session.correctiveFor(session.state.conflicts[0]),
    payloadConflict.corrective_template);
});

test("accepted outcome lines come from the payload", () => {
  const lines = renderOutcome(STEP_C_RESPONSE.json.outcome as OutcomeOut);
  assert.deepEqual(lines, ["accepted", "stored: u2#s3", "stored: u2#s4"]);
});

test("clone report renders before/after term names from the payload", () => {
  // recorded from scenario step (d): both users get a clone of wn#bird
  const outcome: OutcomeOut = {
    status: "accepted-with-cloning",
    reason: null,
    conflicts: [],
    clone_report: {
      original_term: "wn#bird",
      clones: [
        { new_term: "u1#bird", for_user: "u1", dropped_definition: null },
        { new_term: "u2#bird", for_user: "u2", dropped_definition: "u1#s2" },
      ],
      rewritten_statements: ["u1#s1", "u2#s1", "u2#s3"],
      reattributed: [],
    },
    created: ["u1#s2"],
    removed: [],
    warnings: [],
  };
  const lines = renderOutcome(outcome);
  assert.ok(lines.includes("clone: wn#bird -> u1#bird (for u1)"));
  assert.ok(lines.includes("clone: wn#bird -> u2#bird (for u2)"));
  assert.ok(lines.includes("rewritten: u2#s3"));
});

test("dry-run polling surfaces conflicts while typing", async () => {
  const draftResponse = {
    status: 200,
    json: {
      would_accept: false,
      status: "rejected",
      reason: "implicit-conflict",
      conflicts: STEP_B_RESPONSE.json.outcome.conflicts,
      warnings: [],
    },
  };
  const { fetchFn, calls } = stubFetch([draftResponse]);
  const session = new ComposeSession(new ApiClient("", "u2", fetchFn));
  const check = await session.checkDraft(STEP_B_TEXT);
  assert.equal(check.would_accept, false);
  assert.equal(calls[0].url, "/draft/conflicts");
  assert.equal(session.state.conflicts[0].object, "u1#s1");
});
