// Compose-and-submit flow: draft, dry-run conflicts, one-click corrective
// insertion, submission, outcome display.
//
// The session performs no KB logic: every displayed conflict, template,
// term name and statement id is lifted verbatim from a service payload.

import { ApiClient, CommandResponseOut, ConflictOut, DraftResponse, OutcomeOut } from "./api.js";

export interface DraftState {
  actingUser: string;
  draft: string;
  conflicts: ConflictOut[];
  warnings: string[];
  wouldAccept: boolean | null;
}

export class ComposeSession {
  state: DraftState;
  lastOutcome: OutcomeOut | null = null;

  constructor(private api: ApiClient) {
    this.state = {
      actingUser: api.user,
      draft: "",
      conflicts: [],
      warnings: [],
      wouldAccept: null,
    };
  }

  // Dry-run polling while the user types.
  async checkDraft(text: string): Promise<DraftResponse> {
    this.state.draft = text;
    const response = await this.api.draftConflicts(text);
    this.state.conflicts = response.conflicts;
    this.state.warnings = response.warnings;
    this.state.wouldAccept = response.would_accept;
    return response;
  }

  async submit(text: string): Promise<CommandResponseOut> {
    this.state.draft = text;
    const response = await this.api.submitCommand(text);
    this.lastOutcome = response.outcome;
    this.state.conflicts = response.outcome?.conflicts ?? [];
    this.state.warnings = response.outcome?.warnings ?? [];
    return response;
  }

  // One-click corrective wrapper: the server pre-filled the template; the
  // client only hands it back.
  correctiveFor(conflict: ConflictOut): string | null {
    return conflict.corrective_template;
  }

  async submitCorrective(conflict: ConflictOut): Promise<CommandResponseOut | null> {
    const template = this.correctiveFor(conflict);
    if (template === null) return null;
    return this.submit(template);
  }
}

// Rendering helpers: pure projections of response payloads into lines.

export function renderConflict(conflict: ConflictOut): string {
  const marks = [conflict.kind];
  if (conflict.via_measure) marks.push("measure");
  if (conflict.advisory) marks.push("advisory");
  return `${conflict.object} (${marks.join(", ")}): ${conflict.rendered}`;
}

export function renderOutcome(outcome: OutcomeOut): string[] {
  const lines: string[] = [];
  lines.push(outcome.reason ? `${outcome.status} (${outcome.reason})` : outcome.status);
  for (const conflict of outcome.conflicts) {
    lines.push(`conflict: ${renderConflict(conflict)}`);
  }
  for (const id of outcome.created) {
    lines.push(`stored: ${id}`);
  }
  for (const id of outcome.removed) {
    lines.push(`removed: ${id}`);
  }
  const report = outcome.clone_report;
  if (report) {
    for (const clone of report.clones) {
      lines.push(`clone: ${report.original_term} -> ${clone.new_term} (for ${clone.for_user})`);
    }
    for (const id of report.rewritten_statements) {
      lines.push(`rewritten: ${id}`);
    }
    for (const r of report.reattributed) {
      lines.push(`reattributed: ${r.old_statement} -> ${r.new_statement} (to ${r.for_user})`);
    }
  }
  for (const warning of outcome.warnings) {
    lines.push(`warning: ${warning}`);
  }
  return lines;
}
