/**
 * Pure view-model helpers.
 *
 * The server is authoritative for every gate; these helpers only decide
 * what the UI shows (button enablement, optimistic tallies, history diffs)
 * ahead of the server's answer.
 */

import type {
  ChangeDoc,
  EditVersionDoc,
  PlaygroundReply,
  SavedCaseDoc,
  SeedCasePayload,
  TestReportDoc,
} from "./api.js";

export type CaseStatus = "good" | "bad" | "tbd";

export function tally(votes: Record<string, "up" | "down">): { ups: number; downs: number } {
  let ups = 0;
  let downs = 0;
  for (const direction of Object.values(votes)) {
    if (direction === "up") ups += 1;
    else downs += 1;
  }
  return { ups, downs };
}

/** Optimistic-display status only; the server's counters win on refresh. */
export function caseStatus(ups: number, downs: number): CaseStatus {
  if (ups > downs) return "good";
  if (downs > ups) return "bad";
  return "tbd";
}

export function draftsEqual(a: ChangeDoc[], b: ChangeDoc[]): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/** Everything the edit panel needs to decide whether Save may be offered. */
export interface EditPanelState {
  draft: ChangeDoc[];
  /** The report returned by Test + Generate, with the draft it tested. */
  report: TestReportDoc | null;
  testedDraft: ChangeDoc[] | null;
  /** Case ids the current user has voted on since the report came back. */
  votedCaseIds: string[];
  /** Last gate error from the server, rendered inline. */
  gateError: { code: string; message: string } | null;
}

export function emptyPanel(draft: ChangeDoc[]): EditPanelState {
  return { draft, report: null, testedDraft: null, votedCaseIds: [], gateError: null };
}

/** True when the report belongs to the draft as it currently stands. */
export function reportIsFresh(state: EditPanelState): boolean {
  return (
    state.report !== null &&
    state.testedDraft !== null &&
    draftsEqual(state.draft, state.testedDraft)
  );
}

/**
 * Advisory only: Save lights up after a fresh test plus at least one vote.
 * The server re-checks both (409 stale_report / 422 save_vote_gate).
 */
export function saveEnabled(state: EditPanelState): boolean {
  return reportIsFresh(state) && state.votedCaseIds.length >= 1;
}

export function noteDraftEdited(state: EditPanelState, draft: ChangeDoc[]): EditPanelState {
  return { ...state, draft, gateError: null };
}

export function noteReport(state: EditPanelState, report: TestReportDoc): EditPanelState {
  return {
    ...state,
    report,
    testedDraft: JSON.parse(JSON.stringify(state.draft)) as ChangeDoc[],
    votedCaseIds: [],
    gateError: null,
  };
}

export function noteVote(state: EditPanelState, caseId: string): EditPanelState {
  if (state.votedCaseIds.includes(caseId)) return state;
  return { ...state, votedCaseIds: [...state.votedCaseIds, caseId] };
}

export interface DiffRow {
  op: "added" | "edited" | "removed" | "unchanged";
  id: string;
  label: string;
  detail: string;
}

function changeKey(change: ChangeDoc): string {
  return change.op === "remove" ? change.task_id : change.task.id;
}

function describe(change: ChangeDoc): string {
  if (change.op === "remove") return "(removed)";
  return `${change.task.trigger} -> ${change.task.action}`;
}

/**
 * Task-level comparison of two cumulative change-sets (edit versions hold
 * full snapshots, so the diff is between snapshots, not deltas).
 */
export function diffVersions(previous: ChangeDoc[], next: ChangeDoc[]): DiffRow[] {
  const before = new Map(previous.map((c) => [changeKey(c), c]));
  const after = new Map(next.map((c) => [changeKey(c), c]));
  const rows: DiffRow[] = [];
  for (const [id, change] of after) {
    const label = change.op === "remove" ? id : change.task.name;
    const old = before.get(id);
    if (old === undefined) {
      rows.push({ op: "added", id, label, detail: describe(change) });
    } else if (JSON.stringify(old) !== JSON.stringify(change)) {
      rows.push({ op: "edited", id, label, detail: `${describe(old)} => ${describe(change)}` });
    } else {
      rows.push({ op: "unchanged", id, label, detail: describe(change) });
    }
  }
  for (const [id, change] of before) {
    if (!after.has(id)) {
      const label = change.op === "remove" ? id : change.task.name;
      rows.push({ op: "removed", id, label, detail: describe(change) });
    }
  }
  return rows;
}

export function versionDiff(versions: EditVersionDoc[], index: number): DiffRow[] {
  const current = versions[index];
  if (current === undefined) return [];
  const previous = index > 0 ? versions[index - 1]?.changes ?? [] : [];
  return diffVersions(previous, current.changes);
}

/** Response history of one saved case, ordered for the case pop-up. */
export function historyRows(saved: SavedCaseDoc): { version: number; label: string }[] {
  return saved.response_history
    .slice()
    .sort((a, b) => a.version - b.version)
    .map((entry) => ({
      version: entry.version,
      label:
        entry.triggered_task === null
          ? "no trigger"
          : `${entry.triggered_task}: ${entry.bot_response ?? "(no reply)"}`,
    }));
}

/** Build the create-proposal seed from a playground exchange. */
export function seedFromPlayground(
  channel: string,
  message: string,
  reply: PlaygroundReply,
): SeedCasePayload {
  return {
    channel,
    user_message: message,
    triggered_task: reply.triggered_task,
    bot_response: reply.bot_response,
  };
}

/**
 * Optimistic mutation: apply immediately, reconcile with the server,
 * revert the snapshot on failure (exemplified by the vote buttons).
 */
export async function optimistic<T>(options: {
  apply: () => T;
  remote: () => Promise<void>;
  revert: (snapshot: T) => void;
}): Promise<void> {
  const snapshot = options.apply();
  try {
    await options.remote();
  } catch (error) {
    options.revert(snapshot);
    throw error;
  }
}
