/**
 * Typed client for the Botender HTTP API.
 *
 * Every mutation the UI performs goes through here; the server owns every
 * gate, so this client never pre-filters requests beyond basic shape.
 */

export interface TaskDoc {
  id: string;
  name: string;
  trigger: string;
  action: string;
}

export interface TaskSetDoc {
  server_id: string;
  version: number;
  tasks: TaskDoc[];
}

export type ChangeDoc =
  | { op: "add" | "edit"; task: TaskDoc }
  | { op: "remove"; task_id: string };

export interface EditVersionDoc {
  version: number;
  author: string;
  changes: ChangeDoc[];
  created_at: number;
}

export interface HistoryEntryDoc {
  version: number;
  triggered_task: string | null;
  bot_response: string | null;
}

export interface SavedCaseDoc {
  id: string;
  channel: string;
  user_message: string;
  origin: "generated" | "manual" | "playground";
  created_version: number;
  response_history: HistoryEntryDoc[];
  votes: Record<string, "up" | "down">;
  kind: string | null;
  reasoning: string | null;
}

export interface CountersDoc {
  good: number;
  bad: number;
  tbd: number;
}

export interface ProposalDoc {
  id: string;
  server_id: string;
  title: string;
  description: string;
  status: "open" | "deployed" | "closed";
  edit_versions: EditVersionDoc[];
  saved_cases: SavedCaseDoc[];
  deploy_votes: string[];
  deploy_downvotes: string[];
  thread_ref: string | null;
  counters: CountersDoc;
}

export interface RegressionRowDoc {
  case_id: string;
  channel: string;
  user_message: string;
  triggered_task: string | null;
  bot_response: string | null;
  error: string | null;
}

export interface GeneratedCaseDoc {
  case_id: string;
  kind: string | null;
  channel: string;
  user_message: string;
  triggered_task: string | null;
  bot_response: string | null;
  reasoning: string | null;
  selection_reason: string | null;
}

export interface TestReportDoc {
  proposal_id: string;
  draft_hash: string;
  base_version: number;
  regressions: RegressionRowDoc[];
  generated: GeneratedCaseDoc[];
  anomalies: string[];
}

export interface PlaygroundReply {
  triggered_task: string | null;
  bot_response: string | null;
}

export interface VoteTally {
  case_id: string;
  ups: number;
  downs: number;
}

export interface SeedCasePayload {
  channel: string;
  user_message: string;
  triggered_task: string | null;
  bot_response: string | null;
}

/** Structured error body the service sends for every failure. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: {
        "content-type": "application/json",
        "x-botender-token": this.token,
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof payload.code === "string" ? payload.code : "error";
      const message = typeof payload.message === "string" ? payload.message : response.statusText;
      throw new ApiError(response.status, code, message);
    }
    return payload as T;
  }

  getTasks(serverId: string): Promise<TaskSetDoc> {
    return this.request("GET", `/servers/${serverId}/tasks`);
  }

  listProposals(serverId: string): Promise<{ proposals: ProposalDoc[] }> {
    return this.request("GET", `/servers/${serverId}/proposals`);
  }

  getProposal(proposalId: string): Promise<ProposalDoc> {
    return this.request("GET", `/proposals/${proposalId}`);
  }

  createProposal(serverId: string, body: {
    title: string;
    description: string;
    draft: ChangeDoc[];
    seed_case?: SeedCasePayload;
    seed_vote?: "up" | "down";
  }): Promise<ProposalDoc> {
    return this.request("POST", `/servers/${serverId}/proposals`, body);
  }

  testDraft(proposalId: string, draft: ChangeDoc[]): Promise<TestReportDoc> {
    return this.request("POST", `/proposals/${proposalId}/test`, { draft });
  }

  saveEdit(proposalId: string, draft: ChangeDoc[], reportHash: string): Promise<EditVersionDoc> {
    return this.request("POST", `/proposals/${proposalId}/edits`, {
      draft,
      report_hash: reportHash,
    });
  }

  voteCase(caseId: string, direction: "up" | "down", generated?: {
    proposalId: string;
    reportHash: string;
    row: GeneratedCaseDoc;
  }): Promise<VoteTally> {
    const body: Record<string, unknown> = { direction };
    if (generated) {
      body.proposal_id = generated.proposalId;
      body.report_hash = generated.reportHash;
      body.case = generated.row;
    }
    return this.request("POST", `/cases/${caseId}/votes`, body);
  }

  addManualCase(proposalId: string, channel: string, userMessage: string,
                direction: "up" | "down" = "up"): Promise<SavedCaseDoc> {
    return this.request("POST", `/proposals/${proposalId}/cases`, {
      channel,
      user_message: userMessage,
      direction,
    });
  }

  voteDeploy(proposalId: string, direction: "up" | "down" = "up"): Promise<{ deploy_votes: number }> {
    return this.request("POST", `/proposals/${proposalId}/deploy-votes`, { direction });
  }

  deploy(proposalId: string): Promise<TaskSetDoc> {
    return this.request("POST", `/proposals/${proposalId}/deploy`);
  }

  setStatus(proposalId: string, to: "open" | "closed"): Promise<ProposalDoc> {
    return this.request("POST", `/proposals/${proposalId}/status`, { to });
  }

  playground(serverId: string, channel: string, message: string): Promise<PlaygroundReply> {
    return this.request("POST", `/servers/${serverId}/playground`, { channel, message });
  }
}
