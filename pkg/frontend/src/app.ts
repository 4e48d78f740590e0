/**
 * Application shell: hash routing, a polling refresh loop, and event
 * wiring over the string-rendered views.
 *
 * Votes render optimistically and reconcile against the server's tally;
 * everything else waits for the server, whose gates are authoritative.
 */

import {
  ApiClient,
  ApiError,
  type ChangeDoc,
  type GeneratedCaseDoc,
  type ProposalDoc,
  type TestReportDoc,
} from "./api.js";
import {
  type EditPanelState,
  emptyPanel,
  noteDraftEdited,
  noteReport,
  noteVote,
  optimistic,
  seedFromPlayground,
} from "./model.js";
import {
  type PlaygroundState,
  renderError,
  renderPlayground,
  renderProposalList,
  renderProposalPage,
} from "./views.js";

export const DEFAULT_POLL_INTERVAL_MS = 5000;

interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  serverId: string;
  pollIntervalMs?: number;
}

export class App {
  private root: HTMLElement;
  private api: ApiClient;
  private serverId: string;
  private pollIntervalMs: number;
  private pollTimer: number | null = null;

  private proposals: ProposalDoc[] = [];
  private current: ProposalDoc | null = null;
  private panel: EditPanelState | null = null;
  private playground: PlaygroundState = {
    channels: ["#general", "#botender"],
    channel: "#general",
    message: "",
    reply: null,
  };

  constructor(options: AppOptions) {
    this.root = options.root;
    this.api = options.api;
    this.serverId = options.serverId;
    this.pollIntervalMs = options.pollIntervalMs ?? DEFAULT_POLL_INTERVAL_MS;
  }

  async start(): Promise<void> {
    window.addEventListener("hashchange", () => void this.refresh());
    this.root.addEventListener("click", (event) => void this.onClick(event));
    this.root.addEventListener("submit", (event) => void this.onSubmit(event));
    this.root.addEventListener("input", (event) => this.onInput(event));
    this.pollTimer = window.setInterval(() => void this.refresh(true), this.pollIntervalMs);
    await this.refresh();
  }

  stop(): void {
    if (this.pollTimer !== null) window.clearInterval(this.pollTimer);
  }

  private route(): { page: "list" | "proposal" | "playground"; id?: string } {
    const hash = window.location.hash;
    const match = /^#\/proposals\/(.+)$/.exec(hash);
    if (match) return { page: "proposal", id: match[1] };
    if (hash === "#/playground") return { page: "playground" };
    return { page: "list" };
  }

  /** Re-fetch the current route's data; polling passes background=true. */
  async refresh(background = false): Promise<void> {
    const route = this.route();
    try {
      if (route.page === "proposal" && route.id) {
        this.current = await this.api.getProposal(route.id);
        if (this.panel === null || !background) {
          this.panel = this.panel ?? emptyPanel(this.latestDraft());
        }
      } else if (route.page === "list") {
        this.proposals = (await this.api.listProposals(this.serverId)).proposals;
        this.current = null;
        this.panel = null;
      }
      this.render();
    } catch (error) {
      if (!background) this.renderFailure(error);
    }
  }

  private latestDraft(): ChangeDoc[] {
    const versions = this.current?.edit_versions ?? [];
    const latest = versions[versions.length - 1];
    return latest ? (JSON.parse(JSON.stringify(latest.changes)) as ChangeDoc[]) : [];
  }

  private render(): void {
    const route = this.route();
    if (route.page === "playground") {
      this.root.innerHTML = renderPlayground(this.playground);
    } else if (route.page === "proposal" && this.current) {
      this.root.innerHTML = renderProposalPage(this.current, this.panel);
    } else {
      this.root.innerHTML = renderProposalList(this.proposals);
    }
  }

  private renderFailure(error: unknown): void {
    if (error instanceof ApiError) {
      this.root.innerHTML = renderError({ status: error.status, message: error.message });
    } else {
      this.root.innerHTML = renderError({ message: String(error) });
    }
  }

  private generatedRow(caseId: string): GeneratedCaseDoc | undefined {
    return this.panel?.report?.generated.find((row) => row.case_id === caseId);
  }

  private async onClick(event: Event): Promise<void> {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target || !(this.root.contains(target))) return;
    const action = target.dataset.action;
    try {
      switch (action) {
        case "vote":
          await this.castVote(target);
          break;
        case "toggle-history": {
          const popup = target.parentElement?.querySelector<HTMLElement>(".case-popup");
          if (popup) popup.hidden = !popup.hidden;
          break;
        }
        case "test-generate":
          await this.runTest();
          break;
        case "save-edit":
          await this.saveEdit();
          break;
        case "add-task":
          this.addTask();
          break;
        case "drop-change":
          this.dropChange(Number(target.dataset.index));
          break;
        case "deploy-vote":
          if (this.current) await this.api.voteDeploy(this.current.id);
          await this.refresh();
          break;
        case "deploy":
          if (this.current) await this.api.deploy(this.current.id);
          await this.refresh();
          break;
        case "toggle-status":
          if (this.current) {
            const to = this.current.status === "closed" ? "open" : "closed";
            await this.api.setStatus(this.current.id, to);
            await this.refresh();
          }
          break;
        case "propose-from-case":
          await this.proposeFromCase();
          break;
        default:
          break;
      }
    } catch (error) {
      this.surfaceGateError(error);
    }
  }

  private async castVote(target: HTMLElement): Promise<void> {
    const caseId = target.dataset.id ?? "";
    const direction = (target.dataset.direction ?? "up") as "up" | "down";
    const row = target.dataset.kind === "generated" ? this.generatedRow(caseId) : undefined;

    const tallyNode = this.root.querySelector<HTMLElement>(
      `[data-case-id="${caseId}"] .tally`,
    );
    await optimistic({
      apply: () => {
        const before = tallyNode?.textContent ?? "";
        if (tallyNode) tallyNode.textContent = `${before} …`;
        return before;
      },
      remote: async () => {
        const result = await this.api.voteCase(
          caseId,
          direction,
          row && this.current && this.panel?.report
            ? {
                proposalId: this.current.id,
                reportHash: this.panel.report.draft_hash,
                row,
              }
            : undefined,
        );
        if (tallyNode) tallyNode.textContent = `👍 ${result.ups} 👎 ${result.downs}`;
      },
      revert: (before) => {
        if (tallyNode) tallyNode.textContent = before;
      },
    });
    if (this.panel) this.panel = noteVote(this.panel, caseId);
    await this.refresh(true);
    this.render();
  }

  private async runTest(): Promise<void> {
    if (!this.current || !this.panel) return;
    const report: TestReportDoc = await this.api.testDraft(this.current.id, this.panel.draft);
    this.panel = noteReport(this.panel, report);
    this.render();
  }

  private async saveEdit(): Promise<void> {
    if (!this.current || !this.panel?.report) return;
    await this.api.saveEdit(this.current.id, this.panel.draft, this.panel.report.draft_hash);
    this.panel = null;
    await this.refresh();
  }

  private addTask(): void {
    if (!this.panel) return;
    const count = this.panel.draft.length;
    const draft: ChangeDoc[] = [
      ...this.panel.draft,
      {
        op: "add",
        task: { id: `task-${Date.now()}-${count}`, name: "New task", trigger: "", action: "" },
      },
    ];
    this.panel = noteDraftEdited(this.panel, draft);
    this.render();
  }

  private dropChange(index: number): void {
    if (!this.panel || Number.isNaN(index)) return;
    const draft = this.panel.draft.filter((_, i) => i !== index);
    this.panel = noteDraftEdited(this.panel, draft);
    this.render();
  }

  private onInput(event: Event): void {
    const target = event.target as HTMLInputElement | HTMLTextAreaElement;
    const field = target.dataset?.field;
    if (!field || !this.panel) return;
    const index = Number(target.dataset.index);
    const draft = this.panel.draft.map((change, i) => {
      if (i !== index || change.op === "remove") return change;
      return { ...change, task: { ...change.task, [field]: target.value } };
    });
    // Any edit after a test stales the report; Save goes dark until re-test.
    this.panel = noteDraftEdited(this.panel, draft as ChangeDoc[]);
    const saveButton = this.root.querySelector<HTMLButtonElement>('[data-action="save-edit"]');
    if (saveButton) saveButton.disabled = true;
  }

  private async onSubmit(event: Event): Promise<void> {
    const form = event.target as HTMLFormElement;
    if (!form.dataset.action) return;
    event.preventDefault();
    const data = new FormData(form);
    try {
      if (form.dataset.action === "playground-send") {
        const channel = String(data.get("channel") ?? this.playground.channel);
        const message = String(data.get("message") ?? "");
        const reply = await this.api.playground(this.serverId, channel, message);
        this.playground = { ...this.playground, channel, message, reply };
        this.render();
      } else if (form.dataset.action === "manual-case" && this.current) {
        await this.api.addManualCase(
          this.current.id,
          String(data.get("channel") ?? ""),
          String(data.get("message") ?? ""),
        );
        await this.refresh();
      }
    } catch (error) {
      this.surfaceGateError(error);
    }
  }

  private async proposeFromCase(): Promise<void> {
    const { channel, message, reply } = this.playground;
    if (reply === null) return;
    const title = window.prompt("Proposal title?", "From playground case") ?? "";
    if (!title) return;
    const proposal = await this.api.createProposal(this.serverId, {
      title,
      description: `Proposed from a playground case in ${channel}`,
      draft: [],
      seed_case: seedFromPlayground(channel, message, reply),
    });
    window.location.hash = `#/proposals/${proposal.id}`;
  }

  /** 422/409 bodies surface inline with the gate named; others replace the page. */
  private surfaceGateError(error: unknown): void {
    if (error instanceof ApiError && (error.status === 422 || error.status === 409)) {
      if (this.panel) {
        this.panel = { ...this.panel, gateError: { code: error.code, message: error.message } };
        this.render();
        return;
      }
    }
    this.renderFailure(error);
  }
}
