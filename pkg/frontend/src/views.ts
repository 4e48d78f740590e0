/**
 * String-rendered views. Renderers are pure (state in, HTML out) so they
 * can be tested without a DOM; the shell mounts them and wires events via
 * data-action attributes.
 */

import type {
  ChangeDoc,
  GeneratedCaseDoc,
  PlaygroundReply,
  ProposalDoc,
  SavedCaseDoc,
  TestReportDoc,
} from "./api.js";
import {
  type EditPanelState,
  caseStatus,
  historyRows,
  saveEnabled,
  tally,
  versionDiff,
} from "./model.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const esc = escapeHtml;

function outcome(triggered: string | null, response: string | null): string {
  if (triggered === null) return `<em class="no-trigger">no trigger</em>`;
  const reply = response === null ? "<em>(no reply)</em>" : esc(response);
  return `<strong>${esc(triggered)}</strong>: ${reply}`;
}

export function renderProposalList(proposals: ProposalDoc[]): string {
  if (proposals.length === 0) {
    return `<section class="proposal-list"><p>No proposals yet.</p></section>`;
  }
  const items = proposals
    .map(
      (p) => `
      <li class="proposal-row status-${p.status}">
        <a href="#/proposals/${esc(p.id)}" data-action="open-proposal" data-id="${esc(p.id)}">
          ${esc(p.title)}
        </a>
        <span class="status">${esc(p.status)}</span>
        <span class="counters">good ${p.counters.good} / bad ${p.counters.bad} / tbd ${p.counters.tbd}</span>
      </li>`,
    )
    .join("\n");
  return `<section class="proposal-list"><ul>${items}</ul></section>`;
}

function renderVoteButtons(caseId: string, kind: "saved" | "generated"): string {
  return `
    <span class="vote-buttons">
      <button data-action="vote" data-kind="${kind}" data-id="${esc(caseId)}" data-direction="up">👍</button>
      <button data-action="vote" data-kind="${kind}" data-id="${esc(caseId)}" data-direction="down">👎</button>
    </span>`;
}

export function renderSavedCase(saved: SavedCaseDoc): string {
  const { ups, downs } = tally(saved.votes);
  const rows = historyRows(saved)
    .map((row) => `<li>v${row.version}: ${esc(row.label)}</li>`)
    .join("");
  return `
    <li class="case saved-case status-${caseStatus(ups, downs)}" data-case-id="${esc(saved.id)}">
      <button data-action="toggle-history" data-id="${esc(saved.id)}" class="case-summary">
        <span class="channel">${esc(saved.channel)}</span>
        <span class="message">${esc(saved.user_message)}</span>
      </button>
      <span class="tally">👍 ${ups} 👎 ${downs}</span>
      ${renderVoteButtons(saved.id, "saved")}
      <div class="case-popup" hidden>
        <p class="origin">origin: ${esc(saved.origin)}</p>
        <p>Responses across edits:</p>
        <ul class="response-history">${rows || "<li>no runs recorded yet</li>"}</ul>
      </div>
    </li>`;
}

export function renderGeneratedCase(row: GeneratedCaseDoc): string {
  return `
    <li class="case generated-case" data-case-id="${esc(row.case_id)}">
      <span class="kind">${esc(row.kind ?? "")}</span>
      <span class="channel">${esc(row.channel)}</span>
      <span class="message">${esc(row.user_message)}</span>
      <span class="bot">${outcome(row.triggered_task, row.bot_response)}</span>
      ${row.selection_reason ? `<p class="why">${esc(row.selection_reason)}</p>` : ""}
      ${renderVoteButtons(row.case_id, "generated")}
    </li>`;
}

function renderHistory(proposal: ProposalDoc): string {
  const entries = proposal.edit_versions
    .map((version, index) => {
      const rows = versionDiff(proposal.edit_versions, index)
        .map((row) => `<li class="diff-${row.op}">[${row.op}] ${esc(row.label)}: ${esc(row.detail)}</li>`)
        .join("");
      return `
        <details class="edit-version" data-version="${version.version}">
          <summary>v${version.version} by ${esc(version.author)}</summary>
          <ul class="diff">${rows || "<li>(empty change set)</li>"}</ul>
          ${
            version.version < proposal.edit_versions.length - 1 && proposal.status === "open"
              ? `<button data-action="revert" data-version="${version.version}">Revert to this version</button>`
              : ""
          }
        </details>`;
    })
    .join("\n");
  return `<section class="edit-history"><h3>Edit history</h3>${entries}</section>`;
}

export function renderProposalPage(proposal: ProposalDoc, panel: EditPanelState | null): string {
  const discuss = proposal.thread_ref
    ? `<a class="discuss" data-action="discuss" href="#thread/${esc(proposal.thread_ref)}">Discuss</a>`
    : "";
  const savedCases = proposal.saved_cases.map(renderSavedCase).join("\n");
  const deployDisabled = proposal.status !== "open" ? "disabled" : "";
  return `
    <article class="proposal-page" data-proposal-id="${esc(proposal.id)}">
      <header>
        <h2>${esc(proposal.title)}</h2>
        <p class="description">${esc(proposal.description)}</p>
        <span class="status">${esc(proposal.status)}</span>
        ${discuss}
        <span class="counters" data-testid="counters">
          good ${proposal.counters.good} / bad ${proposal.counters.bad} / tbd ${proposal.counters.tbd}
        </span>
      </header>
      <section class="deploy">
        <span class="deploy-votes">${proposal.deploy_votes.length} deploy vote(s)</span>
        <button data-action="deploy-vote" ${deployDisabled}>Vote to deploy</button>
        <button data-action="deploy" ${deployDisabled}>Deploy</button>
        <button data-action="toggle-status">
          ${proposal.status === "closed" ? "Reopen" : "Close"}
        </button>
      </section>
      <section class="saved-cases">
        <h3>Saved test cases</h3>
        <ul>${savedCases || "<li>none saved yet</li>"}</ul>
        <form data-action="manual-case" class="manual-case">
          <input name="channel" placeholder="#channel" required>
          <input name="message" placeholder="enter other cases manually" required>
          <button type="submit">Save case</button>
        </form>
      </section>
      ${panel ? renderEditPanel(panel) : ""}
      ${renderHistory(proposal)}
    </article>`;
}

function renderChangeCard(change: ChangeDoc, index: number): string {
  if (change.op === "remove") {
    return `
      <fieldset class="change" data-index="${index}">
        <legend>remove</legend>
        <code>${esc(change.task_id)}</code>
        <button data-action="drop-change" data-index="${index}">✕</button>
      </fieldset>`;
  }
  const task = change.task;
  return `
    <fieldset class="change" data-index="${index}">
      <legend>${change.op}</legend>
      <label>Name <input data-field="name" data-index="${index}" value="${esc(task.name)}"></label>
      <label>Trigger <textarea data-field="trigger" data-index="${index}">${esc(task.trigger)}</textarea></label>
      <label>Action <textarea data-field="action" data-index="${index}">${esc(task.action)}</textarea></label>
      <button data-action="drop-change" data-index="${index}">✕</button>
    </fieldset>`;
}

export function renderReport(report: TestReportDoc): string {
  const regressions = report.regressions
    .map(
      (row) => `
      <li class="regression-row" data-case-id="${esc(row.case_id)}">
        <span class="channel">${esc(row.channel)}</span>
        <span class="message">${esc(row.user_message)}</span>
        <span class="bot">${row.error ? `<em class="error">${esc(row.error)}</em>` : outcome(row.triggered_task, row.bot_response)}</span>
      </li>`,
    )
    .join("\n");
  const generated = report.generated.map(renderGeneratedCase).join("\n");
  return `
    <section class="report">
      <h4>Saved cases re-run against this draft</h4>
      <ul class="regressions">${regressions || "<li>no saved cases yet</li>"}</ul>
      <h4>Generated test cases</h4>
      <ul class="generated">${generated || "<li>no candidates survived</li>"}</ul>
      ${report.anomalies.length ? `<p class="anomalies">${esc(report.anomalies.join("; "))}</p>` : ""}
    </section>`;
}

export function renderEditPanel(state: EditPanelState): string {
  const cards = state.draft.map(renderChangeCard).join("\n");
  const canSave = saveEnabled(state);
  const hint = state.report === null
    ? "Run Test + Generate before saving."
    : canSave
      ? "Ready to save."
      : "Vote on at least one test case (and re-test after edits) to save.";
  return `
    <section class="edit-panel">
      <h3>Edit</h3>
      <div class="changes">${cards}</div>
      <button data-action="add-task">Add task</button>
      <button data-action="test-generate">Test + Generate</button>
      <button data-action="save-edit" ${canSave ? "" : "disabled"}>Save</button>
      <p class="save-hint">${esc(hint)}</p>
      ${
        state.gateError
          ? `<p class="gate-error" data-gate="${esc(state.gateError.code)}">
               ${esc(state.gateError.code)}: ${esc(state.gateError.message)}
             </p>`
          : ""
      }
      ${state.report ? renderReport(state.report) : ""}
    </section>`;
}

export interface PlaygroundState {
  channels: string[];
  channel: string;
  message: string;
  reply: PlaygroundReply | null;
}

export function renderPlayground(state: PlaygroundState): string {
  const options = state.channels
    .map((ch) => `<option value="${esc(ch)}" ${ch === state.channel ? "selected" : ""}>${esc(ch)}</option>`)
    .join("");
  const result = state.reply === null
    ? ""
    : `
      <div class="playground-result" data-testid="playground-result">
        ${outcome(state.reply.triggered_task, state.reply.bot_response)}
        <button data-action="propose-from-case">Create proposal from this case</button>
      </div>`;
  return `
    <section class="playground">
      <h2>Playground</h2>
      <p>Try the live bot without affecting the server.</p>
      <form data-action="playground-send">
        <select name="channel">${options}</select>
        <input name="message" value="${esc(state.message)}" placeholder="say something">
        <button type="submit">Send</button>
      </form>
      ${result}
    </section>`;
}

export function renderError(error: { status?: number; message: string }): string {
  return `<section class="page-error">Error${error.status ? ` ${error.status}` : ""}: ${esc(error.message)}</section>`;
}
