// Pure HTML renderers. Every feature value is printed from the API's
// `display` string verbatim (escaping never alters the digits/dots the
// server emits), so what the annotator sees is byte-equal to the payload.

import type {
  AccountDetail,
  AccountListResponse,
  CommentView,
  EventView,
  ProgressReport,
} from "./api.js";
import { BOT_CATEGORIES, currentPage, pageCount, type Decision, type QueueState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderProgress(progress: ProgressReport): string {
  const confirmed = progress.counts["confirmed"] ?? 0;
  const pct = progress.total > 0 ? Math.round((100 * confirmed) / progress.total) : 0;
  const parts = ["unlabeled", "pending", "conflict", "confirmed"]
    .map((status) => `${status} ${progress.counts[status] ?? 0}`)
    .join(" · ");
  return (
    `<div class="progress" role="status">` +
    `<div class="progress-bar"><div class="progress-fill" style="width:${pct}%"></div></div>` +
    `<span class="progress-text">${pct}% confirmed (${escapeHtml(parts)})</span>` +
    `</div>`
  );
}

export function renderQueue(list: AccountListResponse, state: QueueState): string {
  if (list.total === 0) {
    return (
      `<div class="empty-state">No ${escapeHtml(state.status)} accounts. ` +
      `Pick another status filter above.</div>`
    );
  }
  const rows = list.accounts
    .map((account) => {
      const summary = Object.values(account.summary)
        .map((value) => `<td class="num">${escapeHtml(value)}</td>`)
        .join("");
      return (
        `<tr class="queue-row" data-login="${escapeHtml(account.login)}">` +
        `<td class="login"><a href="#/account/${encodeURIComponent(account.login)}">` +
        `${escapeHtml(account.login)}</a></td>` +
        `<td><span class="badge badge-${escapeHtml(account.status)}">` +
        `${escapeHtml(account.status)}</span></td>` +
        summary +
        `</tr>`
      );
    })
    .join("");
  const headers = list.accounts.length
    ? Object.keys(list.accounts[0].summary)
        .map((key) => `<th>${escapeHtml(key)}</th>`)
        .join("")
    : "";
  const pages = pageCount(list.total, state.limit);
  return (
    `<table class="queue"><thead><tr><th>login</th><th>status</th>${headers}</tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<div class="pager">page ${currentPage(state)} of ${pages} (${list.total} accounts) ` +
    `<button id="prev-page">prev</button> <button id="next-page">next</button></div>`
  );
}

export function highlightTerms(text: string | null, hits: string[]): string {
  if (!text) return `<span class="absent">—</span>`;
  if (!hits.length) return escapeHtml(text);
  // mark every case-insensitive occurrence of each hit term
  const pattern = new RegExp(
    `(${hits.map((t) => t.replace(/[.*+?^${}()|[\]\\]/g, "\\$&")).join("|")})`,
    "gi",
  );
  // split with a capture group keeps the matched separators; a part is a hit
  // iff it equals one of the terms case-insensitively
  return text
    .split(pattern)
    .map((part) =>
      hits.some((term) => part.toLowerCase() === term)
        ? `<mark>${escapeHtml(part)}</mark>`
        : escapeHtml(part),
    )
    .join("");
}

export function renderFeatureTable(detail: AccountDetail): string {
  const rows = detail.features
    .map((feature) => {
      const width = Math.round(feature.percentile * 100);
      return (
        `<tr>` +
        `<td class="feat-name">${escapeHtml(feature.name)}</td>` +
        `<td class="feat-value" data-name="${escapeHtml(feature.name)}">` +
        `${escapeHtml(feature.display)}</td>` +
        `<td class="feat-bar"><div class="bar" style="width:${width}%" ` +
        `title="${width}th percentile in corpus"></div></td>` +
        `</tr>`
      );
    })
    .join("");
  return `<table class="features"><tbody>${rows}</tbody></table>`;
}

export type CommentRun = { text: string; count: number; first_at: string };

export function groupCommentRuns(comments: CommentView[]): CommentRun[] {
  // consecutive identical texts collapse into one run with a counter, which
  // makes templated bot output visually obvious
  const runs: CommentRun[] = [];
  for (const comment of comments) {
    const last = runs[runs.length - 1];
    if (last && last.text === comment.text) {
      last.count += 1;
    } else {
      runs.push({ text: comment.text, count: 1, first_at: comment.occurred_at });
    }
  }
  return runs;
}

export function renderComments(comments: CommentView[]): string {
  if (!comments.length) return `<div class="absent">no comments in window</div>`;
  const items = groupCommentRuns(comments)
    .map(
      (run) =>
        `<li class="comment${run.count > 1 ? " repeated" : ""}">` +
        `<span class="when">${escapeHtml(run.first_at)}</span>` +
        (run.count > 1 ? `<span class="run-count">×${run.count}</span>` : "") +
        `<span class="text">${escapeHtml(run.text)}</span></li>`,
    )
    .join("");
  return `<ul class="comments">${items}</ul>`;
}

export function renderTimeline(events: EventView[]): string {
  if (!events.length) return `<div class="absent">no events in window</div>`;
  const items = events
    .map(
      (event) =>
        `<li><span class="when">${escapeHtml(event.occurred_at)}</span>` +
        `<span class="etype">${escapeHtml(event.event_type)}</span>` +
        `<span class="repo">${escapeHtml(event.repo_id)}</span>` +
        (event.thread_key ? `<span class="thread">${escapeHtml(event.thread_key)}</span>` : "") +
        `</li>`,
    )
    .join("");
  return `<ul class="timeline">${items}</ul>`;
}

export function renderDecisionControls(decision: Decision, annotator: string): string {
  const botActive = decision.value === "bot" ? " active" : "";
  const humanActive = decision.value === "human" ? " active" : "";
  const categoryDisabled = decision.value === "bot" ? "" : " disabled";
  const options = BOT_CATEGORIES.map(
    (category) =>
      `<option value="${category}"${decision.category === category ? " selected" : ""}>` +
      `${category}</option>`,
  ).join("");
  return (
    `<div class="decision">` +
    `<input id="annotator" placeholder="annotator id" value="${escapeHtml(annotator)}" />` +
    `<button id="choose-bot" class="choice${botActive}" title="shortcut: b">bot</button>` +
    `<button id="choose-human" class="choice${humanActive}" title="shortcut: h">human</button>` +
    `<select id="category"${categoryDisabled} title="shortcuts: 1-4">` +
    `<option value="">category (optional)</option>${options}</select>` +
    `<button id="submit-label" title="shortcut: Enter">submit</button>` +
    `<span id="decision-note"></span>` +
    `</div>`
  );
}

export function renderDetail(detail: AccountDetail, decision: Decision, annotator: string): string {
  const profile = detail.profile;
  const hits = detail.lexicon_hits;
  const labels = detail.labels
    .map(
      (label) =>
        `<li>${escapeHtml(label.annotator)}: <strong>${label.value}</strong>` +
        (label.category ? ` (${escapeHtml(label.category)})` : "") +
        ` <span class="when">${escapeHtml(label.decided_at)}</span></li>`,
    )
    .join("");
  return (
    `<section class="detail" data-login="${escapeHtml(detail.login)}">` +
    `<header><h2>${escapeHtml(detail.login)}</h2>` +
    `<span class="badge badge-${escapeHtml(detail.status)}">${escapeHtml(detail.status)}</span>` +
    `</header>` +
    `<div class="columns">` +
    `<div class="col">` +
    `<h3>profile</h3><dl class="profile">` +
    `<dt>login</dt><dd>${highlightTerms(profile.login, hits["login"] ?? [])}</dd>` +
    `<dt>name</dt><dd>${highlightTerms(profile.name, hits["name"] ?? [])}</dd>` +
    `<dt>bio</dt><dd>${highlightTerms(profile.bio, hits["bio"] ?? [])}</dd>` +
    `<dt>email</dt><dd>${highlightTerms(profile.email, hits["email"] ?? [])}</dd>` +
    `<dt>tag</dt><dd>${escapeHtml(profile.tag ?? "—")}</dd>` +
    `<dt>followers</dt><dd>${profile.followers ?? "—"}</dd>` +
    `<dt>following</dt><dd>${profile.following ?? "—"}</dd>` +
    `</dl>` +
    `<h3>features</h3>${renderFeatureTable(detail)}` +
    `</div>` +
    `<div class="col">` +
    `<h3>labels so far</h3><ul class="labels">${labels || "<li>none</li>"}</ul>` +
    `<h3>recent comments</h3>${renderComments(detail.comments)}` +
    `<h3>recent events</h3>${renderTimeline(detail.events)}` +
    `</div>` +
    `</div>` +
    renderDecisionControls(decision, annotator) +
    `</section>`
  );
}

// Extraction helper used by the fidelity tests (and nothing else): pull the
// rendered feature values back out of the HTML in table order.
export function extractRenderedFeatureValues(html: string): Record<string, string> {
  const out: Record<string, string> = {};
  const pattern = /<td class="feat-value" data-name="([^"]+)">([^<]*)<\/td>/g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(html)) !== null) {
    out[match[1]] = match[2]
      .replace(/&amp;/g, "&")
      .replace(/&lt;/g, "<")
      .replace(/&gt;/g, ">")
      .replace(/&quot;/g, '"');
  }
  return out;
}
