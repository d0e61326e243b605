import { describe, expect, it } from "vitest";

import type { AccountDetail, AccountListResponse, CommentView } from "../src/api.js";
import {
  escapeHtml,
  extractRenderedFeatureValues,
  groupCommentRuns,
  highlightTerms,
  renderDetail,
  renderFeatureTable,
  renderProgress,
  renderQueue,
} from "../src/render.js";
import { emptyDecision, chooseValue } from "../src/state.js";

function sampleDetail(): AccountDetail {
  return {
    login: "reply-bot-1",
    status: "unlabeled",
    profile: {
      login: "reply-bot-1",
      name: "Reply Bot App",
      bio: null,
      email: null,
      tag: "Bot",
      followers: 0,
      following: 1,
    },
    features: [
      { name: "f_login", value: 1, display: "1", percentile: 0.97 },
      { name: "median_response_time", value: 8.5, display: "8.5", percentile: 0.02 },
      { name: "comment_similarity", value: null, display: "", percentile: 0 },
      { name: "periodicity", value: 0.9229, display: "0.9229", percentile: 0.99 },
    ],
    lexicon_hits: { login: ["bot"], name: ["bot"], bio: [], email: [] },
    labels: [],
    events: [
      {
        occurred_at: "2024-01-08T03:00:00Z",
        event_type: "IssueOpen",
        repo_id: "1004",
        thread_key: "1004#9",
        has_comment: false,
      },
    ],
    comments: [
      { occurred_at: "2024-01-10T03:00:05Z", text: "Thanks for opening this!" },
      { occurred_at: "2024-01-09T03:00:05Z", text: "Thanks for opening this!" },
      { occurred_at: "2024-01-08T03:00:05Z", text: "Build 7 queued." },
    ],
  };
}

describe("feature rendering fidelity", () => {
  it("renders every feature display string verbatim", () => {
    const detail = sampleDetail();
    const html = renderFeatureTable(detail);
    const rendered = extractRenderedFeatureValues(html);
    for (const feature of detail.features) {
      expect(rendered[feature.name]).toBe(feature.display);
    }
  });

  it("does not recompute values client-side", () => {
    const detail = sampleDetail();
    // an intentionally odd display string must survive untouched
    detail.features[1].display = "0008.5000";
    const rendered = extractRenderedFeatureValues(renderFeatureTable(detail));
    expect(rendered["median_response_time"]).toBe("0008.5000");
  });
});

describe("queue rendering", () => {
  const list: AccountListResponse = {
    total: 25,
    offset: 0,
    limit: 10,
    accounts: [
      { login: "a", status: "unlabeled", summary: { n_activity: "5" } },
      { login: "b", status: "conflict", summary: { n_activity: "9" } },
    ],
  };

  it("shows pagination arithmetic: 25 accounts at page size 10 is 3 pages", () => {
    const html = renderQueue(list, { status: "unlabeled", offset: 0, limit: 10, total: 25 });
    expect(html).toContain("page 1 of 3 (25 accounts)");
  });

  it("renders an empty state with counts when the queue is drained", () => {
    const html = renderQueue(
      { total: 0, offset: 0, limit: 10, accounts: [] },
      { status: "unlabeled", offset: 0, limit: 10, total: 0 },
    );
    expect(html).toContain("No unlabeled accounts");
  });

  it("links each row to the detail view", () => {
    const html = renderQueue(list, { status: "unlabeled", offset: 0, limit: 10, total: 25 });
    expect(html).toContain('href="#/account/a"');
    expect(html).toContain("badge-conflict");
  });
});

describe("lexicon highlighting", () => {
  it("wraps hits in mark tags", () => {
    expect(highlightTerms("reply-bot-1", ["bot"])).toBe("reply-<mark>bot</mark>-1");
  });

  it("handles absent text", () => {
    expect(highlightTerms(null, ["bot"])).toContain("absent");
  });

  it("escapes the non-hit parts", () => {
    expect(highlightTerms("<b>bot</b>", ["bot"])).toBe(
      "&lt;b&gt;<mark>bot</mark>&lt;/b&gt;",
    );
  });
});

describe("comment run grouping", () => {
  it("collapses consecutive identical comments", () => {
    const comments: CommentView[] = [
      { occurred_at: "t3", text: "same" },
      { occurred_at: "t2", text: "same" },
      { occurred_at: "t1", text: "different" },
      { occurred_at: "t0", text: "same" },
    ];
    const runs = groupCommentRuns(comments);
    expect(runs.map((run) => [run.text, run.count])).toEqual([
      ["same", 2],
      ["different", 1],
      ["same", 1],
    ]);
  });
});

describe("detail view", () => {
  it("disables the category selector until bot is chosen", () => {
    const detail = sampleDetail();
    const before = renderDetail(detail, emptyDecision(), "ann-a");
    expect(before).toContain("<select id=\"category\" disabled");
    const after = renderDetail(detail, chooseValue(emptyDecision(), "bot"), "ann-a");
    expect(after).not.toContain("<select id=\"category\" disabled");
  });

  it("escapes untrusted text everywhere", () => {
    const detail = sampleDetail();
    detail.comments = [{ occurred_at: "t", text: "<script>alert(1)</script>" }];
    const html = renderDetail(detail, emptyDecision(), "ann-a");
    expect(html).not.toContain("<script>alert(1)");
    expect(html).toContain("&lt;script&gt;");
  });

  it("renders progress percentages", () => {
    const html = renderProgress({
      total: 4,
      counts: { unlabeled: 2, pending: 1, conflict: 0, confirmed: 1 },
    });
    expect(html).toContain("25% confirmed");
  });

  it("escapeHtml covers the four specials", () => {
    expect(escapeHtml(`a<b>&"c`)).toBe("a&lt;b&gt;&amp;&quot;c");
  });
});
