// Client-side view state: queue pagination, the annotator identity, and the
// pending decision. No label state of record lives here; the API is the
// single source of truth and a reload loses nothing already POSTed.

import type { LabelRequest } from "./api.js";

export const BOT_CATEGORIES = [
  "AutomaticCommenting",
  "CICD",
  "Workflow",
  "Scanning",
] as const;

export type QueueState = {
  status: string;
  offset: number;
  limit: number;
  total: number;
};

export function pageCount(total: number, limit: number): number {
  if (limit <= 0) return 0;
  return Math.ceil(total / limit);
}

export function currentPage(state: QueueState): number {
  return Math.floor(state.offset / state.limit) + 1;
}

export function nextOffset(state: QueueState): number {
  const next = state.offset + state.limit;
  return next < state.total ? next : state.offset;
}

export function prevOffset(state: QueueState): number {
  return Math.max(0, state.offset - state.limit);
}

// --- pending decision -------------------------------------------------------

export type Decision = {
  value: "bot" | "human" | null;
  category: string | null;
};

export function emptyDecision(): Decision {
  return { value: null, category: null };
}

export function chooseValue(decision: Decision, value: "bot" | "human"): Decision {
  // switching away from "bot" clears the category; it only applies to bots
  const category = value === "bot" ? decision.category : null;
  return { value, category };
}

export function chooseCategory(decision: Decision, category: string | null): Decision {
  if (decision.value !== "bot") return decision;
  if (category !== null && !BOT_CATEGORIES.includes(category as never)) {
    return decision;
  }
  return { ...decision, category };
}

export function categoryEnabled(decision: Decision): boolean {
  return decision.value === "bot";
}

export function buildLabelRequest(
  decision: Decision,
  annotator: string,
  expectedStatus?: string,
): LabelRequest | null {
  // a submission always carries a non-empty annotator identity
  if (!decision.value || !annotator.trim()) return null;
  const body: LabelRequest = { value: decision.value, annotator: annotator.trim() };
  if (decision.value === "bot" && decision.category) body.category = decision.category;
  if (expectedStatus !== undefined) body.expected_status = expectedStatus;
  return body;
}

// --- annotator identity -----------------------------------------------------

export type KeyValueStore = {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
};

const ANNOTATOR_KEY = "bothound.annotator";

export function loadAnnotator(store: KeyValueStore): string {
  return store.getItem(ANNOTATOR_KEY) ?? "";
}

export function saveAnnotator(store: KeyValueStore, name: string): string {
  const trimmed = name.trim();
  store.setItem(ANNOTATOR_KEY, trimmed);
  return trimmed;
}
