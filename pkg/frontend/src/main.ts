// App wiring: hash routing, fetch -> render -> handle, and the submit flow.
// All state of record lives behind the API; this module only holds view
// state, so a mid-session reload loses nothing.

import { AnnotationApi, ApiError, type AccountDetail } from "./api.js";
import { makeKeyHandler } from "./keyboard.js";
import {
  renderDetail,
  renderProgress,
  renderQueue,
} from "./render.js";
import {
  BOT_CATEGORIES,
  buildLabelRequest,
  categoryEnabled,
  chooseCategory,
  chooseValue,
  emptyDecision,
  loadAnnotator,
  nextOffset,
  prevOffset,
  saveAnnotator,
  type Decision,
  type QueueState,
} from "./state.js";

const api = new AnnotationApi("");
const app = document.getElementById("app")!;
const progressHost = document.getElementById("progress")!;
const statusFilter = document.getElementById("status-filter") as HTMLSelectElement;

const queue: QueueState = { status: "unlabeled", offset: 0, limit: 10, total: 0 };
let decision: Decision = emptyDecision();
let currentDetail: AccountDetail | null = null;
let annotator = loadAnnotator(localStorage);

async function refreshProgress(): Promise<void> {
  try {
    progressHost.innerHTML = renderProgress(await api.getProgress());
  } catch {
    progressHost.innerHTML = `<div class="banner error">API unreachable — retrying…</div>`;
    setTimeout(refreshProgress, 2000);
  }
}

async function showQueue(): Promise<void> {
  currentDetail = null;
  try {
    const list = await api.listAccounts({
      status: queue.status,
      offset: queue.offset,
      limit: queue.limit,
    });
    queue.total = list.total;
    app.innerHTML = renderQueue(list, queue);
  } catch {
    app.innerHTML = `<div class="banner error">API unreachable — retrying…</div>`;
    setTimeout(showQueue, 2000);
    return;
  }
  document.getElementById("next-page")?.addEventListener("click", () => {
    queue.offset = nextOffset(queue);
    void showQueue();
  });
  document.getElementById("prev-page")?.addEventListener("click", () => {
    queue.offset = prevOffset(queue);
    void showQueue();
  });
  void refreshProgress();
}

function note(text: string): void {
  const host = document.getElementById("decision-note");
  if (host) host.textContent = text;
}

async function showAccount(login: string, fresh = true): Promise<void> {
  if (fresh) decision = emptyDecision();
  try {
    currentDetail = await api.getAccount(login);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      location.hash = "#/queue";
      return;
    }
    app.innerHTML = `<div class="banner error">API unreachable — retrying…</div>`;
    setTimeout(() => void showAccount(login, fresh), 2000);
    return;
  }
  app.innerHTML = renderDetail(currentDetail, decision, annotator);
  wireDecisionControls();
  void refreshProgress();
}

function rerenderDecision(): void {
  if (currentDetail) {
    app.innerHTML = renderDetail(currentDetail, decision, annotator);
    wireDecisionControls();
  }
}

function wireDecisionControls(): void {
  document.getElementById("choose-bot")?.addEventListener("click", () => {
    decision = chooseValue(decision, "bot");
    rerenderDecision();
  });
  document.getElementById("choose-human")?.addEventListener("click", () => {
    decision = chooseValue(decision, "human");
    rerenderDecision();
  });
  const category = document.getElementById("category") as HTMLSelectElement | null;
  category?.addEventListener("change", () => {
    decision = chooseCategory(decision, category.value || null);
  });
  const annotatorInput = document.getElementById("annotator") as HTMLInputElement | null;
  annotatorInput?.addEventListener("change", () => {
    annotator = saveAnnotator(localStorage, annotatorInput.value);
  });
  document.getElementById("submit-label")?.addEventListener("click", () => void submit());
}

async function submit(): Promise<void> {
  if (!currentDetail) return;
  const body = buildLabelRequest(decision, annotator, currentDetail.status);
  if (!body) {
    note("pick bot/human and set your annotator id first");
    return;
  }
  const login = currentDetail.login;
  try {
    await api.postLabel(login, body);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      // someone labeled concurrently: silently refetch and re-prompt
      await showAccount(login, false);
      note("status changed under you — review and submit again");
      return;
    }
    if (error instanceof ApiError && error.status === 404) {
      location.hash = "#/queue";
      return;
    }
    note(`submit failed: ${error instanceof Error ? error.message : error}`);
    return;
  }
  await advance(login);
}

async function advance(after: string): Promise<void> {
  // move on to the next account still waiting in the current queue
  const list = await api.listAccounts({
    status: queue.status,
    offset: 0,
    limit: queue.limit,
  });
  const next = list.accounts.find((account) => account.login !== after);
  if (next) {
    location.hash = `#/account/${encodeURIComponent(next.login)}`;
  } else {
    location.hash = "#/queue";
  }
}

function route(): void {
  const hash = location.hash || "#/queue";
  const accountMatch = /^#\/account\/(.+)$/.exec(hash);
  if (accountMatch) {
    void showAccount(decodeURIComponent(accountMatch[1]));
  } else {
    void showQueue();
  }
}

statusFilter.addEventListener("change", () => {
  queue.status = statusFilter.value;
  queue.offset = 0;
  if (location.hash && location.hash !== "#/queue") {
    location.hash = "#/queue";
  } else {
    void showQueue();
  }
});

const keyHandler = makeKeyHandler({
  chooseBot: () => {
    if (currentDetail) {
      decision = chooseValue(decision, "bot");
      rerenderDecision();
    }
  },
  chooseHuman: () => {
    if (currentDetail) {
      decision = chooseValue(decision, "human");
      rerenderDecision();
    }
  },
  chooseCategory: (index) => {
    if (currentDetail && categoryEnabled(decision) && index < BOT_CATEGORIES.length) {
      decision = chooseCategory(decision, BOT_CATEGORIES[index]);
      rerenderDecision();
    }
  },
  submit: () => void submit(),
  next: () => {
    queue.offset = nextOffset(queue);
    if (!currentDetail) void showQueue();
  },
  prev: () => {
    queue.offset = prevOffset(queue);
    if (!currentDetail) void showQueue();
  },
  back: () => {
    location.hash = "#/queue";
  },
});
window.addEventListener("keydown", keyHandler);
window.addEventListener("hashchange", route);
route();
