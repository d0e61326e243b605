// Typed client for the annotation HTTP API. The UI renders exactly what this
// returns: feature values arrive with server-side `display` strings and
// percentiles, so nothing is recomputed client-side.

export type FeatureEntry = {
  name: string;
  value: number | null;
  display: string;
  percentile: number;
};

export type ProfileView = {
  login: string;
  name: string | null;
  bio: string | null;
  email: string | null;
  tag: string | null;
  followers: number | null;
  following: number | null;
};

export type EventView = {
  occurred_at: string;
  event_type: string;
  repo_id: string;
  thread_key: string | null;
  has_comment: boolean;
};

export type CommentView = {
  occurred_at: string;
  text: string;
};

export type LabelView = {
  annotator: string;
  value: "bot" | "human";
  category: string | null;
  decided_at: string;
};

export type AccountSummary = {
  login: string;
  status: string;
  summary: Record<string, string>;
};

export type AccountListResponse = {
  total: number;
  offset: number;
  limit: number;
  accounts: AccountSummary[];
};

export type AccountDetail = {
  login: string;
  status: string;
  profile: ProfileView;
  features: FeatureEntry[];
  lexicon_hits: Record<string, string[]>;
  labels: LabelView[];
  events: EventView[];
  comments: CommentView[];
};

export type LabelRequest = {
  value: "bot" | "human";
  category?: string;
  annotator: string;
  expected_status?: string;
};

export type LabelResponse = { login: string; status: string };

export type ProgressReport = { total: number; counts: Record<string, number> };

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && body.detail) detail = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class AnnotationApi {
  constructor(private baseUrl: string = "") {}

  listAccounts(params: {
    status?: string;
    offset?: number;
    limit?: number;
  } = {}): Promise<AccountListResponse> {
    const query = new URLSearchParams();
    if (params.status) query.set("status", params.status);
    if (params.offset !== undefined) query.set("offset", String(params.offset));
    if (params.limit !== undefined) query.set("limit", String(params.limit));
    const suffix = query.toString() ? `?${query.toString()}` : "";
    return request(`${this.baseUrl}/api/accounts${suffix}`);
  }

  getAccount(login: string): Promise<AccountDetail> {
    return request(`${this.baseUrl}/api/accounts/${encodeURIComponent(login)}`);
  }

  postLabel(login: string, body: LabelRequest): Promise<LabelResponse> {
    return request(`${this.baseUrl}/api/accounts/${encodeURIComponent(login)}/label`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getProgress(): Promise<ProgressReport> {
    return request(`${this.baseUrl}/api/progress`);
  }

  async exportCsv(): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/api/export`);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return await resp.text();
  }
}
