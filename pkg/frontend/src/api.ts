/**
 * Typed client for the poslex HTTP API.
 *
 * Every mutation carries the actor name and the last seq this client saw,
 * so the server can reject writes that raced another annotator. Error
 * mapping matters more than the happy path here:
 *
 *   - fetch itself rejects        -> NetworkError, safe to retry, the
 *                                    request never reached the server
 *   - 409                         -> ConflictError with the server's
 *                                    current seq, caller must refresh
 *   - any other non-2xx           -> ApiError, not retryable
 */

export type Label = "correct" | "not-correct" | "undecided";
export type Verdict = "accurate" | "repeated" | "concerned";
export type EditKind = "strip_leading" | "strip_trailing" | "manual" | "revert";

export interface EntryView {
  id: string;
  source_form: string;
  tag: string;
  tag_gloss: string;
  tag_category: string;
  frequency: number;
  translation: string | null;
  state: string;
  ar_flag: boolean;
  source_repeat: boolean;
  can_strip_leading: boolean;
  can_strip_trailing: boolean;
  edit_count: number;
}

export interface QueueView {
  stage: "triage" | "review";
  seq: number;
  pending: number;
  entries: EntryView[];
}

export interface MutationResult {
  seq: number;
  event_seq: number;
  entry: EntryView;
}

export interface DistributionRow {
  pos: string;
  count: number;
  percentage: number | null;
  percentage_display: string;
  rank: number | null;
  percentile: number | null;
  percentile_display: string;
}

export interface SummaryRow {
  stage: string;
  input: { name: string; count: number };
  outputs: { name: string; count: number }[];
  note: string;
}

export interface StatsView {
  seq: number;
  states: Record<string, number>;
  summary: SummaryRow[];
  distribution: { total: number; rows: DistributionRow[] } | null;
}

export class NetworkError extends Error {}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ConflictError extends Error {
  constructor(message: string, readonly seq: number) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly actor: string,
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  async queue(stage: "triage" | "review", limit = 10): Promise<QueueView> {
    return this.get(`/api/queue?stage=${stage}&limit=${limit}`);
  }

  async stats(): Promise<StatsView> {
    return this.get("/api/stats");
  }

  async label(entryId: string, label: Label | null, expectedSeq: number): Promise<MutationResult> {
    return this.post(`/api/entries/${entryId}/label`, { label, expected_seq: expectedSeq });
  }

  async verdict(entryId: string, verdict: Verdict, expectedSeq: number): Promise<MutationResult> {
    return this.post(`/api/entries/${entryId}/verdict`, { verdict, expected_seq: expectedSeq });
  }

  async edit(
    entryId: string,
    kind: EditKind,
    expectedSeq: number,
    after?: string,
  ): Promise<MutationResult> {
    const body: Record<string, unknown> = { kind, expected_seq: expectedSeq };
    if (after !== undefined) {
      body.after = after;
    }
    return this.post(`/api/entries/${entryId}/edit`, body);
  }

  exportUrl(listName: string): string {
    return `${this.base}/api/export/${listName}`;
  }

  private async get<T>(path: string): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    return this.decode(resp);
  }

  private async post<T>(path: string, body: Record<string, unknown>): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ ...body, actor: this.actor }),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    return this.decode(resp);
  }

  private async decode<T>(resp: Response): Promise<T> {
    const data = (await resp.json()) as Record<string, unknown>;
    if (resp.status === 409) {
      throw new ConflictError(String(data.error ?? "conflict"), Number(data.seq ?? 0));
    }
    if (!resp.ok) {
      throw new ApiError(String(data.error ?? `http ${resp.status}`), resp.status);
    }
    return data as T;
  }
}
