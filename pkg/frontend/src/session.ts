/**
 * Queue state for one annotation sitting.
 *
 * The session never computes anything about the lexicon itself. It shows
 * what the server sent, posts one event per decision, and refreshes when
 * the server says its view went stale. Progress numbers shown in the
 * header come from the server's queue response plus a local count of
 * decisions accepted this sitting.
 *
 * Decisions advance the queue optimistically: the card flips to the next
 * entry as soon as the key lands, while the event itself drains through
 * the outbox in order. Each queued post reads the session's seq at the
 * moment it actually runs, so a burst of rapid decisions does not trip
 * the server's conflict check against its own earlier writes.
 */

import {
  ApiClient,
  ConflictError,
  ApiError,
  EntryView,
  Label,
  MutationResult,
  Verdict,
} from "./api.js";
import { Outbox } from "./outbox.js";

export type Stage = "triage" | "review";

export type DecisionOutcome =
  | { kind: "applied"; entry: EntryView }
  | { kind: "ignored"; reason: string }
  | { kind: "conflict"; message: string }
  | { kind: "rejected"; message: string };

export class AnnotationSession {
  entries: EntryView[] = [];
  seq = 0;
  pending = 0;
  decidedThisSitting = 0;
  lastNotice = "";

  private inFlight = new Set<string>();
  private listeners: (() => void)[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly outbox: Outbox,
    readonly stage: Stage,
  ) {}

  onChange(cb: () => void): void {
    this.listeners.push(cb);
  }

  current(): EntryView | null {
    return this.entries[0] ?? null;
  }

  async load(): Promise<void> {
    const view = await this.client.queue(this.stage, 25);
    this.entries = view.entries;
    this.seq = view.seq;
    this.pending = view.pending;
    this.notify();
  }

  /**
   * Post the decision for the entry currently on screen and move on.
   *
   * A 409 means someone else moved the entry first; the session reloads
   * so the annotator sees the fresh queue instead of a stale card.
   */
  async decide(choice: Label | Verdict): Promise<DecisionOutcome> {
    const entry = this.current();
    if (entry === null) {
      return { kind: "ignored", reason: "queue is empty" };
    }
    if (this.inFlight.has(entry.id)) {
      return { kind: "ignored", reason: "decision already in flight" };
    }
    this.inFlight.add(entry.id);
    this.entries = this.entries.filter((e) => e.id !== entry.id);
    this.pending = Math.max(0, this.pending - 1);
    this.notify();
    try {
      const result = await this.outbox.submit(
        `${this.stage} ${choice} ${entry.source_form}`,
        () => this.post(entry.id, choice),
      );
      this.decidedThisSitting += 1;
      if (this.entries.length === 0 && this.pending > 0) {
        await this.load();
      }
      this.notify();
      return { kind: "applied", entry: result.entry };
    } catch (err) {
      if (err instanceof ConflictError) {
        this.lastNotice = "another annotator got there first, queue refreshed";
        await this.load();
        return { kind: "conflict", message: err.message };
      }
      if (err instanceof ApiError) {
        this.lastNotice = err.message;
        await this.load();
        return { kind: "rejected", message: err.message };
      }
      throw err;
    } finally {
      this.inFlight.delete(entry.id);
      this.notify();
    }
  }

  /** Apply a pronoun strip to the current entry. Callers must only offer
   * this when the server marked the entry strippable. */
  async strip(kind: "strip_leading" | "strip_trailing"): Promise<DecisionOutcome> {
    return this.editCurrent(kind, (id) => this.runEdit(id, kind));
  }

  async manualEdit(after: string): Promise<DecisionOutcome> {
    return this.editCurrent("manual", (id) => this.runEdit(id, "manual", after));
  }

  async revertEdit(): Promise<DecisionOutcome> {
    return this.editCurrent("revert", (id) => this.runEdit(id, "revert"));
  }

  private async editCurrent(
    what: string,
    run: (id: string) => Promise<MutationResult>,
  ): Promise<DecisionOutcome> {
    const entry = this.current();
    if (entry === null) {
      return { kind: "ignored", reason: "queue is empty" };
    }
    if (this.inFlight.has(entry.id)) {
      return { kind: "ignored", reason: "decision already in flight" };
    }
    this.inFlight.add(entry.id);
    this.notify();
    try {
      const result = await this.outbox.submit(
        `${what} ${entry.source_form}`,
        () => run(entry.id),
      );
      this.entries = this.entries.map((e) => (e.id === entry.id ? result.entry : e));
      this.notify();
      return { kind: "applied", entry: result.entry };
    } catch (err) {
      if (err instanceof ConflictError) {
        this.lastNotice = "entry changed under you, queue refreshed";
        await this.load();
        return { kind: "conflict", message: err.message };
      }
      if (err instanceof ApiError) {
        this.lastNotice = err.message;
        return { kind: "rejected", message: err.message };
      }
      throw err;
    } finally {
      this.inFlight.delete(entry.id);
      this.notify();
    }
  }

  // seq is read here, inside the drained closure, not at enqueue time
  private async post(entryId: string, choice: Label | Verdict): Promise<MutationResult> {
    const result =
      this.stage === "triage"
        ? await this.client.label(entryId, choice as Label, this.seq)
        : await this.client.verdict(entryId, choice as Verdict, this.seq);
    this.seq = result.seq;
    return result;
  }

  private async runEdit(
    entryId: string,
    kind: "strip_leading" | "strip_trailing" | "manual" | "revert",
    after?: string,
  ): Promise<MutationResult> {
    const result = await this.client.edit(entryId, kind, this.seq, after);
    this.seq = result.seq;
    return result;
  }

  private notify(): void {
    for (const cb of this.listeners) {
      cb();
    }
  }
}
