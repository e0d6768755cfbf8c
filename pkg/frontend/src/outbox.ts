/**
 * Ordered retry queue for mutations that failed to reach the server.
 *
 * A decision the annotator already made must not be lost to a flaky
 * connection, and it must not be posted twice either. The rule that makes
 * both hold: only a NetworkError is retryable, because it means fetch
 * rejected before the request reached the server. Once a request got any
 * HTTP response at all, the journal may already contain the event, so the
 * item leaves the queue and the error goes back to the caller.
 *
 * Items drain strictly in the order they were enqueued. A network failure
 * leaves the failed item at the head and pauses draining until retry()
 * is called, so the badge in the corner can show how many decisions are
 * still unsynced.
 */

import { NetworkError } from "./api.js";

interface QueuedItem {
  describe: string;
  run: () => Promise<unknown>;
  resolve: (value: unknown) => void;
  reject: (err: unknown) => void;
}

export class Outbox {
  private items: QueuedItem[] = [];
  private draining = false;
  private listeners: (() => void)[] = [];

  get size(): number {
    return this.items.length;
  }

  get pendingDescriptions(): string[] {
    return this.items.map((i) => i.describe);
  }

  onChange(cb: () => void): void {
    this.listeners.push(cb);
  }

  /** Enqueue a mutation and start draining. Resolves or rejects with the
   * mutation's own outcome once its turn comes and the POST settles. */
  submit<T>(describe: string, run: () => Promise<T>): Promise<T> {
    return new Promise<T>((resolve, reject) => {
      this.items.push({
        describe,
        run,
        resolve: resolve as (value: unknown) => void,
        reject,
      });
      this.notify();
      void this.drain();
    });
  }

  /** Resume after a network failure paused the queue. */
  retry(): Promise<void> {
    return this.drain();
  }

  private async drain(): Promise<void> {
    if (this.draining) {
      return;
    }
    this.draining = true;
    try {
      while (this.items.length > 0) {
        const head = this.items[0]!;
        let outcome: unknown;
        try {
          outcome = await head.run();
        } catch (err) {
          if (err instanceof NetworkError) {
            // Never reached the server. Keep the item and wait for retry().
            return;
          }
          this.items.shift();
          this.notify();
          head.reject(err);
          continue;
        }
        this.items.shift();
        this.notify();
        head.resolve(outcome);
      }
    } finally {
      this.draining = false;
    }
  }

  private notify(): void {
    for (const cb of this.listeners) {
      cb();
    }
  }
}
