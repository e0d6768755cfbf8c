/**
 * A fake poslex server for exercising the client against realistic
 * semantics: seq bumps on every accepted write, stale expected_seq gets
 * a 409 with the current seq in the body, and accepted labels move the
 * entry out of the triage queue the same way the real store would.
 */

import { EntryView, FetchLike } from "../src/api.js";

export function entry(over: Partial<EntryView> & { id: string }): EntryView {
  return {
    source_form: "کتاب",
    tag: "N_SING",
    tag_gloss: "singular noun",
    tag_category: "noun",
    frequency: 3,
    translation: "کتێب",
    state: "translated",
    ar_flag: false,
    source_repeat: false,
    can_strip_leading: false,
    can_strip_trailing: false,
    edit_count: 0,
    ...over,
  };
}

interface Posted {
  path: string;
  body: Record<string, unknown>;
  status: number;
}

export class FakeServer {
  seq: number;
  entries: Map<string, EntryView>;
  posts: Posted[] = [];
  failNetwork = false;

  constructor(entries: EntryView[], seq = 10) {
    this.seq = seq;
    this.entries = new Map(entries.map((e) => [e.id, { ...e }]));
  }

  labelPosts(): Posted[] {
    return this.posts.filter((p) => p.path.endsWith("/label"));
  }

  acceptedLabelPosts(): Posted[] {
    return this.labelPosts().filter((p) => p.status === 200);
  }

  fetch: FetchLike = async (input, init) => {
    if (this.failNetwork) {
      throw new TypeError("fetch failed");
    }
    const url = new URL(input, "http://fake");
    if (init?.method === "POST") {
      return this.handlePost(url.pathname, JSON.parse(String(init.body)));
    }
    return this.handleGet(url);
  };

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private handleGet(url: URL): Response {
    if (url.pathname === "/api/queue") {
      const stage = url.searchParams.get("stage") ?? "triage";
      const limit = Number(url.searchParams.get("limit") ?? "10");
      const want = stage === "triage" ? "translated" : "labeled_correct";
      const pending = [...this.entries.values()].filter((e) => e.state === want);
      return this.json(200, {
        stage,
        seq: this.seq,
        pending: pending.length,
        entries: pending.slice(0, limit),
      });
    }
    return this.json(404, { error: `no route ${url.pathname}` });
  }

  private handlePost(path: string, body: Record<string, unknown>): Response {
    const record = (status: number, payload: unknown) => {
      this.posts.push({ path, body, status });
      return this.json(status, payload);
    };
    const m = path.match(/^\/api\/entries\/([^/]+)\/(label|verdict|edit)$/);
    if (!m) {
      return record(404, { error: `no route ${path}` });
    }
    const found = this.entries.get(m[1]!);
    if (!found) {
      return record(404, { error: `unknown entry ${m[1]}` });
    }
    const expected = body.expected_seq;
    if (expected !== null && expected !== undefined && expected !== this.seq) {
      return record(409, { error: "seq moved on", seq: this.seq });
    }
    this.seq += 1;
    if (m[2] === "label") {
      found.state = body.label === "correct" ? "labeled_correct" : `labeled_${body.label}`;
    } else if (m[2] === "verdict") {
      found.state = `reviewed_${body.verdict}`;
    } else {
      found.translation = typeof body.after === "string" ? body.after : "دەچم";
      found.edit_count += 1;
      found.can_strip_leading = false;
    }
    return record(200, { seq: this.seq, event_seq: this.seq, entry: { ...found } });
  }
}

/** Resolve once every task queued behind pending promises has run. */
export async function settle(): Promise<void> {
  for (let i = 0; i < 20; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
