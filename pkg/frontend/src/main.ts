import { ApiClient, EntryView, StatsView, NetworkError } from "./api.js";
import { pieSvg, percentileBarsSvg } from "./charts.js";
import { KeyBindings, makeKeyHandler } from "./keys.js";
import { Outbox } from "./outbox.js";
import { AnnotationSession, Stage } from "./session.js";
import { bdi, escapeHtml, markFieldAuto } from "./rtl.js";

const REFRESH_MS = 5000;

function actorName(): string {
  try {
    const saved = window.localStorage.getItem("poslex-actor");
    if (saved) {
      return saved;
    }
  } catch {
    // storage can be disabled, fall through
  }
  const name = window.prompt("annotator name?", "annotator") || "annotator";
  try {
    window.localStorage.setItem("poslex-actor", name);
  } catch {
    // ignore
  }
  return name;
}

const client = new ApiClient(actorName());
const outbox = new Outbox();
const app = document.getElementById("app") as HTMLElement;
const badge = document.getElementById("unsynced") as HTMLElement;

outbox.onChange(() => {
  if (outbox.size > 0) {
    badge.textContent = `${outbox.size} unsynced`;
    badge.classList.add("visible");
  } else {
    badge.textContent = "";
    badge.classList.remove("visible");
  }
});

badge.addEventListener("click", () => {
  void outbox.retry();
});

function entryCard(entry: EntryView, stage: Stage): string {
  const flags: string[] = [];
  if (entry.ar_flag) {
    flags.push('<span class="flag ar">ar-tagged</span>');
  }
  if (entry.source_repeat) {
    flags.push('<span class="flag repeat">repeated source</span>');
  }
  const strips: string[] = [];
  if (entry.can_strip_leading) {
    strips.push('<button id="strip-lead">strip leading pronoun</button>');
  }
  if (entry.can_strip_trailing) {
    strips.push('<button id="strip-trail">strip trailing pronoun</button>');
  }
  const revert = entry.edit_count > 0 ? '<button id="revert-edit">undo edit</button>' : "";
  const decisions =
    stage === "triage"
      ? `<button data-choice="correct"><kbd>1</kbd> correct</button>
         <button data-choice="not-correct"><kbd>2</kbd> not correct</button>
         <button data-choice="undecided"><kbd>3</kbd> undecided</button>`
      : `<button data-choice="accurate"><kbd>a</kbd> accurate</button>
         <button data-choice="concerned"><kbd>c</kbd> concerned</button>`;
  return `
    <div class="card">
      <div class="row source">
        ${bdi(entry.source_form, "form")}
        <span class="tag" title="${escapeHtml(entry.tag_gloss)}">${escapeHtml(entry.tag)}</span>
        <span class="freq">x${entry.frequency}</span>
        ${flags.join(" ")}
      </div>
      <div class="row translation">
        ${entry.translation === null ? '<em class="missing">no translation</em>' : bdi(entry.translation, "form")}
      </div>
      <div class="row edits">
        ${strips.join(" ")} ${revert}
        <input id="manual-edit" type="text" placeholder="fix translation" />
        <button id="apply-edit">apply</button>
      </div>
      <div class="row decisions">${decisions}</div>
    </div>`;
}

function renderSession(session: AnnotationSession): void {
  const entry = session.current();
  const head = `
    <div class="progress">
      <span>${session.stage} queue</span>
      <span>${session.pending} waiting</span>
      <span>${session.decidedThisSitting} decided this sitting</span>
    </div>
    <div class="notice">${escapeHtml(session.lastNotice)}</div>`;
  if (entry === null) {
    app.innerHTML = head + '<div class="done">queue is empty</div>';
    return;
  }
  app.innerHTML = head + entryCard(entry, session.stage);
  for (const btn of app.querySelectorAll<HTMLButtonElement>("[data-choice]")) {
    btn.addEventListener("click", () => {
      void session.decide(btn.dataset.choice as never).then(() => renderSession(session));
    });
  }
  const lead = document.getElementById("strip-lead");
  if (lead) {
    lead.addEventListener("click", () => {
      void session.strip("strip_leading").then(() => renderSession(session));
    });
  }
  const trail = document.getElementById("strip-trail");
  if (trail) {
    trail.addEventListener("click", () => {
      void session.strip("strip_trailing").then(() => renderSession(session));
    });
  }
  const revert = document.getElementById("revert-edit");
  if (revert) {
    revert.addEventListener("click", () => {
      void session.revertEdit().then(() => renderSession(session));
    });
  }
  const input = document.getElementById("manual-edit") as HTMLInputElement;
  markFieldAuto(input);
  const apply = document.getElementById("apply-edit") as HTMLButtonElement;
  apply.addEventListener("click", () => {
    const after = input.value.trim();
    if (after) {
      void session.manualEdit(after).then(() => renderSession(session));
    }
  });
}

let activeKeyHandler: ((ev: KeyboardEvent) => boolean) | null = null;
let dashboardTimer: number | null = null;

function teardown(): void {
  activeKeyHandler = null;
  if (dashboardTimer !== null) {
    window.clearInterval(dashboardTimer);
    dashboardTimer = null;
  }
}

document.addEventListener("keydown", (ev) => {
  if (activeKeyHandler) {
    activeKeyHandler(ev);
  }
});

async function showSession(stage: Stage): Promise<void> {
  teardown();
  const session = new AnnotationSession(client, outbox, stage);
  session.onChange(() => renderSession(session));
  const decide = (choice: string) => {
    void session.decide(choice as never).then(() => renderSession(session));
  };
  const bindings: KeyBindings =
    stage === "triage"
      ? {
          "1": () => decide("correct"),
          "2": () => decide("not-correct"),
          "3": () => decide("undecided"),
        }
      : {
          a: () => decide("accurate"),
          c: () => decide("concerned"),
        };
  activeKeyHandler = makeKeyHandler(bindings);
  app.innerHTML = '<div class="loading">loading queue</div>';
  try {
    await session.load();
  } catch (err) {
    app.innerHTML = `<div class="error">could not load queue: ${escapeHtml(String(err))}</div>`;
    return;
  }
  renderSession(session);
}

function summaryTable(stats: StatsView): string {
  const rows = stats.summary
    .map((s) => {
      const outputs = s.outputs.map((o) => `${escapeHtml(o.name)}: ${o.count}`).join(", ");
      return `<tr><td>${escapeHtml(s.stage)}</td><td>${escapeHtml(s.input.name)} (${s.input.count})</td>` +
        `<td>${outputs}</td><td>${escapeHtml(s.note)}</td></tr>`;
    })
    .join("");
  return `<table class="summary"><thead><tr><th>stage</th><th>input</th><th>outputs</th><th>note</th></tr></thead><tbody>${rows}</tbody></table>`;
}

function distributionTable(stats: StatsView): string {
  if (stats.distribution === null) {
    return '<div class="missing">no accurate entries yet</div>';
  }
  const rows = stats.distribution.rows
    .map(
      (r) =>
        `<tr><td>${escapeHtml(r.pos)}</td><td>${r.count}</td>` +
        `<td>${escapeHtml(r.percentage_display)}</td><td>${escapeHtml(r.percentile_display)}</td></tr>`,
    )
    .join("");
  return `<table class="dist"><thead><tr><th>tag</th><th>count</th><th>share</th><th>percentile</th></tr></thead><tbody>${rows}</tbody></table>`;
}

async function refreshDashboard(): Promise<void> {
  let stats: StatsView;
  try {
    stats = await client.stats();
  } catch (err) {
    const marker = document.getElementById("stale");
    if (marker) {
      marker.textContent =
        err instanceof NetworkError ? "server unreachable, showing last known state" : String(err);
    }
    return;
  }
  const charts =
    stats.distribution === null
      ? ""
      : `<div class="charts">${pieSvg(stats.distribution.rows, stats.distribution.total)}` +
        `${percentileBarsSvg(stats.distribution.rows)}</div>`;
  app.innerHTML = `
    <div class="progress"><span>dashboard</span><span>journal seq ${stats.seq}</span></div>
    <div id="stale" class="notice"></div>
    ${summaryTable(stats)}
    ${distributionTable(stats)}
    ${charts}`;
}

async function showDashboard(): Promise<void> {
  teardown();
  app.innerHTML = '<div class="loading">loading stats</div>';
  await refreshDashboard();
  dashboardTimer = window.setInterval(() => void refreshDashboard(), REFRESH_MS);
}

function route(): void {
  const hash = window.location.hash || "#/triage";
  if (hash.startsWith("#/review")) {
    void showSession("review");
  } else if (hash.startsWith("#/dashboard")) {
    void showDashboard();
  } else {
    void showSession("triage");
  }
  for (const link of document.querySelectorAll<HTMLAnchorElement>("nav a")) {
    link.classList.toggle("active", link.getAttribute("href") === hash);
  }
}

window.addEventListener("hashchange", route);
route();
