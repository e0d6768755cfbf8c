/**
 * Directional isolation for mixed-script text.
 *
 * Persian source forms and Sorani translations are right-to-left while
 * the surrounding chrome is left-to-right. Every interpolated form goes
 * through bdi() so the browser isolates its direction per field instead
 * of letting one Arabic-script token reorder the line around it. Inputs
 * get dir="auto" and resolve direction from their own first strong
 * character.
 */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Wrap one field's worth of text in an isolating element. */
export function bdi(text: string, cls = ""): string {
  const attr = cls ? ` class="${cls}"` : "";
  return `<bdi dir="auto"${attr}>${escapeHtml(text)}</bdi>`;
}

export function markFieldAuto(el: { setAttribute(name: string, value: string): void }): void {
  el.setAttribute("dir", "auto");
}
