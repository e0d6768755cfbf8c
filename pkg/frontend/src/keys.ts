/**
 * Keyboard dispatch for the annotation screens.
 *
 * Bindings are a flat record from event.key to an action. Keystrokes are
 * swallowed while the annotator is typing into a field, otherwise fixing
 * a translation that contains the letter a would file a verdict.
 */

export interface KeyStroke {
  key: string;
  target: unknown;
  preventDefault(): void;
}

export type KeyBindings = Record<string, () => void>;

interface ElementLike {
  tagName?: string;
  isContentEditable?: boolean;
}

export function isTypingTarget(target: unknown): boolean {
  const el = target as ElementLike | null;
  if (!el) {
    return false;
  }
  if (el.isContentEditable) {
    return true;
  }
  const tag = (el.tagName ?? "").toUpperCase();
  return tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT";
}

/** Returns true when the stroke was consumed by a binding. */
export function makeKeyHandler(bindings: KeyBindings): (ev: KeyStroke) => boolean {
  return (ev: KeyStroke): boolean => {
    if (isTypingTarget(ev.target)) {
      return false;
    }
    const action = bindings[ev.key];
    if (action === undefined) {
      return false;
    }
    ev.preventDefault();
    action();
    return true;
  };
}
