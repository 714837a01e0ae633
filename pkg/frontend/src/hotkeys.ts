// Keyboard shortcuts: 1-5 pick a label, Q/W/E pick confidence #1/#2/#3,
// Enter submits.

import { GENERAL_CLASSES } from "./types.js";
import type { ConfidenceLevel, GeneralClass } from "./types.js";

export type KeyAction =
  | { kind: "label"; label: GeneralClass }
  | { kind: "confidence"; level: ConfidenceLevel }
  | { kind: "submit" };

const CONFIDENCE_KEYS: Record<string, ConfidenceLevel> = { q: 1, w: 2, e: 3 };

export function actionForKey(key: string): KeyAction | null {
  const lower = key.toLowerCase();
  const digit = Number.parseInt(lower, 10);
  if (digit >= 1 && digit <= GENERAL_CLASSES.length) {
    return { kind: "label", label: GENERAL_CLASSES[digit - 1] };
  }
  if (lower in CONFIDENCE_KEYS) {
    return { kind: "confidence", level: CONFIDENCE_KEYS[lower] };
  }
  if (lower === "enter") {
    return { kind: "submit" };
  }
  return null;
}

export function bindHotkeys(
  target: { addEventListener: Window["addEventListener"] },
  handler: (action: KeyAction) => void,
): void {
  target.addEventListener("keydown", (event) => {
    const e = event as KeyboardEvent;
    if (e.ctrlKey || e.metaKey || e.altKey) return;
    const tag = (e.target as HTMLElement | null)?.tagName;
    if (tag === "INPUT" || tag === "SELECT" || tag === "TEXTAREA") return;
    const action = actionForKey(e.key);
    if (action) {
      e.preventDefault();
      handler(action);
    }
  });
}
