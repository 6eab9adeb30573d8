/** One keystroke per verdict: 1 pro-Russian, 2 pro-Ukrainian, 3 neutral,
 * 0 skip. Anything else is ignored. */

import type { VerdictValue } from "./api.js";

const KEY_MAP: Record<string, VerdictValue> = {
  "1": "pro_russian",
  "2": "pro_ukrainian",
  "3": "neutral",
  "0": "skip",
};

export function verdictForKey(key: string): VerdictValue | null {
  return KEY_MAP[key] ?? null;
}
