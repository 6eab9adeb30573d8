/** Pure formatting helpers; every number shown comes straight from the
 * latest server payload, never from client-side accumulation. */

import type { ClassStats, PolarizedClass } from "./api.js";

export const CLASS_LABELS: Record<string, string> = {
  pro_russian: "pro-Russian",
  pro_ukrainian: "pro-Ukrainian",
  neutral: "neutral",
};

/** A null rate (nothing reviewed yet) renders as an em dash. */
export function formatHitRate(rate: number | null): string {
  if (rate === null) return "—";
  return `${Math.round(rate * 100)}%`;
}

export function formatConfidence(confidence: number): string {
  return `${(confidence * 100).toFixed(1)}%`;
}

export function classLabel(value: string): string {
  return CLASS_LABELS[value] ?? value;
}

export interface StatsRow {
  className: PolarizedClass;
  label: string;
  pending: number;
  reviewed: number;
  confirmed: number;
  newEdges: number;
  hitRate: string;
}

export function statsRows(
  stats: Record<string, ClassStats>,
): StatsRow[] {
  const order: PolarizedClass[] = ["pro_russian", "pro_ukrainian"];
  return order
    .filter((name) => name in stats)
    .map((name) => {
      const s = stats[name] as ClassStats;
      return {
        className: name,
        label: classLabel(name),
        pending: s.pending,
        reviewed: s.reviewed,
        confirmed: s.confirmed,
        newEdges: s.new_edges,
        hitRate: formatHitRate(s.hit_rate),
      };
    });
}
