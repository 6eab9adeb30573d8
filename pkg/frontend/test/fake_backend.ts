/** In-memory stand-in for the review service, faithful to its stats
 * arithmetic: per-edge outcomes recomputed from confirmed labels, the
 * conflict rule when both polarities land on one pair, hit rate as new
 * polarized edges over reviewed items, and null when a class has no
 * reviews yet. */

import type {
  DecisionAck,
  PolarizedClass,
  QueuePayload,
  StatsPayload,
  TriageBackend,
  TriageItemView,
  VerdictValue,
} from "../src/api.js";

interface LoggedDecision {
  item_id: string;
  verdict: VerdictValue;
  annotator_id: string;
  decided_at: number;
}

const POLARIZED: readonly PolarizedClass[] = ["pro_russian", "pro_ukrainian"];

function edgeKey(edge: readonly [string, string]): string {
  return [...edge].sort().join("|");
}

export class FakeBackend implements TriageBackend {
  readonly items: TriageItemView[];
  readonly decisions: LoggedDecision[] = [];
  failing = false;
  queueCalls: Array<{ classFilter: string | null; limit: number }> = [];
  private clock = 0;

  constructor(items: TriageItemView[]) {
    this.items = items.map((it) => ({ ...it }));
  }

  private effective(): Map<string, LoggedDecision> {
    const latest = new Map<string, LoggedDecision>();
    for (const decision of this.decisions) {
      latest.set(decision.item_id, decision);
    }
    return latest;
  }

  private edgeStatuses(): Map<string, string> {
    const labels = new Map<string, Set<string>>();
    const effective = this.effective();
    for (const item of this.items) {
      const decision = effective.get(item.item_id);
      if (decision === undefined || decision.verdict === "skip") continue;
      const key = edgeKey(item.edge);
      const set = labels.get(key) ?? new Set<string>();
      set.add(decision.verdict);
      labels.set(key, set);
    }
    const statuses = new Map<string, string>();
    for (const item of this.items) {
      const key = edgeKey(item.edge);
      if (statuses.has(key)) continue;
      const stances = labels.get(key) ?? new Set<string>();
      const hasR = stances.has("pro_russian");
      const hasU = stances.has("pro_ukrainian");
      if (hasR && hasU) statuses.set(key, "conflicted");
      else if (hasR) statuses.set(key, "pro_russian");
      else if (hasU) statuses.set(key, "pro_ukrainian");
      else if (stances.has("neutral")) statuses.set(key, "neutral");
      else statuses.set(key, "unlabeled");
    }
    return statuses;
  }

  private statsPayload(): StatsPayload {
    const statuses = this.edgeStatuses();
    const newEdges: Record<PolarizedClass, number> = {
      pro_russian: 0,
      pro_ukrainian: 0,
    };
    for (const status of statuses.values()) {
      if (status === "pro_russian" || status === "pro_ukrainian") {
        newEdges[status] += 1;
      }
    }
    const effective = this.effective();
    const payload: StatsPayload = {};
    for (const cls of POLARIZED) {
      const classItems = this.items.filter(
        (it) => it.predicted_class === cls);
      const decided = classItems.filter(
        (it) => effective.has(it.item_id));
      const confirmed = decided.filter(
        (it) => effective.get(it.item_id)?.verdict === cls).length;
      const reviewed = decided.length;
      payload[cls] = {
        pending: classItems.length - reviewed,
        reviewed,
        confirmed,
        new_edges: newEdges[cls],
        hit_rate: reviewed > 0 ? newEdges[cls] / reviewed : null,
      };
    }
    return payload;
  }

  async fetchQueue(
    classFilter: string | null,
    limit: number,
  ): Promise<QueuePayload> {
    this.queueCalls.push({ classFilter, limit });
    const effective = this.effective();
    const pending = this.items
      .filter((it) => !effective.has(it.item_id))
      .filter((it) => classFilter === null
        || it.predicted_class === classFilter)
      .sort((a, b) => b.confidence - a.confidence
        || a.tweet_id.localeCompare(b.tweet_id));
    return { items: pending.slice(0, limit) };
  }

  async postDecision(
    itemId: string,
    verdict: VerdictValue,
    annotatorId: string,
  ): Promise<DecisionAck> {
    if (this.failing) {
      throw new Error("The review service did not respond.");
    }
    if (!this.items.some((it) => it.item_id === itemId)) {
      throw new Error(`unknown item '${itemId}'`);
    }
    this.clock += 1;
    this.decisions.push({
      item_id: itemId,
      verdict,
      annotator_id: annotatorId,
      decided_at: this.clock,
    });
    return {
      ok: true,
      item_id: itemId,
      verdict,
      decided_at: this.clock,
      stats: this.statsPayload(),
    };
  }

  async fetchStats(): Promise<StatsPayload> {
    return this.statsPayload();
  }
}

export function makeItem(
  n: number,
  predicted: PolarizedClass,
  confidence: number,
  peer: string,
): TriageItemView {
  return {
    item_id: `item-q${n}`,
    tweet_id: `q${n}`,
    raw_text: `retweeted claim number ${n}`,
    predicted_class: predicted,
    confidence,
    edge: ["hub", peer],
    state: "pending",
  };
}

export function fiveItemQueue(): TriageItemView[] {
  return [
    makeItem(1, "pro_russian", 0.95, "u1"),
    makeItem(2, "pro_ukrainian", 0.9, "u2"),
    makeItem(3, "pro_russian", 0.85, "u3"),
    makeItem(4, "pro_ukrainian", 0.8, "u4"),
    makeItem(5, "pro_russian", 0.75, "u5"),
  ];
}
