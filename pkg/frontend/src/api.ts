/** Typed client for the three triage service endpoints. */

export type PolarizedClass = "pro_russian" | "pro_ukrainian";
export type VerdictValue = "pro_russian" | "pro_ukrainian" | "neutral" | "skip";

export interface TriageItemView {
  item_id: string;
  tweet_id: string;
  raw_text: string;
  predicted_class: PolarizedClass;
  confidence: number;
  edge: [string, string];
  state: string;
}

export interface QueuePayload {
  items: TriageItemView[];
}

export interface ClassStats {
  pending: number;
  reviewed: number;
  confirmed: number;
  new_edges: number;
  hit_rate: number | null;
}

export type StatsPayload = Record<string, ClassStats>;

export interface DecisionAck {
  ok: boolean;
  item_id: string;
  verdict: string;
  decided_at: number;
  stats: StatsPayload;
}

/** The surface the app depends on; tests substitute an in-memory fake. */
export interface TriageBackend {
  fetchQueue(classFilter: string | null, limit: number): Promise<QueuePayload>;
  postDecision(
    itemId: string,
    verdict: VerdictValue,
    annotatorId: string,
  ): Promise<DecisionAck>;
  fetchStats(): Promise<StatsPayload>;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status code as the message
    }
    throw new Error(detail);
  }
  return (await response.json()) as T;
}

export class HttpBackend implements TriageBackend {
  constructor(private readonly baseUrl: string) {}

  async fetchQueue(
    classFilter: string | null,
    limit: number,
  ): Promise<QueuePayload> {
    const params = new URLSearchParams({ limit: String(limit) });
    if (classFilter !== null) params.set("class", classFilter);
    const response = await fetch(`${this.baseUrl}/api/queue?${params}`);
    return asJson<QueuePayload>(response);
  }

  async postDecision(
    itemId: string,
    verdict: VerdictValue,
    annotatorId: string,
  ): Promise<DecisionAck> {
    const response = await fetch(`${this.baseUrl}/api/decisions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        item_id: itemId,
        verdict,
        annotator_id: annotatorId,
      }),
    });
    return asJson<DecisionAck>(response);
  }

  async fetchStats(): Promise<StatsPayload> {
    const response = await fetch(`${this.baseUrl}/api/stats`);
    return asJson<StatsPayload>(response);
  }
}
