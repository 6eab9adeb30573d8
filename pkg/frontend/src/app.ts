/** Controller: owns the queue and stats state, talks to the backend,
 * and re-renders after every change.
 *
 * Two rules keep the view honest. First, at most one verdict is in
 * flight; keys pressed while a POST is pending are dropped rather than
 * queued, so a double-tap cannot decide two items. Second, the stats
 * table only ever shows numbers the server sent back (the initial
 * stats fetch or a decision acknowledgement); nothing is incremented
 * locally, so a mid-session reload always agrees with the server.
 */

import type {
  StatsPayload,
  TriageBackend,
  TriageItemView,
  VerdictValue,
} from "./api.js";
import { verdictForKey } from "./keyboard.js";
import { render } from "./render.js";

export interface AppState {
  items: TriageItemView[];
  stats: StatsPayload | null;
  classFilter: string | null;
  inFlight: boolean;
  loading: boolean;
  error: string | null;
}

const QUEUE_LIMIT = 50;

export class TriageApp {
  readonly state: AppState;
  private readonly backend: TriageBackend;
  private readonly root: HTMLElement;
  private readonly annotatorId: string;

  constructor(root: HTMLElement, backend: TriageBackend,
              annotatorId = "anonymous") {
    this.root = root;
    this.backend = backend;
    this.annotatorId = annotatorId;
    this.state = {
      items: [],
      stats: null,
      classFilter: null,
      inFlight: false,
      loading: true,
      error: null,
    };
  }

  /** Initial load: queue and stats in parallel, then first paint. */
  async start(): Promise<void> {
    this.paint();
    try {
      const [queue, stats] = await Promise.all([
        this.backend.fetchQueue(this.state.classFilter, QUEUE_LIMIT),
        this.backend.fetchStats(),
      ]);
      this.state.items = queue.items;
      this.state.stats = stats;
      this.state.error = null;
    } catch (err) {
      this.state.error = describe(err);
    }
    this.state.loading = false;
    this.paint();
  }

  /** Submit a verdict for the item on screen.
   *
   * The item leaves the queue only after the server acknowledges it.
   * On failure the item stays, the banner explains, and the same key
   * retries. Returns true when the decision was acknowledged.
   */
  async submit(verdict: VerdictValue): Promise<boolean> {
    const current = this.state.items[0];
    if (current === undefined || this.state.inFlight) return false;
    this.state.inFlight = true;
    this.state.error = null;
    this.paint();
    try {
      const ack = await this.backend.postDecision(
        current.item_id, verdict, this.annotatorId);
      this.state.items = this.state.items.slice(1);
      this.state.stats = ack.stats;
      return true;
    } catch (err) {
      this.state.error = describe(err);
      return false;
    } finally {
      this.state.inFlight = false;
      this.paint();
    }
  }

  /** Keyboard entry point; unknown keys are ignored. */
  handleKey(key: string): void {
    const verdict = verdictForKey(key);
    if (verdict === null) return;
    void this.submit(verdict);
  }

  /** Swap the class filter and refetch the queue (stats are global). */
  async applyFilter(classFilter: string | null): Promise<void> {
    this.state.classFilter = classFilter;
    this.state.loading = true;
    this.paint();
    try {
      const queue = await this.backend.fetchQueue(classFilter, QUEUE_LIMIT);
      this.state.items = queue.items;
      this.state.error = null;
    } catch (err) {
      this.state.error = describe(err);
    }
    this.state.loading = false;
    this.paint();
  }

  private paint(): void {
    render(this.root, this.state);
    const select = this.root.querySelector<HTMLSelectElement>("#class-filter");
    if (select !== null) {
      select.addEventListener("change", () => {
        void this.applyFilter(select.value === "" ? null : select.value);
      });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof Error && err.message.length > 0) return err.message;
  return "The server could not be reached.";
}
