/** DOM construction. The whole page re-renders from AppState on every
 * change; nothing in the DOM is authoritative. */

import type { TriageItemView } from "./api.js";
import type { AppState } from "./app.js";
import {
  classLabel,
  formatConfidence,
  statsRows,
} from "./format.js";

export const GUIDELINES: ReadonlyArray<readonly [string, string]> = [
  [
    "pro-Russian (key 1)",
    "Blames Ukraine or Western actors for the crash, or relays claims " +
      "that shift responsibility away from Russia or the separatists.",
  ],
  [
    "pro-Ukrainian (key 2)",
    "Blames Russia or the separatists for the crash, or endorses " +
      "accounts that hold them responsible.",
  ],
  [
    "neutral (key 3)",
    "Reports, mourns, or asks questions without assigning " +
      "responsibility to either side.",
  ],
  [
    "skip (key 0)",
    "Unreadable, off-topic, or impossible to call from the text alone.",
  ],
];

function el(
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBanner(state: AppState): HTMLElement | null {
  if (state.error === null) return null;
  const banner = el("div", { class: "banner", "data-testid": "error-banner" });
  banner.appendChild(el("strong", {}, "Not saved. "));
  banner.appendChild(
    el(
      "span",
      {},
      `${state.error} The item stays on screen; press the key again to retry.`,
    ),
  );
  return banner;
}

function renderItem(item: TriageItemView, remaining: number): HTMLElement {
  const card = el("article", { class: "card", "data-testid": "current-item" });
  const head = el("header", { class: "card-head" });
  head.appendChild(
    el(
      "span",
      {
        class: `badge badge-${item.predicted_class}`,
        "data-testid": "predicted-class",
      },
      classLabel(item.predicted_class),
    ),
  );
  head.appendChild(
    el(
      "span",
      { class: "confidence", "data-testid": "confidence" },
      formatConfidence(item.confidence),
    ),
  );
  head.appendChild(
    el("span", { class: "remaining", "data-testid": "remaining" },
       `${remaining} left`),
  );
  card.appendChild(head);
  card.appendChild(
    el("p", { class: "tweet-text", "data-testid": "tweet-text" },
       item.raw_text),
  );
  card.appendChild(
    el(
      "p",
      { class: "edge-context", "data-testid": "edge-context" },
      `Would label the retweet pair ${item.edge[0]} / ${item.edge[1]}` +
        ` (tweet ${item.tweet_id})`,
    ),
  );
  return card;
}

function renderQueue(state: AppState): HTMLElement {
  const section = el("section", { class: "queue", "data-testid": "queue" });
  const current = state.items[0];
  if (state.loading) {
    section.appendChild(el("p", { class: "empty" }, "Loading queue..."));
  } else if (current === undefined) {
    section.appendChild(
      el("p", { class: "empty", "data-testid": "queue-empty" },
         "Queue empty. Nothing left to review."),
    );
  } else {
    section.appendChild(renderItem(current, state.items.length));
    if (state.inFlight) {
      section.appendChild(
        el("p", { class: "sending", "data-testid": "in-flight" },
           "Saving verdict..."),
      );
    }
  }
  return section;
}

function renderStats(state: AppState): HTMLElement {
  const section = el("section", { class: "stats", "data-testid": "stats" });
  section.appendChild(el("h2", {}, "Review yield"));
  if (state.stats === null) {
    section.appendChild(el("p", {}, "No stats yet."));
    return section;
  }
  const table = el("table");
  const head = el("tr");
  for (const column of ["class", "pending", "reviewed", "confirmed",
                        "new edges", "hit rate"]) {
    head.appendChild(el("th", {}, column));
  }
  table.appendChild(head);
  for (const row of statsRows(state.stats)) {
    const tr = el("tr", { "data-stats-row": row.className });
    tr.appendChild(el("td", {}, row.label));
    tr.appendChild(el("td", { "data-stat": "pending" },
                      String(row.pending)));
    tr.appendChild(el("td", { "data-stat": "reviewed" },
                      String(row.reviewed)));
    tr.appendChild(el("td", { "data-stat": "confirmed" },
                      String(row.confirmed)));
    tr.appendChild(el("td", { "data-stat": "new_edges" },
                      String(row.newEdges)));
    tr.appendChild(el("td", { "data-stat": "hit_rate" }, row.hitRate));
    table.appendChild(tr);
  }
  section.appendChild(table);
  return section;
}

function renderFilter(state: AppState): HTMLElement {
  const wrap = el("div", { class: "filter" });
  wrap.appendChild(el("label", { for: "class-filter" }, "Show"));
  const select = el("select", { id: "class-filter" }) as HTMLSelectElement;
  const options: Array<[string, string]> = [
    ["", "all classes"],
    ["pro_russian", "pro-Russian only"],
    ["pro_ukrainian", "pro-Ukrainian only"],
  ];
  for (const [value, label] of options) {
    const option = el("option", { value }, label) as HTMLOptionElement;
    if ((state.classFilter ?? "") === value) option.selected = true;
    select.appendChild(option);
  }
  wrap.appendChild(select);
  return wrap;
}

function renderGuidelines(): HTMLElement {
  const aside = el("aside", { class: "guidelines",
                              "data-testid": "guidelines" });
  aside.appendChild(el("h2", {}, "Annotation guide"));
  const list = el("dl");
  for (const [term, definition] of GUIDELINES) {
    list.appendChild(el("dt", {}, term));
    list.appendChild(el("dd", {}, definition));
  }
  aside.appendChild(list);
  return aside;
}

export function render(root: HTMLElement, state: AppState): void {
  root.textContent = "";
  const banner = renderBanner(state);
  if (banner !== null) root.appendChild(banner);
  root.appendChild(renderFilter(state));
  const columns = el("div", { class: "columns" });
  const mainCol = el("div", { class: "main-col" });
  mainCol.appendChild(renderQueue(state));
  mainCol.appendChild(renderStats(state));
  columns.appendChild(mainCol);
  columns.appendChild(renderGuidelines());
  root.appendChild(columns);
}
