/** Browser entry point. The API base defaults to the local review
 * service; override with ?api=http://host:port when serving the page
 * from elsewhere. */

import { HttpBackend } from "./api.js";
import { TriageApp } from "./app.js";

const DEFAULT_API = "http://127.0.0.1:8400";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery !== null && fromQuery.length > 0) {
    return fromQuery.replace(/\/+$/, "");
  }
  return DEFAULT_API;
}

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");

const app = new TriageApp(root, new HttpBackend(apiBase()));
window.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLSelectElement) return;
  app.handleKey(event.key);
});
void app.start();
