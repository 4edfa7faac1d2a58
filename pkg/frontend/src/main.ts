// Browser bootstrap: wire the app to the real fetch, localStorage and the
// document, and dispatch clicks through data-action attributes.

import { ApiClient } from "./api.js";
import { DashboardApp } from "./app.js";

const API_BASE = (window as { MEDIAWATCH_API?: string }).MEDIAWATCH_API ?? "";

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const api = new ApiClient(API_BASE, (url, init) => fetch(url, init));
  const app = new DashboardApp(api, root, window.localStorage);

  document.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!target) return;
    const action = target.getAttribute("data-action");
    if (!action) return;
    event.preventDefault();
    const data: Record<string, string> = {};
    for (const { name, value } of Array.from(target.attributes)) {
      if (name.startsWith("data-")) data[name.slice(5)] = value;
    }
    if (action === "pin-draft") {
      const name = prompt("Channel name?");
      if (name) app.pinDraft(name);
      return;
    }
    void app.onAction(action, data);
  });

  for (const link of Array.from(document.querySelectorAll("[data-route]"))) {
    link.addEventListener("click", (event) => {
      event.preventDefault();
      const view = link.getAttribute("data-route");
      if (view === "map") {
        void app.showMap();
      } else if (view) {
        app.navigate({ view } as never);
      }
    });
  }

  app.start();
}

document.addEventListener("DOMContentLoaded", boot);
