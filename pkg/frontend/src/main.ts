// Shell: hash router over the four views, persistent alert sidebar fed by
// the push channel (with polling fallback), shared state store.

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { AlertSidebar } from "./sidebar.js";
import { AppStore, ViewName } from "./state.js";
import { AlertFeed } from "./sse.js";
import { renderChaincodes } from "./views/chaincodes.js";
import { renderDashboard } from "./views/dashboard.js";
import { renderNetwork } from "./views/network.js";
import { renderTransactions } from "./views/transactions.js";

const VIEWS: Array<{ name: ViewName; label: string }> = [
  { name: "dashboard", label: "Dashboard" },
  { name: "network", label: "Network" },
  { name: "transactions", label: "Transactions" },
  { name: "chaincodes", label: "Chaincodes" },
];

export interface AppHandles {
  store: AppStore;
  api: ApiClient;
  sidebar: AlertSidebar;
  feed: AlertFeed;
  navigate(view: ViewName): void;
}

export async function bootstrap(root: HTMLElement, apiBase?: string): Promise<AppHandles> {
  const api = new ApiClient(apiBase);
  const store = new AppStore();
  const sidebar = new AlertSidebar();

  const nav = el("nav", { class: "topnav" });
  const content = el("main", { class: "content", id: "view-root" });
  const shell = el("div", { class: "shell" },
    el("header", { class: "masthead" }, el("h1", {}, "ledgerwatch"), nav),
    el("div", { class: "body" }, content, sidebar.root));
  clear(root);
  root.append(shell);

  const links = new Map<ViewName, HTMLAnchorElement>();
  for (const { name, label } of VIEWS) {
    const link = el("a", { href: `#/${name}`, class: "nav-link", "data-view": name }, label);
    links.set(name, link);
    nav.append(link);
  }

  // Try to anchor the default time range at the data instead of the wall
  // clock, so freshly replayed traces land in view.
  try {
    const status = await api.status();
    if (status.last_block_time !== null) {
      store.update({ range: [status.last_block_time - 2 * 3_600_000, status.last_block_time + 1] });
    }
  } catch {
    // dashboard will show the offline banner
  }

  function navigate(view: ViewName): void {
    store.update({ view });
    for (const [name, link] of links) {
      link.classList.toggle("active", name === view);
    }
    clear(content);
    switch (view) {
      case "dashboard":
        renderDashboard(content, api);
        break;
      case "network":
        renderNetwork(content, api);
        break;
      case "transactions":
        renderTransactions(content, api, store);
        break;
      case "chaincodes":
        renderChaincodes(content, api);
        break;
    }
  }

  function viewFromHash(): ViewName {
    const name = window.location.hash.replace(/^#\//, "");
    return (VIEWS.some((v) => v.name === name) ? name : "dashboard") as ViewName;
  }

  window.addEventListener("hashchange", () => navigate(viewFromHash()));

  const feed = new AlertFeed(api, (alert) => sidebar.add(alert));
  try {
    const existing = await api.alerts(0);
    for (const alert of [...existing].reverse()) sidebar.add(alert);
    feed.prime(existing);
  } catch {
    // feed.start() polling will pick alerts up once the API is back
  }
  feed.start();

  navigate(viewFromHash());
  return { store, api, sidebar, feed, navigate };
}

declare global {
  interface Window {
    LEDGERWATCH_BOOT?: Promise<AppHandles>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.LEDGERWATCH_BOOT = bootstrap(document.getElementById("app")!);
}
