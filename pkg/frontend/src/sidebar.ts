// Persistent notification sidebar: alerts accumulate across view changes,
// newest on top; configuration-change alerts are visually prominent.

import { el } from "./dom.js";
import { fmtTime, SEVERITY_COLORS } from "./format.js";
import type { Alert } from "./types.js";

export class AlertSidebar {
  readonly root: HTMLElement;
  private list: HTMLElement;
  private badge: HTMLElement;
  private count = 0;

  constructor() {
    this.badge = el("span", { class: "alert-count", "data-testid": "alert-count" }, "0");
    this.list = el("div", { class: "alert-list", "data-testid": "alert-list" });
    this.root = el(
      "aside",
      { class: "sidebar", "data-testid": "alert-sidebar" },
      el("h2", {}, "Alerts ", this.badge),
      this.list,
    );
    this.renderEmpty();
  }

  private renderEmpty(): void {
    this.list.append(el("p", { class: "empty-state" }, "No alerts."));
  }

  add(alert: Alert): void {
    if (this.count === 0) {
      this.list.textContent = "";
    }
    this.count += 1;
    this.badge.textContent = String(this.count);
    const prominent = alert.rule === "config_change";
    const item = el(
      "div",
      {
        class: `alert-item severity-${alert.severity.toLowerCase()}`
          + (prominent ? " alert-config" : ""),
        "data-rule": alert.rule,
        "data-alert-id": alert.alert_id,
      },
      el("span", {
        class: "severity-dot",
        style: `background:${SEVERITY_COLORS[alert.severity] ?? "#888"}`,
      }),
      el("div", { class: "alert-body" },
        el("strong", {}, prominent ? "⚠ Configuration change" : alert.rule),
        el("div", { class: "alert-summary" }, alert.summary),
        el("div", { class: "alert-meta" },
          `${alert.threat_codes.join(", ")} · ${fmtTime(alert.raised_at)}`),
      ),
    );
    this.list.prepend(item);
  }
}
