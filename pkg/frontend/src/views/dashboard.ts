// Overview: security summary cards and the framework issue list
// (high/highest only, expandable entries, newest first).

import type { ApiClient } from "../api.js";
import { clear, el } from "../dom.js";
import { fmtTime } from "../format.js";
import type { Issue, StatusResponse } from "../types.js";

export interface DashboardController {
  ready: Promise<void>;
  refresh(): Promise<void>;
}

export function renderDashboard(root: HTMLElement, api: ApiClient): DashboardController {
  clear(root);
  const cards = el("div", { class: "cards", "data-testid": "status-cards" });
  const issuesBox = el("section", { class: "issues", "data-testid": "issue-list" },
    el("h2", {}, "Known framework issues"));
  const banner = el("div", { class: "offline-banner hidden", "data-testid": "offline-banner" },
    "Monitoring service unreachable; data may be stale.");
  root.append(banner, cards, issuesBox);

  const paintStatus = (status: StatusResponse) => {
    clear(cards);
    const counts = status.alert_counts;
    const card = (label: string, value: string) =>
      el("div", { class: "card" }, el("h3", {}, label), el("p", { class: "card-value" }, value));
    cards.append(
      card("Chain height", status.height === null ? "—" : String(status.height)),
      card("Last block", status.last_block_time === null ? "—" : fmtTime(status.last_block_time)),
      card("Nodes", String(status.node_count)),
      card("Organizations", String(status.msp_count)),
      card("Alerts", `${counts.HIGH ?? 0} high / ${counts.WARNING ?? 0} warn / ${counts.INFO ?? 0} info`),
    );
  };

  const paintIssues = (issues: Issue[]) => {
    for (const existing of issuesBox.querySelectorAll(".issue-item")) existing.remove();
    if (!issues.length) {
      issuesBox.append(el("p", { class: "empty-state issue-item" }, "No open high-priority issues."));
      return;
    }
    for (const issue of issues) {
      const detail = el("div", { class: "issue-detail hidden" },
        el("p", {}, issue.description),
        el("p", { class: "issue-meta" }, `Status: ${issue.status}`));
      const header = el("button", { class: "issue-header", "data-issue": issue.issue_id },
        el("span", { class: `priority priority-${issue.priority.toLowerCase()}` }, issue.priority),
        el("span", { class: "issue-title" }, `${issue.issue_id} · ${issue.title}`),
        el("span", { class: "issue-updated" }, fmtTime(issue.updated)),
      );
      header.addEventListener("click", () => detail.classList.toggle("hidden"));
      issuesBox.append(el("div", { class: "issue-item" }, header, detail));
    }
  };

  const refresh = async () => {
    try {
      const [status, issues] = await Promise.all([api.status(), api.issues()]);
      banner.classList.add("hidden");
      paintStatus(status);
      paintIssues(issues);
    } catch {
      banner.classList.remove("hidden");
    }
  };

  return { ready: refresh(), refresh };
}
