// Force-directed network view: circles are peers, rectangles are orderers;
// local nodes are colored, foreign ones greyed, and two uncolored border
// nodes mark the edge of monitoring visibility. Link color follows the
// traffic deviation scale; clicking a node opens its log drawer.

import type { ApiClient } from "../api.js";
import { SVG_NS, svgEl } from "../charts.js";
import { clear, el } from "../dom.js";
import { ForceLayout } from "../force.js";
import { deviationColor, fmtNum, fmtTime, mspColors } from "../format.js";
import type { GraphLink, GraphNode, NetworkPayload } from "../types.js";

const WIDTH = 860;
const HEIGHT = 520;
const FOREIGN_FILL = "#9aa3ab";
const BORDER_FILL = "#ffffff";

export interface NetworkController {
  ready: Promise<void>;
  layout: ForceLayout | null;
  openLogs(nodeId: string): Promise<void>;
}

export function renderNetwork(root: HTMLElement, api: ApiClient): NetworkController {
  clear(root);
  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "network-canvas",
    "data-testid": "network-canvas",
  });
  const tooltip = el("div", { class: "tooltip hidden", "data-testid": "tooltip" });
  const drawer = el("div", { class: "log-drawer hidden", "data-testid": "log-drawer" });
  root.append(svg, tooltip, drawer);

  const controller: NetworkController = {
    layout: null,
    ready: Promise.resolve(),
    openLogs: async () => {},
  };

  controller.ready = (async () => {
    let payload: NetworkPayload;
    try {
      payload = await api.network();
    } catch {
      root.prepend(el("p", { class: "empty-state" }, "Network data unavailable."));
      return;
    }
    if (!payload.nodes.length) {
      root.prepend(el("p", { class: "empty-state" }, "No nodes to display."));
      return;
    }
    draw(payload);
  })();

  function nodeFill(node: GraphNode, colors: Map<string, string>): string {
    if (node.border) return BORDER_FILL;
    if (!node.local) return FOREIGN_FILL;
    return colors.get(node.msp) ?? "#3b6fb5";
  }

  function linkTooltip(link: GraphLink): string {
    if (link.current === null) return "outside monitoring visibility";
    return `current ${fmtNum(link.current)} · baseline ${fmtNum(link.baseline ?? 0)}`
      + ` · deviation ${link.deviation.toFixed(3)}`;
  }

  function draw(payload: NetworkPayload): void {
    const colors = mspColors(
      [...new Set(payload.nodes.filter((n) => n.local).map((n) => n.msp))]);
    const layout = new ForceLayout(
      payload.nodes.map((n) => n.id),
      payload.links.map((l) => ({ source: l.source, target: l.target })),
      WIDTH, HEIGHT);
    layout.run(250);
    controller.layout = layout;

    const linkLayer = document.createElementNS(SVG_NS, "g");
    const nodeLayer = document.createElementNS(SVG_NS, "g");
    svg.append(linkLayer, nodeLayer);

    const linkEls: Array<{ line: SVGLineElement; link: GraphLink }> = [];
    for (const link of payload.links) {
      const measured = link.current !== null;
      const line = svgEl("line", {
        class: "net-link",
        stroke: measured ? deviationColor(link.deviation) : "#c4c9ce",
        "stroke-width": measured ? 3 : 1.5,
        "stroke-dasharray": measured ? "none" : "5 4",
        "data-source": link.source,
        "data-target": link.target,
        "data-deviation": link.deviation,
      });
      line.addEventListener("mouseenter", (event) => {
        tooltip.textContent = `${link.source} ↔ ${link.target}: ${linkTooltip(link)}`;
        showTooltip(event as MouseEvent);
        line.setAttribute("stroke-width", measured ? "5" : "3");
      });
      line.addEventListener("mouseleave", () => {
        tooltip.classList.add("hidden");
        line.setAttribute("stroke-width", measured ? "3" : "1.5");
      });
      linkLayer.appendChild(line);
      linkEls.push({ line, link });
    }

    const shapes = new Map<string, SVGGraphicsElement>();
    for (const node of payload.nodes) {
      const fill = nodeFill(node, colors);
      const shape = node.kind === "PEER"
        ? svgEl("circle", { r: 14 })
        : svgEl("rect", { width: 26, height: 26, rx: 3 });
      shape.setAttribute("fill", fill);
      shape.setAttribute("stroke", node.border ? "#8a939c" : "#2f3b45");
      if (node.border) shape.setAttribute("stroke-dasharray", "4 3");
      shape.setAttribute("class", "net-node"
        + (node.local ? " node-local" : node.border ? " node-border" : " node-foreign"));
      shape.setAttribute("data-node-id", node.id);
      shape.setAttribute("data-kind", node.kind);
      shape.setAttribute("data-border", String(node.border));
      shape.setAttribute("cursor", "grab");

      shape.addEventListener("mouseenter", (event) => {
        const role = node.border
          ? "monitoring visibility border"
          : `${node.local ? "local" : "foreign"} ${node.kind.toLowerCase()}`
            + (node.msp ? ` · ${node.msp}` : "");
        tooltip.textContent = `${node.id || "(border)"}: ${role}`;
        showTooltip(event as MouseEvent);
      });
      shape.addEventListener("mouseleave", () => tooltip.classList.add("hidden"));
      if (!node.border) {
        shape.addEventListener("dblclick", () => void controller.openLogs(node.id));
      }
      enableDrag(shape, node.id);
      const label = svgEl("text", {
        class: "net-label", "font-size": 10, "text-anchor": "middle",
      });
      label.textContent = node.border ? "?" : node.id;
      const group = document.createElementNS(SVG_NS, "g");
      group.append(shape, label);
      nodeLayer.appendChild(group);
      shapes.set(node.id, shape);
    }

    function position(): void {
      for (const node of payload.nodes) {
        const sim = layout.node(node.id)!;
        const shape = shapes.get(node.id)!;
        if (node.kind === "PEER") {
          shape.setAttribute("cx", String(sim.x));
          shape.setAttribute("cy", String(sim.y));
        } else {
          shape.setAttribute("x", String(sim.x - 13));
          shape.setAttribute("y", String(sim.y - 13));
        }
        const label = shape.parentElement?.querySelector("text");
        label?.setAttribute("x", String(sim.x));
        label?.setAttribute("y", String(sim.y + 28));
      }
      for (const { line, link } of linkEls) {
        const a = layout.node(link.source)!;
        const b = layout.node(link.target)!;
        line.setAttribute("x1", String(a.x));
        line.setAttribute("y1", String(a.y));
        line.setAttribute("x2", String(b.x));
        line.setAttribute("y2", String(b.y));
      }
    }

    function enableDrag(shape: SVGGraphicsElement, id: string): void {
      shape.addEventListener("mousedown", (down) => {
        down.preventDefault();
        const rect = svg.getBoundingClientRect();
        const scaleX = rect.width ? WIDTH / rect.width : 1;
        const scaleY = rect.height ? HEIGHT / rect.height : 1;
        const move = (event: MouseEvent) => {
          layout.pin(id,
            (event.clientX - rect.left) * scaleX,
            (event.clientY - rect.top) * scaleY);
          layout.tick();
          position();
        };
        const up = () => {
          layout.release(id);
          window.removeEventListener("mousemove", move);
          window.removeEventListener("mouseup", up);
        };
        window.addEventListener("mousemove", move);
        window.addEventListener("mouseup", up);
      });
    }

    position();
  }

  function showTooltip(event: MouseEvent): void {
    tooltip.classList.remove("hidden");
    tooltip.style.left = `${event.clientX + 12}px`;
    tooltip.style.top = `${event.clientY + 12}px`;
  }

  controller.openLogs = async (nodeId: string) => {
    drawer.classList.remove("hidden");
    clear(drawer);
    drawer.append(el("h3", {}, `Logs · ${nodeId}`));
    const close = el("button", { class: "drawer-close" }, "close");
    close.addEventListener("click", () => drawer.classList.add("hidden"));
    drawer.append(close);
    try {
      const { lines } = await api.logs({ node: nodeId, limit: 50 });
      if (!lines.length) {
        drawer.append(el("p", { class: "empty-state" }, "No log lines."));
        return;
      }
      const list = el("div", { class: "log-lines" });
      for (const line of lines) {
        list.append(el("div", { class: `log-line level-${line.level.toLowerCase()}` },
          `${fmtTime(line.timestamp)} [${line.level}] ${line.message}`));
      }
      drawer.append(list);
    } catch {
      drawer.append(el("p", { class: "empty-state" }, "Logs unavailable."));
    }
  };

  return controller;
}
