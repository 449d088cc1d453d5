// Small force-directed layout: spring links, pairwise repulsion, gentle
// centering. Deterministic (no randomness: nodes start on a circle), so
// layouts are reproducible and testable.

export interface SimNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  fx: number | null; // pinned position while dragging
  fy: number | null;
}

export interface SimLink {
  source: string;
  target: string;
}

export interface ForceOptions {
  springLength: number;
  springStrength: number;
  repulsion: number;
  centerPull: number;
  damping: number;
}

const DEFAULTS: ForceOptions = {
  springLength: 120,
  springStrength: 0.02,
  repulsion: 45_000,
  centerPull: 0.015,
  damping: 0.85,
};

export class ForceLayout {
  readonly nodes: SimNode[];
  private byId = new Map<string, SimNode>();
  private links: Array<[SimNode, SimNode]>;
  private opts: ForceOptions;

  constructor(
    ids: string[],
    links: SimLink[],
    private width = 800,
    private height = 520,
    opts: Partial<ForceOptions> = {},
  ) {
    this.opts = { ...DEFAULTS, ...opts };
    const cx = width / 2;
    const cy = height / 2;
    const radius = Math.min(width, height) / 3;
    this.nodes = ids.map((id, i) => {
      const angle = (2 * Math.PI * i) / Math.max(1, ids.length);
      return {
        id,
        x: cx + radius * Math.cos(angle),
        y: cy + radius * Math.sin(angle),
        vx: 0,
        vy: 0,
        fx: null,
        fy: null,
      };
    });
    for (const node of this.nodes) this.byId.set(node.id, node);
    this.links = links
      .filter((l) => this.byId.has(l.source) && this.byId.has(l.target))
      .map((l) => [this.byId.get(l.source)!, this.byId.get(l.target)!]);
  }

  node(id: string): SimNode | undefined {
    return this.byId.get(id);
  }

  pin(id: string, x: number, y: number): void {
    const node = this.byId.get(id);
    if (node) {
      node.fx = x;
      node.fy = y;
    }
  }

  release(id: string): void {
    const node = this.byId.get(id);
    if (node) {
      node.fx = null;
      node.fy = null;
    }
  }

  tick(): void {
    const { springLength, springStrength, repulsion, centerPull, damping } = this.opts;
    for (let i = 0; i < this.nodes.length; i++) {
      for (let j = i + 1; j < this.nodes.length; j++) {
        const a = this.nodes[i];
        const b = this.nodes[j];
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          // Deterministic nudge for coincident nodes.
          dx = 0.5 + (i % 3);
          dy = 0.5 + (j % 3);
          d2 = dx * dx + dy * dy;
        }
        const force = repulsion / d2;
        const d = Math.sqrt(d2);
        const fx = (dx / d) * force;
        const fy = (dy / d) * force;
        a.vx -= fx;
        a.vy -= fy;
        b.vx += fx;
        b.vy += fy;
      }
    }
    for (const [a, b] of this.links) {
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(1, Math.sqrt(dx * dx + dy * dy));
      const stretch = (d - springLength) * springStrength;
      const fx = (dx / d) * stretch;
      const fy = (dy / d) * stretch;
      a.vx += fx;
      a.vy += fy;
      b.vx -= fx;
      b.vy -= fy;
    }
    for (const node of this.nodes) {
      node.vx += (this.width / 2 - node.x) * centerPull;
      node.vy += (this.height / 2 - node.y) * centerPull;
      node.vx *= damping;
      node.vy *= damping;
      if (node.fx !== null && node.fy !== null) {
        node.x = node.fx;
        node.y = node.fy;
        node.vx = 0;
        node.vy = 0;
        continue;
      }
      node.x += node.vx;
      node.y += node.vy;
      node.x = Math.min(this.width - 20, Math.max(20, node.x));
      node.y = Math.min(this.height - 20, Math.max(20, node.y));
    }
  }

  run(ticks = 250): void {
    for (let i = 0; i < ticks; i++) this.tick();
  }
}
