// Pure scene construction: a context response (plus, for leaves, the loaded
// subgraph) becomes a deterministic drawing description. Keeping this free
// of DOM access makes the display rules unit-testable: every visible tree
// node appears exactly once and arc thickness grows with weight.

import type { ContextResponse, LeafSubgraphResponse } from './api.js';

export type GlyphKind = 'focus' | 'ancestor' | 'sibling' | 'child';

export interface Glyph {
  id: number;
  kind: GlyphKind;
  cx: number;
  cy: number;
  r: number;
  memberCount: number;
  isLeaf: boolean;
}

export interface SceneArc {
  a: number;
  b: number;
  weight: number;
  thickness: number;
}

export interface LeafNode {
  local: number;
  globalId: number;
  label: string;
  x: number;
  y: number;
}

export interface LeafScene {
  nodes: LeafNode[];
  edges: [number, number][];
}

export interface Scene {
  glyphs: Glyph[];
  arcs: SceneArc[];
  leaf: LeafScene | null;
}

function arcThickness(weight: number, maxWeight: number): number {
  // monotone in weight, bounded so heavy arcs stay readable
  return 1 + 5 * (Math.log1p(weight) / Math.log1p(Math.max(maxWeight, 1)));
}

/** Deterministic force-directed layout for a leaf's node-link view. */
export function layoutLeaf(sub: LeafSubgraphResponse, radius: number,
                           iterations = 120): LeafScene {
  const n = sub.n;
  const xs = new Float64Array(n);
  const ys = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const angle = (2 * Math.PI * i) / Math.max(n, 1);
    xs[i] = Math.cos(angle) * radius * 0.7;
    ys[i] = Math.sin(angle) * radius * 0.7;
  }
  const spring = radius / Math.max(2, Math.sqrt(n));
  for (let it = 0; it < iterations; it++) {
    const step = 0.045 * radius * (1 - it / iterations);
    const fx = new Float64Array(n);
    const fy = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = xs[i] - xs[j];
        let dy = ys[i] - ys[j];
        const d2 = dx * dx + dy * dy + 1e-6;
        const rep = (spring * spring) / d2;
        dx *= rep;
        dy *= rep;
        fx[i] += dx; fy[i] += dy;
        fx[j] -= dx; fy[j] -= dy;
      }
    }
    for (const [u, v] of sub.edges) {
      const dx = xs[v] - xs[u];
      const dy = ys[v] - ys[u];
      const d = Math.sqrt(dx * dx + dy * dy) + 1e-6;
      const pull = (d - spring) / d * 0.5;
      fx[u] += dx * pull; fy[u] += dy * pull;
      fx[v] -= dx * pull; fy[v] -= dy * pull;
    }
    for (let i = 0; i < n; i++) {
      const norm = Math.sqrt(fx[i] * fx[i] + fy[i] * fy[i]) + 1e-6;
      const s = Math.min(step, norm) / norm;
      xs[i] += fx[i] * s;
      ys[i] += fy[i] * s;
      const r = Math.sqrt(xs[i] * xs[i] + ys[i] * ys[i]);
      if (r > radius * 0.85) {
        xs[i] *= (radius * 0.85) / r;
        ys[i] *= (radius * 0.85) / r;
      }
    }
  }
  const nodes: LeafNode[] = [];
  for (let i = 0; i < n; i++) {
    nodes.push({
      local: i,
      globalId: sub.global_ids[i],
      label: sub.labels ? sub.labels[i] : '',
      x: xs[i],
      y: ys[i],
    });
  }
  return { nodes, edges: sub.edges };
}

/**
 * Build the nested-enclosure scene for one context: ancestors as enclosing
 * rings, the focus in the middle with its children packed inside, siblings
 * on a ring around it, and connectivity arcs between glyph centers.
 */
export function buildScene(context: ContextResponse,
                           leaf: LeafSubgraphResponse | null,
                           width: number, height: number): Scene {
  const cx = width / 2;
  const cy = height / 2;
  const focusR = Math.min(width, height) * 0.26;
  const glyphs: Glyph[] = [];
  const centers = new Map<number, { x: number; y: number }>();

  const summary = (id: number) => context.nodes[String(id)];

  // ancestors enclose the focus, outermost (the root) last in radius
  const depth = context.ancestors.length;
  context.ancestors.forEach((id, i) => {
    const r = focusR * (1 + 0.28 * (depth - i));
    glyphs.push({
      id, kind: 'ancestor', cx, cy, r,
      memberCount: summary(id)?.member_count ?? 0,
      isLeaf: false,
    });
    centers.set(id, { x: cx, y: cy });
  });

  glyphs.push({
    id: context.focus, kind: 'focus', cx, cy, r: focusR,
    memberCount: summary(context.focus)?.member_count ?? 0,
    isLeaf: summary(context.focus)?.is_leaf ?? false,
  });
  centers.set(context.focus, { x: cx, y: cy });

  const childR = focusR / (1.8 + 0.6 * Math.max(context.children.length - 2, 0));
  context.children.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / context.children.length - Math.PI / 2;
    const ring = context.children.length === 1 ? 0 : focusR - childR * 1.4;
    const x = cx + Math.cos(angle) * ring;
    const y = cy + Math.sin(angle) * ring;
    glyphs.push({
      id, kind: 'child', cx: x, cy: y, r: childR,
      memberCount: summary(id)?.member_count ?? 0,
      isLeaf: summary(id)?.is_leaf ?? false,
    });
    centers.set(id, { x, y });
  });

  const sibR = focusR * 0.45;
  const sibRing = focusR * (1 + 0.28 * depth) + sibR * 1.6;
  context.siblings.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / context.siblings.length + Math.PI / 6;
    const x = cx + Math.cos(angle) * sibRing;
    const y = cy + Math.sin(angle) * sibRing;
    glyphs.push({
      id, kind: 'sibling', cx: x, cy: y, r: sibR,
      memberCount: summary(id)?.member_count ?? 0,
      isLeaf: summary(id)?.is_leaf ?? false,
    });
    centers.set(id, { x, y });
  });

  const maxWeight = Math.max(1, ...context.connectivity.map((c) => c.weight));
  const arcs: SceneArc[] = context.connectivity
    .filter((c) => centers.has(c.a) && centers.has(c.b))
    .map((c) => ({
      a: c.a,
      b: c.b,
      weight: c.weight,
      thickness: arcThickness(c.weight, maxWeight),
    }));

  const leafScene = leaf ? layoutLeaf(leaf, focusR) : null;
  return { glyphs, arcs, leaf: leafScene };
}
