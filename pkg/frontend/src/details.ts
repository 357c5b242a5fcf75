// Hover popup content. Communities show their size; concrete graph nodes
// show label, global id and degree.

import type { LeafScene } from './scene.js';
import type { Glyph } from './scene.js';

export function communityDetail(glyph: Glyph): string {
  const what = glyph.isLeaf ? 'leaf community' : 'community';
  return `${what} #${glyph.id} — ${glyph.memberCount} members`;
}

export function nodeDetail(leaf: LeafScene, local: number): string {
  const node = leaf.nodes[local];
  let degree = 0;
  for (const [u, v] of leaf.edges) {
    if (u === local || v === local) degree += 1;
  }
  const label = node.label || '(unlabeled)';
  return `${label} — node ${node.globalId}, degree ${degree}`;
}

export function incidentEdges(leaf: LeafScene, local: number): number[] {
  const out: number[] = [];
  leaf.edges.forEach(([u, v], i) => {
    if (u === local || v === local) out.push(i);
  });
  return out;
}
