// Captured service responses for the 16-node fixture graph (four 4-cliques
// chained by three bridges, fanout 2, 3 levels).

import type { ContextResponse, LeafSubgraphResponse } from '../src/api.js';

export const rootContext: ContextResponse = {
  focus: 0,
  ancestors: [],
  siblings: [],
  children: [1, 2],
  visible: [0, 1, 2],
  connectivity: [{ a: 1, b: 2, weight: 1 }],
  nodes: {
    '0': { id: 0, parent: null, level: 0, member_count: 16,
           internal_edges: 27, is_leaf: false },
    '1': { id: 1, parent: 0, level: 1, member_count: 8,
           internal_edges: 13, is_leaf: false },
    '2': { id: 2, parent: 0, level: 1, member_count: 8,
           internal_edges: 13, is_leaf: false },
  },
};

export const leafContext: ContextResponse = {
  focus: 3,
  ancestors: [0, 1],
  siblings: [4],
  children: [],
  visible: [0, 1, 3, 4],
  connectivity: [{ a: 3, b: 4, weight: 1 }],
  nodes: {
    '0': { id: 0, parent: null, level: 0, member_count: 16,
           internal_edges: 27, is_leaf: false },
    '1': { id: 1, parent: 0, level: 1, member_count: 8,
           internal_edges: 13, is_leaf: false },
    '3': { id: 3, parent: 1, level: 2, member_count: 4,
           internal_edges: 6, is_leaf: true },
    '4': { id: 4, parent: 1, level: 2, member_count: 4,
           internal_edges: 6, is_leaf: true },
  },
};

export const leafSubgraph: LeafSubgraphResponse = {
  leaf_id: 3,
  n: 4,
  e: 6,
  directed: false,
  global_ids: [0, 1, 2, 3],
  labels: ['node00', 'node01', 'node02', 'node03'],
  edges: [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]],
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}
