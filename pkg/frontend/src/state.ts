// View state: which dataset and focus are shown, the last fetched context,
// and the in-flight request bookkeeping. At most one context request is in
// flight; starting a new navigation aborts the previous one (latest wins).
// Leaf subgraphs are fetched only when the focus itself is a leaf.

import { ApiClient, ContextResponse, LeafSubgraphResponse } from './api.js';

export interface ViewState {
  datasetId: string | null;
  focus: number;
  context: ContextResponse | null;
  leaf: LeafSubgraphResponse | null;
  selection: number | null;
  error: string | null;
}

export type Listener = (state: ViewState) => void;

export class ViewStore {
  private state: ViewState = {
    datasetId: null,
    focus: 0,
    context: null,
    leaf: null,
    selection: null,
    error: null,
  };

  private listeners: Listener[] = [];
  private inflight: AbortController | null = null;
  private generation = 0;

  constructor(private api: ApiClient) {}

  get current(): ViewState {
    return this.state;
  }

  /** Breadcrumb is exactly the ancestors path of the shown context. */
  get breadcrumb(): number[] {
    return this.state.context ? [...this.state.context.ancestors] : [];
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l(this.state);
  }

  private patch(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  async openDataset(datasetId: string): Promise<void> {
    this.patch({ datasetId, context: null, leaf: null, selection: null });
    await this.navigateTo(0);
  }

  /**
   * Fetch the context of one tree node (exactly one /context request per
   * navigation) and, only when that node is a leaf, its subgraph.
   */
  async navigateTo(focus: number): Promise<void> {
    const ds = this.state.datasetId;
    if (ds === null) {
      throw new Error('no dataset selected');
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const gen = ++this.generation;
    try {
      const context = await this.api.context(ds, focus, controller.signal);
      if (gen !== this.generation) {
        return; // a later navigation superseded this one
      }
      let leaf: LeafSubgraphResponse | null = null;
      if (context.nodes[String(focus)]?.is_leaf) {
        leaf = await this.api.leafSubgraph(ds, focus);
        if (gen !== this.generation) {
          return;
        }
      }
      this.patch({ focus, context, leaf, selection: null, error: null });
    } catch (err) {
      if ((err as Error).name === 'AbortError') {
        return;
      }
      if (gen === this.generation) {
        this.patch({ error: (err as Error).message });
      }
    }
  }

  select(node: number | null): void {
    this.patch({ selection: node });
  }
}
