// Typed client for the /api/v1 endpoints. All state shown by the UI comes
// from these responses; the client does no graph computation of its own.

export interface DatasetInfo {
  id: string;
  n: number;
  e: number;
  levels: number;
  fanout: number;
  tree_nodes: number;
  leaves: number;
  extractable: boolean;
}

export interface NodeSummary {
  id: number;
  parent: number | null;
  level: number;
  member_count: number;
  internal_edges: number;
  is_leaf: boolean;
}

export interface ConnectivityArc {
  a: number;
  b: number;
  weight: number;
}

export interface ContextResponse {
  focus: number;
  ancestors: number[];
  siblings: number[];
  children: number[];
  visible: number[];
  connectivity: ConnectivityArc[];
  nodes: Record<string, NodeSummary>;
}

export interface LeafSubgraphResponse {
  leaf_id: number;
  n: number;
  e: number;
  directed: boolean;
  global_ids: number[];
  labels: string[] | null;
  edges: [number, number][];
}

export interface SearchMatch {
  global_id: number;
  leaf_id: number;
  local_index: number;
  path: number[];
}

export interface SearchResponse {
  label: string;
  matches: SearchMatch[];
}

export interface ExtractRequest {
  sources: number[];
  budget: number;
  c?: number;
  maxlen?: number;
}

export interface ExtractResponse {
  nodes: number[];
  edges: [number, number][];
  sources: number[];
  budget: number;
  node_count: number;
  edge_count: number;
  labels: Record<string, string> | null;
}

export class ApiError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    const err = body?.error ?? { code: 'error', message: resp.statusText };
    throw new ApiError(err.code, err.message);
  }
  return body as T;
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  async datasets(): Promise<DatasetInfo[]> {
    const body = await parseOrThrow<{ datasets: DatasetInfo[] }>(
      await fetch(this.url('/datasets')));
    return body.datasets;
  }

  context(ds: string, focus: number,
          signal?: AbortSignal): Promise<ContextResponse> {
    return fetch(this.url(`/tree/${ds}/context?focus=${focus}`), { signal })
      .then((r) => parseOrThrow<ContextResponse>(r));
  }

  search(ds: string, label: string): Promise<SearchResponse> {
    const q = encodeURIComponent(label);
    return fetch(this.url(`/tree/${ds}/search?label=${q}`))
      .then((r) => parseOrThrow<SearchResponse>(r));
  }

  leafSubgraph(ds: string, leafId: number): Promise<LeafSubgraphResponse> {
    return fetch(this.url(`/leaf/${ds}/${leafId}/subgraph`))
      .then((r) => parseOrThrow<LeafSubgraphResponse>(r));
  }

  extract(ds: string, request: ExtractRequest): Promise<ExtractResponse> {
    return fetch(this.url(`/extract/${ds}`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    }).then((r) => parseOrThrow<ExtractResponse>(r));
  }
}
