// Application bootstrap: dataset picker, breadcrumb, search box, the scene
// canvas, and the extraction form, all driven by server responses.

import { ApiClient } from './api.js';
import { buildScene, layoutLeaf } from './scene.js';
import { SceneRenderer } from './render.js';
import { ViewStore } from './state.js';
import { ExtractionController } from './extraction.js';

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mount(root: HTMLElement,
                      baseUrl: string = ''): { store: ViewStore } {
  const api = new ApiClient(baseUrl);
  const store = new ViewStore(api);

  const toolbar = el('div', 'toolbar');
  const datasetSelect = el('select', 'dataset-select');
  const searchInput = el('input', 'search-input');
  searchInput.placeholder = 'find a label…';
  const searchResults = el('div', 'search-results');
  const breadcrumbBar = el('nav', 'breadcrumb');
  const errorBar = el('div', 'error-bar');
  toolbar.append(datasetSelect, searchInput);

  const canvasWrap = el('div', 'canvas-wrap');
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('width', '900');
  svg.setAttribute('height', '640');
  canvasWrap.appendChild(svg);

  const extractionPanel = el('div', 'extraction-panel');
  const sourcesInput = el('input', 'sources-input');
  sourcesInput.placeholder = 'source ids, comma separated';
  const budgetInput = el('input', 'budget-input');
  budgetInput.value = '30';
  const extractButton = el('button', 'extract-button', 'Extract subgraph');
  const extractionStatus = el('div', 'extraction-status');
  extractionPanel.append(el('h3', undefined, 'Connection subgraph'),
                         sourcesInput, budgetInput, extractButton,
                         extractionStatus);

  root.append(toolbar, breadcrumbBar, errorBar, canvasWrap, extractionPanel);

  const renderer = new SceneRenderer(svg, canvasWrap, {
    onCommunityClick: (id) => { void store.navigateTo(id); },
    onNodeClick: (globalId) => {
      // clicking a concrete node queues it as an extraction source
      const existing = sourcesInput.value.trim();
      sourcesInput.value = existing ? `${existing},${globalId}` : `${globalId}`;
      extraction.setSources(sourcesInput.value);
    },
  });

  const extraction = new ExtractionController(api, (state) => {
    extractionStatus.textContent = state.pending ? 'extracting…'
      : state.error ? state.error
      : state.result
        ? `subgraph: ${state.result.node_count} nodes, `
          + `${state.result.edge_count} edges`
        : '';
    extractionStatus.classList.toggle('error', state.error !== null);
  });

  sourcesInput.addEventListener('input', () => {
    extraction.setSources(sourcesInput.value);
  });
  budgetInput.addEventListener('input', () => {
    extraction.setBudget(budgetInput.value);
  });
  extractButton.addEventListener('click', () => {
    const ds = store.current.datasetId;
    if (ds) void extraction.submit(ds);
  });

  store.subscribe((state) => {
    errorBar.textContent = state.error ?? '';
    breadcrumbBar.replaceChildren();
    for (const ancestor of store.breadcrumb) {
      const link = el('a', 'crumb', `#${ancestor}`);
      link.addEventListener('click', () => { void store.navigateTo(ancestor); });
      breadcrumbBar.appendChild(link);
      breadcrumbBar.appendChild(el('span', 'crumb-sep', ' / '));
    }
    if (state.context) {
      breadcrumbBar.appendChild(el('span', 'crumb-here', `#${state.focus}`));
      const scene = buildScene(state.context, state.leaf,
                               svg.clientWidth || 900,
                               svg.clientHeight || 640);
      renderer.paint(scene);
    }
  });

  searchInput.addEventListener('keydown', (ev) => {
    if (ev.key !== 'Enter') return;
    const ds = store.current.datasetId;
    if (!ds) return;
    void api.search(ds, searchInput.value.trim()).then((resp) => {
      searchResults.replaceChildren();
      if (!resp.matches.length) {
        searchResults.appendChild(el('div', 'no-match', 'no match'));
        return;
      }
      for (const match of resp.matches) {
        const row = el('div', 'match-row',
                       `node ${match.global_id} in leaf ${match.leaf_id}`);
        row.addEventListener('click', () => {
          void store.navigateTo(match.leaf_id);
        });
        searchResults.appendChild(row);
      }
    });
  });
  toolbar.appendChild(searchResults);

  datasetSelect.addEventListener('change', () => {
    void store.openDataset(datasetSelect.value);
  });

  void api.datasets().then((datasets) => {
    datasetSelect.replaceChildren();
    if (!datasets.length) {
      root.prepend(el('div', 'empty-state',
                      'No datasets registered with the service.'));
      return;
    }
    for (const ds of datasets) {
      const option = el('option', undefined,
                        `${ds.id} (${ds.n} nodes, ${ds.e} edges)`);
      option.setAttribute('value', ds.id);
      datasetSelect.appendChild(option);
    }
    void store.openDataset(datasets[0].id);
  });

  return { store };
}

export { buildScene, layoutLeaf };

declare global {
  interface Window { graphatlasMount?: typeof mount; }
}
if (typeof window !== 'undefined') {
  window.graphatlasMount = mount;
}
