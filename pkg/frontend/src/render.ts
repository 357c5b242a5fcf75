// SVG painter for scenes built by scene.ts. Communities are nested circles,
// connectivity arcs join glyph centers, and an expanded leaf draws its
// node-link view inside the focus circle with pan and zoom.

import type { Scene, Glyph } from './scene.js';
import { communityDetail, incidentEdges, nodeDetail } from './details.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface RenderCallbacks {
  onCommunityClick?: (id: number) => void;
  onNodeClick?: (globalId: number) => void;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
    tag: K, attrs: Record<string, string | number>): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export class SceneRenderer {
  private popup: HTMLDivElement;
  private leafTransform = { x: 0, y: 0, scale: 1 };

  constructor(private svg: SVGSVGElement, popupHost: HTMLElement,
              private callbacks: RenderCallbacks = {}) {
    this.popup = document.createElement('div');
    this.popup.className = 'hover-popup';
    this.popup.style.display = 'none';
    popupHost.appendChild(this.popup);
  }

  private showPopup(text: string, x: number, y: number): void {
    this.popup.textContent = text;
    this.popup.style.display = 'block';
    this.popup.style.left = `${x + 12}px`;
    this.popup.style.top = `${y + 12}px`;
  }

  private hidePopup(): void {
    this.popup.style.display = 'none';
  }

  /** Repaint the whole scene; every glyph becomes exactly one circle. */
  paint(scene: Scene): void {
    while (this.svg.firstChild) {
      this.svg.removeChild(this.svg.firstChild);
    }
    this.hidePopup();

    const centers = new Map<number, Glyph>();
    for (const glyph of scene.glyphs) {
      centers.set(glyph.id, glyph);
    }

    const arcLayer = svgEl('g', { class: 'arcs' });
    for (const arc of scene.arcs) {
      const a = centers.get(arc.a)!;
      const b = centers.get(arc.b)!;
      const line = svgEl('line', {
        x1: a.cx, y1: a.cy, x2: b.cx, y2: b.cy,
        class: 'connectivity-arc',
        'stroke-width': arc.thickness.toFixed(2),
        'data-weight': arc.weight,
        'data-arc': `${arc.a}-${arc.b}`,
      });
      const title = svgEl('title', {});
      title.textContent = `${arc.weight} crossing edges`;
      line.appendChild(title);
      arcLayer.appendChild(line);
    }

    const glyphLayer = svgEl('g', { class: 'glyphs' });
    // outermost ancestors first so inner circles stay clickable
    const ordered = [...scene.glyphs].sort((x, y) => y.r - x.r);
    for (const glyph of ordered) {
      const circle = svgEl('circle', {
        cx: glyph.cx, cy: glyph.cy, r: glyph.r,
        class: `community kind-${glyph.kind}${glyph.isLeaf ? ' leaf' : ''}`,
        'data-id': glyph.id,
        'data-kind': glyph.kind,
      });
      circle.addEventListener('click', (ev) => {
        ev.stopPropagation();
        this.callbacks.onCommunityClick?.(glyph.id);
      });
      circle.addEventListener('mouseenter', (ev) => {
        const me = ev as MouseEvent;
        this.showPopup(communityDetail(glyph), me.clientX, me.clientY);
      });
      circle.addEventListener('mouseleave', () => this.hidePopup());
      glyphLayer.appendChild(circle);
    }

    this.svg.appendChild(arcLayer);
    this.svg.appendChild(glyphLayer);

    if (scene.leaf) {
      this.paintLeaf(scene);
    }
  }

  private paintLeaf(scene: Scene): void {
    const leaf = scene.leaf!;
    const focus = scene.glyphs.find((g) => g.kind === 'focus')!;
    const group = svgEl('g', { class: 'leaf-view' });
    const applyTransform = () => {
      const t = this.leafTransform;
      group.setAttribute(
        'transform',
        `translate(${focus.cx + t.x},${focus.cy + t.y}) scale(${t.scale})`);
    };
    this.leafTransform = { x: 0, y: 0, scale: 1 };
    applyTransform();

    const edgeEls: SVGLineElement[] = [];
    for (const [u, v] of leaf.edges) {
      const a = leaf.nodes[u];
      const b = leaf.nodes[v];
      const line = svgEl('line', {
        x1: a.x, y1: a.y, x2: b.x, y2: b.y, class: 'leaf-edge',
      });
      edgeEls.push(line as SVGLineElement);
      group.appendChild(line);
    }
    for (const node of leaf.nodes) {
      const circle = svgEl('circle', {
        cx: node.x, cy: node.y, r: 5, class: 'leaf-node',
        'data-global-id': node.globalId,
      });
      circle.addEventListener('mouseenter', (ev) => {
        const me = ev as MouseEvent;
        this.showPopup(nodeDetail(leaf, node.local), me.clientX, me.clientY);
        for (const i of incidentEdges(leaf, node.local)) {
          edgeEls[i].classList.add('highlight');
        }
      });
      circle.addEventListener('mouseleave', () => {
        this.hidePopup();
        for (const el of edgeEls) {
          el.classList.remove('highlight');
        }
      });
      circle.addEventListener('click', (ev) => {
        ev.stopPropagation();
        this.callbacks.onNodeClick?.(node.globalId);
      });
      group.appendChild(circle);
    }

    // pan with drag, zoom with the wheel
    let dragging: { x: number; y: number } | null = null;
    this.svg.addEventListener('mousedown', (ev) => {
      dragging = { x: ev.clientX, y: ev.clientY };
    });
    this.svg.addEventListener('mousemove', (ev) => {
      if (!dragging) return;
      this.leafTransform.x += ev.clientX - dragging.x;
      this.leafTransform.y += ev.clientY - dragging.y;
      dragging = { x: ev.clientX, y: ev.clientY };
      applyTransform();
    });
    this.svg.addEventListener('mouseup', () => {
      dragging = null;
    });
    this.svg.addEventListener('wheel', (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.leafTransform.scale =
        Math.min(8, Math.max(0.2, this.leafTransform.scale * factor));
      applyTransform();
    });

    this.svg.appendChild(group);
  }
}
