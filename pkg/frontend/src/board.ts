// Board rendering: pure level+placements -> SVG string, DOM-free so it can
// be unit-tested and reused by the dashboard's static previews.

import type { LevelSpec, Placements } from './types.js';

export interface NodePosition {
  x: number;
  y: number;
}

/** Layered layout: x = longest-path depth from the spawns, y spreads a layer. */
export function layout(level: LevelSpec, width = 640, height = 360): Map<string, NodePosition> {
  const depth = new Map<string, number>();
  for (const node of level.nodes) {
    depth.set(node.id, node.kind === 'spawn' ? 0 : 1);
  }
  for (let pass = 0; pass < level.nodes.length; pass++) {
    let changed = false;
    for (const edge of level.edges) {
      const want = (depth.get(edge.from) ?? 0) + 1;
      if (want > (depth.get(edge.to) ?? 0)) {
        depth.set(edge.to, want);
        changed = true;
      }
    }
    if (!changed) break;
  }
  const layers = new Map<number, string[]>();
  for (const node of level.nodes) {
    const d = depth.get(node.id) ?? 0;
    if (!layers.has(d)) layers.set(d, []);
    layers.get(d)!.push(node.id);
  }
  const maxDepth = Math.max(...layers.keys());
  const positions = new Map<string, NodePosition>();
  for (const [d, ids] of layers) {
    ids.sort();
    ids.forEach((id, i) => {
      positions.set(id, {
        x: 60 + (d / Math.max(maxDepth, 1)) * (width - 120),
        y: ((i + 1) / (ids.length + 1)) * height,
      });
    });
  }
  return positions;
}

const COLOR_HEX: Record<string, string> = {
  red: '#d33',
  blue: '#36c',
  yellow: '#cc0',
  purple: '#90c',
};

function esc(value: string): string {
  return value.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/"/g, '&quot;');
}

export interface BoardMarks {
  arrows?: { node: string; color: string; arrow_id: string }[];
  highlightEdges?: string[];
}

/** Render the board as interactive SVG; elements carry data attributes for
 * the click handlers in main.ts. */
export function renderBoard(
  level: LevelSpec,
  placements: Placements,
  marks: BoardMarks = {},
  width = 640,
  height = 360,
): string {
  const pos = layout(level, width, height);
  const highlight = new Set(marks.highlightEdges ?? []);
  const parts: string[] = [
    `<svg viewBox="0 0 ${width} ${height}" class="board" xmlns="http://www.w3.org/2000/svg">`,
  ];
  for (const edge of level.edges) {
    const a = pos.get(edge.from)!;
    const b = pos.get(edge.to)!;
    const color = COLOR_HEX[edge.colors[0] ?? 'red'] ?? '#888';
    const sem = placements.semaphores[edge.id];
    const midX = (a.x + b.x) / 2;
    const midY = (a.y + b.y) / 2;
    parts.push(
      `<g class="edge${highlight.has(edge.id) ? ' highlight' : ''}" data-edge="${esc(edge.id)}">` +
        `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" stroke="${color}" ` +
        `stroke-width="${highlight.has(edge.id) ? 5 : 2.5}" marker-end="url(#arrowhead)"/>`,
    );
    if (edge.sem_eligible) {
      const fill = sem === undefined ? 'none' : sem === 'closed' ? '#c22' : '#2a2';
      parts.push(
        `<rect class="semaphore" data-edge="${esc(edge.id)}" data-state="${sem ?? 'none'}" ` +
          `x="${midX - 7}" y="${midY - 7}" width="14" height="14" rx="3" ` +
          `fill="${fill}" stroke="#333"/>`,
      );
    }
    parts.push('</g>');
  }
  for (const node of level.nodes) {
    const p = pos.get(node.id)!;
    const fill =
      node.kind === 'spawn' ? '#def' : node.kind === 'exit' ? COLOR_HEX[node.exit_color ?? 'red'] : '#fff';
    parts.push(
      `<g class="node" data-node="${esc(node.id)}">` +
        `<circle cx="${p.x}" cy="${p.y}" r="16" fill="${fill}" stroke="#333" stroke-width="1.5"/>` +
        `<text x="${p.x}" y="${p.y + 30}" text-anchor="middle" font-size="11">${esc(node.id)}</text>`,
    );
    if (node.signal_eligible) {
      const linked = placements.signals[node.id];
      parts.push(
        `<circle class="signal" data-node="${esc(node.id)}" cx="${p.x}" cy="${p.y - 22}" r="6" ` +
          `fill="${linked === undefined ? 'none' : '#fa0'}" stroke="#333"/>`,
      );
    }
    parts.push('</g>');
  }
  // link indicators: a dashed line from each signal to its semaphores
  for (const [nodeId, edges] of Object.entries(placements.signals)) {
    const from = pos.get(nodeId);
    if (!from) continue;
    for (const edgeId of edges) {
      const edge = level.edges.find((e) => e.id === edgeId);
      if (!edge) continue;
      const a = pos.get(edge.from)!;
      const b = pos.get(edge.to)!;
      parts.push(
        `<line class="link" data-node="${esc(nodeId)}" data-edge="${esc(edgeId)}" ` +
          `x1="${from.x}" y1="${from.y - 22}" x2="${(a.x + b.x) / 2}" y2="${(a.y + b.y) / 2}" ` +
          `stroke="#fa0" stroke-width="1.5" stroke-dasharray="4 3"/>`,
      );
    }
  }
  for (const arrow of marks.arrows ?? []) {
    const p = pos.get(arrow.node);
    if (!p) continue;
    parts.push(
      `<circle class="arrow" data-arrow="${esc(arrow.arrow_id)}" cx="${p.x}" cy="${p.y}" r="8" ` +
        `fill="${COLOR_HEX[arrow.color] ?? '#888'}" stroke="#000"/>`,
    );
  }
  parts.push(
    '<defs><marker id="arrowhead" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto">' +
      '<path d="M0,0 L8,4 L0,8 z" fill="#666"/></marker></defs>',
  );
  parts.push('</svg>');
  return parts.join('');
}
