// Insight dashboard: renders the analytics payload, panel by panel, in the
// order the payload's visualization guide dictates. Everything draws from
// the payload JSON alone; the only optional network access is fetching the
// top peer's trace for the overlay, injected as a fetcher so a committed
// sample payload renders with no backend at all.

import type {
  AnalyticsPayloadWire,
  StoredLogWire,
  VizPanelWire,
} from './types.js';

export type PeerTraceFetcher = (sessionId: string) => Promise<StoredLogWire>;

function el(tag: string, className: string, html?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (html !== undefined) node.innerHTML = html;
  return node;
}

function esc(value: unknown): string {
  return String(value)
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;');
}

function renderTimeline(panel: VizPanelWire): HTMLElement {
  const timeline = (panel.data_ref.timeline ?? []) as { seq: number; t_ms: number; token: string }[];
  const box = el('section', 'panel action-timeline', '<h3>Action timeline</h3>');
  if (timeline.length === 0) {
    box.append(el('p', 'empty', 'No player actions recorded.'));
    return box;
  }
  const t0 = timeline[0]!.t_ms;
  const span = Math.max(timeline[timeline.length - 1]!.t_ms - t0, 1);
  const width = 600;
  const marks = timeline
    .map((item) => {
    const x = 20 + ((item.t_ms - t0) / span) * (width - 40);
      return (
        `<g class="tick" data-seq="${item.seq}">` +
        `<line x1="${x}" y1="18" x2="${x}" y2="34" stroke="#666"/>` +
        `<text x="${x}" y="14" text-anchor="middle" font-size="12">${esc(item.token)}</text></g>`
      );
    })
    .join('');
  box.append(
    el(
      'div',
      'strip',
      `<svg viewBox="0 0 ${width} 44" xmlns="http://www.w3.org/2000/svg">` +
        `<line x1="16" y1="26" x2="${width - 16}" y2="26" stroke="#bbb"/>${marks}</svg>`,
    ),
  );
  return box;
}

function renderMetricCards(payload: AnalyticsPayloadWire): HTMLElement {
  const m = payload.metrics;
  const box = el('section', 'panel metric-cards', '<h3>Session metrics</h3>');
  const cards: [string, string][] = [
    ['actions', String(m.action_count)],
    ['test runs', String(m.test_run_count)],
    ['duration', `${(m.duration_ms / 1000).toFixed(1)}s`],
    ['solved', m.solved ? 'yes' : 'no'],
    ['trace length', String(m.board_state_trajectory_len)],
  ];
  const grid = el('div', 'cards');
  for (const [label, value] of cards) {
    grid.append(el('div', 'card', `<div class="value">${esc(value)}</div><div class="label">${esc(label)}</div>`));
  }
  box.append(grid);
  return box;
}

function traceCells(trace: number[], shared: Set<number>): string {
  return trace
    .map((h) => {
      const match = shared.has(h) ? ' match' : '';
      return `<span class="cell${match}" title="${esc(h)}">${esc(String(h).slice(0, 4))}</span>`;
    })
    .join('');
}

async function renderTraceOverlay(
  panel: VizPanelWire,
  fetchPeer: PeerTraceFetcher | null,
): Promise<HTMLElement> {
  const selfTrace = (panel.data_ref.self_trace ?? []) as number[];
  const peerIds = (panel.data_ref.peer_session_ids ?? []) as string[];
  const box = el('section', 'panel trace-overlay', '<h3>Board-state trace</h3>');
  let peerTrace: number[] = [];
  const peerId = peerIds[0];
  if (peerId !== undefined && fetchPeer !== null) {
    try {
      const peerLog = await fetchPeer(peerId);
      peerTrace = peerLog.snapshots.map((s) => s.state_hash);
    } catch {
      box.append(el('p', 'note', 'Peer trace unavailable.'));
    }
  }
  const shared = new Set(peerTrace.filter((h) => selfTrace.includes(h)));
  box.append(el('div', 'trace self', `<span class="who">you</span>${traceCells(selfTrace, shared)}`));
  if (peerTrace.length > 0) {
    box.append(el('div', 'trace peer', `<span class="who">peer</span>${traceCells(peerTrace, shared)}`));
    box.append(el('p', 'note', 'Shared board states are highlighted.'));
  }
  return box;
}

function renderPeers(payload: AnalyticsPayloadWire): HTMLElement {
  const box = el('section', 'panel peer-comparison', '<h3>Similar peers</h3>');
  const list = el('ul', 'peers');
  for (const peer of payload.peers) {
    list.append(
      el(
        'li',
        'peer',
        `<span class="distance">${peer.distance.toFixed(2)}</span> ` +
          `<span class="player">${esc(peer.peer_player_id)}</span> ` +
          `<button class="view-peer" data-session="${esc(peer.peer_session_id)}">view</button>`,
      ),
    );
  }
  box.append(list);
  return box;
}

function renderRecommendations(payload: AnalyticsPayloadWire): HTMLElement {
  const box = el('section', 'panel recommendations', '<h3>Recommendations</h3>');
  if (payload.recommendations.length === 0) {
    box.append(el('p', 'empty', 'No recommendations: this board verified clean.'));
    return box;
  }
  for (const rec of payload.recommendations) {
    const support = `${Math.round(rec.support * 100)}%`;
    box.append(
      el(
        'div',
        `card rec ${rec.kind}`,
        `<div class="head"><span class="support">${support}</span>` +
          (rec.target ? `<span class="target" data-edge="${esc(rec.target)}">${esc(rec.target)}</span>` : '') +
          `</div><p>${esc(rec.message)}</p>`,
      ),
    );
  }
  return box;
}

function renderPrompts(payload: AnalyticsPayloadWire): HTMLElement {
  const box = el('section', 'panel prompts', '<h3>Reflect</h3>');
  for (const prompt of payload.prompts) {
    box.append(el('div', `card prompt ${prompt.rule_id}`, `<p>${esc(prompt.message)}</p>`));
  }
  if (payload.prompts.length === 0) box.append(el('p', 'empty', 'Nothing to reflect on yet.'));
  return box;
}

/** Render the full dashboard into `container` (cleared first). Panels appear
 * in guide order; recommendation and prompt cards follow. */
export async function renderDashboard(
  payload: AnalyticsPayloadWire,
  container: HTMLElement,
  fetchPeer: PeerTraceFetcher | null = null,
): Promise<void> {
  container.innerHTML = '';
  container.append(
    el('header', 'dash-head', `<h2>Session ${esc(payload.session_id.slice(0, 8))}…</h2>`),
  );
  for (const panel of payload.viz.panels) {
    switch (panel.panel_kind) {
      case 'action_timeline':
        container.append(renderTimeline(panel));
        break;
      case 'metric_cards':
        container.append(renderMetricCards(payload));
        break;
      case 'trace_overlay':
        container.append(await renderTraceOverlay(panel, fetchPeer));
        break;
      case 'peer_comparison':
        container.append(renderPeers(payload));
        break;
    }
  }
  container.append(renderRecommendations(payload));
  container.append(renderPrompts(payload));
}
