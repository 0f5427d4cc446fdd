// Page bootstrap: level picker, play surface, and the insight dashboard.

import { ApiClient, ApiError } from './api.js';
import { renderBoard } from './board.js';
import { renderDashboard } from './dashboard.js';
import { ClientStore, action } from './store.js';
import type { RunResultWire, SystemBody } from './types.js';

const LEVEL_IDS = ['straightline', 'merge', 'critical_section'];

type Tool = 'semaphore' | 'signal' | 'link';

interface Ui {
  client: ApiClient;
  store: ClientStore | null;
  tool: Tool;
  pendingLinkNode: string | null;
}

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function banner(message: string, kind: 'info' | 'warn' | 'error' = 'info'): void {
  const box = $('banner');
  box.textContent = message;
  box.className = `banner ${kind}`;
}

function drawBoard(ui: Ui, marks = {}): void {
  if (!ui.store) return;
  $('board-box').innerHTML = renderBoard(ui.store.level, ui.store.placements, marks);
  $('board-box')
    .querySelectorAll<SVGElement>('.edge, .semaphore')
    .forEach((elem) => {
      elem.addEventListener('click', () => onEdgeClick(ui, elem.dataset.edge!));
    });
  $('board-box')
    .querySelectorAll<SVGElement>('.node, .signal')
    .forEach((elem) => {
      const node = elem.dataset.node;
      if (node) elem.addEventListener('click', () => onNodeClick(ui, node));
    });
}

function tryEdit(ui: Ui, body: ReturnType<typeof action>): void {
  if (!ui.store) return;
  try {
    ui.store.applyEdit(body);
    drawBoard(ui);
    banner(`${body.kind} ok`, 'info');
  } catch (err) {
    banner(String(err instanceof Error ? err.message : err), 'warn');
  }
}

function onEdgeClick(ui: Ui, edgeId: string): void {
  if (!ui.store) return;
  if (ui.tool === 'semaphore') {
    const has = ui.store.placements.semaphores[edgeId] !== undefined;
    tryEdit(ui, action(has ? 'remove_semaphore' : 'place_semaphore', edgeId));
  } else if (ui.tool === 'link' && ui.pendingLinkNode) {
    const node = ui.pendingLinkNode;
    ui.pendingLinkNode = null;
    const linked = ui.store.placements.signals[node]?.includes(edgeId);
    tryEdit(ui, action(linked ? 'unlink_signal' : 'link_signal', null, { node, edge: edgeId }));
  }
}

function onNodeClick(ui: Ui, nodeId: string): void {
  if (!ui.store) return;
  if (ui.tool === 'signal') {
    const has = ui.store.placements.signals[nodeId] !== undefined;
    tryEdit(ui, action(has ? 'remove_signal' : 'place_signal', nodeId));
  } else if (ui.tool === 'link') {
    ui.pendingLinkNode = nodeId;
    banner(`linking from ${nodeId}: click a semaphore edge`, 'info');
  }
}

/** Animate the event timeline of a finished run over its tick clock. */
async function playback(ui: Ui, run: RunResultWire): Promise<void> {
  const byTick = new Map<number, SystemBody[]>();
  for (const ev of run.events) {
    const tick = (ev.detail.tick as number) ?? 0;
    if (!byTick.has(tick)) byTick.set(tick, []);
    byTick.get(tick)!.push(ev);
  }
  for (let tick = 0; tick <= run.ticks; tick++) {
    $('tick-clock').textContent = `tick ${tick}/${run.ticks}`;
    const events = byTick.get(tick) ?? [];
    for (const ev of events) {
      if (ev.kind === 'delivered') banner(`arrow ${ev.detail.arrow_id} delivered`, 'info');
      if (ev.kind === 'collision') banner(`collision at ${ev.detail.node_id}`, 'error');
      if (ev.kind === 'wrong_exit') banner(`wrong exit at ${ev.detail.node_id}`, 'error');
    }
    await new Promise((r) => setTimeout(r, 120));
  }
  drawBoard(ui, {
    arrows: run.final_state.arrows.filter((a) => !a.delivered),
  });
  banner(`run finished: ${run.outcome} in ${run.ticks} ticks`, run.outcome === 'success' ? 'info' : 'warn');
}

async function startSession(ui: Ui): Promise<void> {
  const levelId = ($('level-select') as HTMLSelectElement).value;
  const playerId = ($('player-input') as HTMLInputElement).value || 'anonymous';
  try {
    ui.store = await ClientStore.open(ui.client, levelId, playerId, {
      onStateChange: (state, detail) => {
        if (state === 'offline') banner('offline: buffering events locally', 'warn');
        if (state === 'error') banner(`sync error: ${detail ?? ''}`, 'error');
        if (state === 'online') banner('connected', 'info');
      },
    });
    drawBoard(ui);
    banner(`session ${ui.store.sessionId.slice(0, 8)}… on ${levelId}`, 'info');
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err), 'error');
  }
}

async function showDashboard(ui: Ui, sessionId: string): Promise<void> {
  try {
    const payload = await ui.client.getAnalytics(sessionId);
    await renderDashboard(payload, $('dashboard'), (sid) => ui.client.getSession(sid));
  } catch (err) {
    if (err instanceof ApiError && err.code === 'not_finalized') {
      const box = $('dashboard');
      box.innerHTML = '<p>This session is not finalized yet.</p>';
      const button = document.createElement('button');
      button.textContent = 'Finalize now';
      button.addEventListener('click', async () => {
        await ui.client.finalize(sessionId);
        await showDashboard(ui, sessionId);
      });
      box.append(button);
      return;
    }
    banner(String(err), 'error');
  }
}

export function boot(): void {
  const base = new URLSearchParams(location.search).get('api') ?? 'http://127.0.0.1:8347';
  const ui: Ui = { client: new ApiClient(base), store: null, tool: 'semaphore', pendingLinkNode: null };

  const select = $('level-select') as HTMLSelectElement;
  for (const id of LEVEL_IDS) {
    const option = document.createElement('option');
    option.value = option.textContent = id;
    select.append(option);
  }

  document.querySelectorAll<HTMLInputElement>('input[name=tool]').forEach((radio) => {
    radio.addEventListener('change', () => {
      ui.tool = radio.value as Tool;
      ui.pendingLinkNode = null;
    });
  });

  $('start-btn').addEventListener('click', () => void startSession(ui));
  $('reset-btn').addEventListener('click', () => ui.store && tryEdit(ui, action('reset_board')));
  $('test-btn').addEventListener('click', async () => {
    if (!ui.store) return;
    const seed = BigInt.asUintN(53, BigInt(Math.floor(Math.random() * Number.MAX_SAFE_INTEGER)));
    const run = await ui.store.runTest(Number(seed));
    await playback(ui, run);
  });
  $('submit-btn').addEventListener('click', async () => {
    if (!ui.store) return;
    const verdict = await ui.store.submit();
    banner(`verification: ${verdict.seeds_passed}/${verdict.seeds_run} seeds passed`, verdict.solved ? 'info' : 'warn');
    const entry = await ui.store.finish();
    banner(`finalized: solved=${entry.solved}`, 'info');
    await showDashboard(ui, ui.store.sessionId);
  });
  $('dash-btn').addEventListener('click', () => {
    const sid = ($('session-input') as HTMLInputElement).value || ui.store?.sessionId;
    if (sid) void showDashboard(ui, sid);
  });
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot();
}
