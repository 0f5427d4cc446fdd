// Client-side store: the level, the edit board, the outgoing event queue,
// and the last analytics payload. The server stays authoritative for all
// game rules; edits here only maintain the placement maps that /v1/simulate
// and /v1/verify consume, with just enough local validation for good UX.

import { ApiClient } from './api.js';
import { EventQueue, type QueueOptions } from './queue.js';
import type {
  ActionBody,
  ActionKind,
  AnalyticsPayloadWire,
  LevelSpec,
  Placements,
  ReferenceEntryWire,
  RunResultWire,
  SystemBody,
  VerifyResultWire,
} from './types.js';

export function action(
  kind: ActionKind,
  target: string | null = null,
  link: { node: string; edge: string } | null = null,
  seed: number | null = null,
): ActionBody {
  return { type: 'action', kind, target, link, seed };
}

export function emptyPlacements(): Placements {
  return { semaphores: {}, signals: {} };
}

export function clonePlacements(p: Placements): Placements {
  return {
    semaphores: { ...p.semaphores },
    signals: Object.fromEntries(Object.entries(p.signals).map(([k, v]) => [k, [...v]])),
  };
}

export class ClientStore {
  level: LevelSpec;
  placements: Placements = emptyPlacements();
  lastConfirmed: Placements | null = null; // placements echoed by the last run
  lastRun: RunResultWire | null = null;
  lastPayload: AnalyticsPayloadWire | null = null;
  queue: EventQueue;

  constructor(
    private client: ApiClient,
    level: LevelSpec,
    public sessionId: string,
    startedAt: number,
    queueOptions: QueueOptions = {},
  ) {
    this.level = level;
    this.queue = new EventQueue(client, sessionId, startedAt, queueOptions);
  }

  static async open(
    client: ApiClient,
    levelId: string,
    playerId: string,
    queueOptions: QueueOptions = {},
  ): Promise<ClientStore> {
    const level = await client.getLevel(levelId);
    const created = await client.createSession({ player_id: playerId, level_id: levelId });
    return new ClientStore(client, level, created.session_id, created.started_at, queueOptions);
  }

  get connection() {
    return this.queue.state;
  }

  private edge(id: string) {
    const edge = this.level.edges.find((e) => e.id === id);
    if (!edge) throw new Error(`unknown edge ${id}`);
    return edge;
  }

  private node(id: string) {
    const node = this.level.nodes.find((n) => n.id === id);
    if (!node) throw new Error(`unknown node ${id}`);
    return node;
  }

  /** Apply one edit locally and record it as a telemetry event. */
  applyEdit(body: ActionBody): void {
    const { kind, target, link } = body;
    const p = this.placements;
    switch (kind) {
      case 'place_semaphore': {
        const edge = this.edge(target!);
        if (!edge.sem_eligible) throw new Error(`edge ${edge.id} is not semaphore-eligible`);
        if (p.semaphores[edge.id]) throw new Error(`edge ${edge.id} already has a semaphore`);
        p.semaphores[edge.id] = 'closed';
        break;
      }
      case 'remove_semaphore': {
        if (!p.semaphores[target!]) throw new Error(`no semaphore on ${target}`);
        delete p.semaphores[target!];
        for (const node of Object.keys(p.signals)) {
          p.signals[node] = p.signals[node]!.filter((e) => e !== target);
        }
        break;
      }
      case 'place_signal': {
        const node = this.node(target!);
        if (!node.signal_eligible) throw new Error(`node ${node.id} is not signal-eligible`);
        if (p.signals[node.id]) throw new Error(`node ${node.id} already has a signal`);
        p.signals[node.id] = [];
        break;
      }
      case 'remove_signal': {
        if (!p.signals[target!]) throw new Error(`no signal on ${target}`);
        delete p.signals[target!];
        break;
      }
      case 'link_signal': {
        const links = p.signals[link!.node];
        if (!links) throw new Error(`no signal on ${link!.node}`);
        if (!p.semaphores[link!.edge]) throw new Error(`no semaphore on ${link!.edge}`);
        if (links.includes(link!.edge)) throw new Error('already linked');
        links.push(link!.edge);
        links.sort();
        break;
      }
      case 'unlink_signal': {
        const links = p.signals[link!.node];
        if (!links || !links.includes(link!.edge)) throw new Error('no such link');
        p.signals[link!.node] = links.filter((e) => e !== link!.edge);
        break;
      }
      case 'reset_board': {
        this.placements = emptyPlacements();
        break;
      }
      default:
        throw new Error(`not an edit action: ${kind}`);
    }
    this.queue.push(body);
  }

  /** One server-authoritative test run; returns the result for playback. */
  async runTest(seed: number): Promise<RunResultWire> {
    const sent = clonePlacements(this.placements);
    this.queue.push(action('start_test', null, null, seed));
    const run = await this.client.simulate({
      level_id: this.level.level_id,
      placements: sent,
      seed,
    });
    for (const ev of run.events) this.queue.push(ev as SystemBody);
    this.lastRun = run;
    this.lastConfirmed = sent; // board rendered after a run = what the server ran
    return run;
  }

  /** Submit for verification; record the verdict event. */
  async submit(): Promise<VerifyResultWire> {
    this.queue.push(action('submit_solution'));
    const verdict = await this.client.verify({
      level_id: this.level.level_id,
      placements: clonePlacements(this.placements),
    });
    this.queue.push({
      type: 'system',
      kind: 'solution_verified',
      detail: { seeds_passed: verdict.seeds_passed, seeds_run: verdict.seeds_run },
    });
    return verdict;
  }

  /** Drain the queue and finalize the session server-side. */
  async finish(): Promise<ReferenceEntryWire> {
    await this.queue.drain();
    return this.client.finalize(this.sessionId);
  }

  async fetchAnalytics(k?: number): Promise<AnalyticsPayloadWire> {
    this.lastPayload = await this.client.getAnalytics(this.sessionId, k);
    return this.lastPayload;
  }
}
