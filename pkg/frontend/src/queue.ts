// Ordered event delivery with buffering, periodic flush, and resync.
//
// Exactly-once is achieved through the server's seq contiguity: batches are
// retried until acknowledged, and a seq_gap conflict whose expected seq lies
// beyond the batch start means a previous attempt landed but its ack was
// lost, so the overlap is dropped instead of resent.

import { ApiClient, ApiError } from './api.js';
import type { EventBody, GameEventWire } from './types.js';

export type ConnectionState = 'online' | 'offline' | 'error';

export interface QueueOptions {
  flushIntervalMs?: number; // default 1000
  maxBatch?: number; // default 20
  backoffBaseMs?: number; // default 500
  backoffCapMs?: number; // default 8000
  onStateChange?: (state: ConnectionState, detail?: string) => void;
}

export class EventQueue {
  private events: GameEventWire[] = []; // not yet acknowledged
  private nextSeq = 0;
  private lastT: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: Promise<void> | null = null;
  private attempt = 0;
  private readonly flushIntervalMs: number;
  private readonly maxBatch: number;
  private readonly backoffBaseMs: number;
  private readonly backoffCapMs: number;
  private readonly onStateChange: (state: ConnectionState, detail?: string) => void;

  state: ConnectionState = 'online';
  ackedThrough = -1;

  constructor(
    private client: ApiClient,
    public sessionId: string,
    startedAt: number,
    options: QueueOptions = {},
    private now: () => number = () => Date.now(),
  ) {
    this.lastT = startedAt;
    this.flushIntervalMs = options.flushIntervalMs ?? 1000;
    this.maxBatch = options.maxBatch ?? 20;
    this.backoffBaseMs = options.backoffBaseMs ?? 500;
    this.backoffCapMs = options.backoffCapMs ?? 8000;
    this.onStateChange = options.onStateChange ?? (() => undefined);
  }

  get pendingCount(): number {
    return this.events.length;
  }

  /** Stamp, buffer, and schedule delivery of one event body. */
  push(body: EventBody): GameEventWire {
    const t = Math.max(this.now(), this.lastT); // monotonic, >= started_at
    this.lastT = t;
    const event: GameEventWire = { seq: this.nextSeq++, t_ms: t, body };
    this.events.push(event);
    if (this.events.length >= this.maxBatch) {
      void this.flush();
    } else {
      this.armTimer();
    }
    return event;
  }

  private armTimer(): void {
    if (this.timer !== null) return;
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.flush();
    }, this.flushIntervalMs);
  }

  private setState(state: ConnectionState, detail?: string): void {
    if (state !== this.state) {
      this.state = state;
      this.onStateChange(state, detail);
    }
  }

  /** Drain the buffer; resolves when everything buffered so far is acked.
   * Concurrent callers share the in-flight attempt instead of stacking. */
  flush(): Promise<void> {
    if (this.inflight === null) {
      this.inflight = this.flushLoop().finally(() => {
        this.inflight = null;
      });
    }
    return this.inflight;
  }

  private async flushLoop(): Promise<void> {
    try {
      while (this.events.length > 0 && this.state !== 'error') {
        const batch = this.events.slice(0, this.maxBatch);
        try {
          const ack = await this.client.appendEvents(this.sessionId, batch);
          this.acceptThrough(ack.accepted_through_seq);
          this.attempt = 0;
          this.setState('online');
        } catch (err) {
          if (err instanceof ApiError && err.code === 'seq_gap') {
            const first = batch[0]!;
            const expected = parseExpectedSeq(err.detail);
            if (expected !== null && expected > first.seq) {
              // a lost ack: the server already holds a prefix of this batch
              this.acceptThrough(expected - 1);
              this.attempt = 0;
              continue;
            }
            this.setState('error', `out of sync with server: ${err.detail}`);
            return;
          }
          if (err instanceof ApiError) {
            this.setState('error', `${err.code}: ${err.detail}`);
            return;
          }
          // network failure: back off and retry, keeping the buffer intact
          this.setState('offline', String(err));
          const delay = Math.min(
            this.backoffBaseMs * 2 ** this.attempt++,
            this.backoffCapMs,
          );
          await new Promise((resolve) => setTimeout(resolve, delay));
        }
      }
    } finally {
      if (this.events.length > 0 && this.state !== 'error') this.armTimer();
    }
  }

  private acceptThrough(seq: number): void {
    this.ackedThrough = Math.max(this.ackedThrough, seq);
    this.events = this.events.filter((e) => e.seq > this.ackedThrough);
  }

  /** Flush everything and stop the timer; used before finalize. */
  async drain(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    while (this.events.length > 0) {
      if (this.state === 'error') {
        throw new Error('event queue is out of sync; cannot drain');
      }
      await this.flush();
    }
  }
}

export function parseExpectedSeq(detail: string): number | null {
  const match = /expected seq (\d+)/.exec(detail);
  return match ? Number(match[1]) : null;
}
