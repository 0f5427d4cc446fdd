// @vitest-environment happy-dom
// End-to-end against a live backend (OPSAI_BASE_URL); skipped otherwise.
//
//   opsai serve --root /tmp/store &
//   OPSAI_BASE_URL=http://127.0.0.1:8347 npm run e2e

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { renderDashboard } from '../src/dashboard.js';
import { playStraightline, playMergeSolution } from '../src/scripted.js';
import { ClientStore } from '../src/store.js';
import type { FetchLike } from '../src/api.js';

const BASE = process.env.OPSAI_BASE_URL;

const fastQueue = { flushIntervalMs: 20, backoffBaseMs: 20, backoffCapMs: 100 };

describe.skipIf(!BASE)('end-to-end against a running backend', () => {
  const run = `${Date.now().toString(36)}-${Math.floor(Math.random() * 1e6).toString(36)}`;

  it('plays straightline to completion and the session becomes queryable', async () => {
    const client = new ApiClient(BASE!);
    const result = await playStraightline(client, `e2e-${run}-one`, fastQueue);
    expect(result.solved).toBe(true);
    expect(result.entry.solved).toBe(true);

    const entries = await client.query({ player: `e2e-${run}-one`, level: 'straightline' });
    expect(entries.map((e) => e.session_id)).toContain(result.sessionId);

    // stored log seq audit: contiguous from 0, each seq exactly once
    const log = await client.getSession(result.sessionId);
    expect(log.events.map((e) => e.seq)).toEqual([...log.events.keys()]);
    expect(log.finalized).toBe(true);
  });

  it('a second identical session shows up as a distance-0.00 peer', async () => {
    const client = new ApiClient(BASE!);
    const first = await playStraightline(client, `e2e-${run}-alpha`, fastQueue);
    const second = await playStraightline(client, `e2e-${run}-beta`, fastQueue);

    const payload = await client.getAnalytics(first.sessionId);
    const twin = payload.peers.find((p) => p.peer_session_id === second.sessionId);
    expect(twin).toBeDefined();
    expect(twin!.distance).toBe(0);
    expect(payload.viz.panels.map((p) => p.panel_kind)).toContain('peer_comparison');

    const box = document.createElement('div');
    document.body.append(box);
    await renderDashboard(payload, box, (sid) => client.getSession(sid));
    const distances = [...box.querySelectorAll('.peer .distance')].map((n) => n.textContent);
    expect(distances).toContain('0.00');
  });

  it('delivers every event exactly once across a simulated outage', async () => {
    // Fail one in three event posts: half before they reach the server
    // (outage), half after persisting (lost ack). The queue must resync.
    let calls = 0;
    const flaky: FetchLike = async (input, init) => {
      if (typeof input === 'string' && input.includes('/events')) {
        calls += 1;
        if (calls % 3 === 1) {
          if (calls % 2 === 0) {
            await fetch(input, init); // lands server-side, ack is lost
          }
          throw new TypeError('simulated network outage');
        }
      }
      return fetch(input, init);
    };
    const client = new ApiClient(BASE!, flaky);
    const result = await playMergeSolution(client, `e2e-${run}-flaky`, {
      ...fastQueue,
      flushIntervalMs: 5,
    });
    expect(result.solved).toBe(true);

    const audit = new ApiClient(BASE!);
    const log = await audit.getSession(result.sessionId);
    const seqs = log.events.map((e) => e.seq);
    expect(seqs).toEqual([...log.events.keys()]); // contiguous, no dupes
    expect(log.events.filter((e) => e.body.type === 'action').length).toBeGreaterThanOrEqual(5);
  });

  it('dashboard offers finalize for an unfinalized session', async () => {
    const client = new ApiClient(BASE!);
    const store = await ClientStore.open(client, 'merge', `e2e-${run}-linger`, fastQueue);
    store.applyEdit({ type: 'action', kind: 'place_semaphore', target: 'eb', link: null, seed: null });
    await store.queue.drain();

    const err = await client.getAnalytics(store.sessionId).catch((e) => e);
    expect(err.code).toBe('not_finalized');
  });
});
