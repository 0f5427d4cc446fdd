// Headless scripted sessions: the same code path as interactive play (store,
// queue, server-authoritative runs), driven by a fixed script. Used by the
// end-to-end tests and handy for demos.

import { ApiClient } from './api.js';
import { ClientStore, action } from './store.js';
import type { QueueOptions } from './queue.js';
import type { ReferenceEntryWire } from './types.js';

export interface ScriptedResult {
  sessionId: string;
  entry: ReferenceEntryWire;
  solved: boolean;
}

/** Play straightline start to finish: one test run, then submit + finalize. */
export async function playStraightline(
  client: ApiClient,
  playerId: string,
  queueOptions: QueueOptions = {},
): Promise<ScriptedResult> {
  const store = await ClientStore.open(client, 'straightline', playerId, queueOptions);
  const run = await store.runTest(1);
  if (run.outcome !== 'success' && run.outcome !== 'timeout') {
    throw new Error(`unexpected straightline outcome ${run.outcome}`);
  }
  const verdict = await store.submit();
  const entry = await store.finish();
  return { sessionId: store.sessionId, entry, solved: verdict.solved };
}

/** Play merge with the known-good coordination: semaphore + signal + link. */
export async function playMergeSolution(
  client: ApiClient,
  playerId: string,
  queueOptions: QueueOptions = {},
): Promise<ScriptedResult> {
  const store = await ClientStore.open(client, 'merge', playerId, queueOptions);
  store.applyEdit(action('place_semaphore', 'eb'));
  store.applyEdit(action('place_signal', 'x'));
  store.applyEdit(action('link_signal', null, { node: 'x', edge: 'eb' }));
  await store.runTest(7);
  const verdict = await store.submit();
  const entry = await store.finish();
  return { sessionId: store.sessionId, entry, solved: verdict.solved };
}
