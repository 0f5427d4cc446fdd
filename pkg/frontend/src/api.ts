// Thin typed client over the service's HTTP surface.

import type {
  AnalyticsPayloadWire,
  GameEventWire,
  LevelSpec,
  Placements,
  ReferenceEntryWire,
  RunResultWire,
  StoredLogWire,
  VerifyResultWire,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseFor(response: Response): Promise<never> {
  let code = 'internal';
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.code === 'string') code = body.code;
    if (typeof body.detail === 'string') detail = body.detail;
  } catch {
    // non-JSON error body; keep defaults
  }
  throw new ApiError(response.status, code, detail);
}

export function eventsToNdjson(events: GameEventWire[]): string {
  return events.map((e) => JSON.stringify(e)).join('\n') + '\n';
}

export class ApiClient {
  constructor(
    public baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
  }

  private async request<T>(method: string, path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, { method, ...init });
    if (!response.ok) await raiseFor(response);
    return (await response.json()) as T;
  }

  private json<T>(method: string, path: string, body: unknown): Promise<T> {
    return this.request<T>(method, path, {
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  healthz(): Promise<{ ok: boolean }> {
    return this.request('GET', '/v1/healthz');
  }

  createSession(body: {
    player_id: string;
    level_id: string;
    session_id?: string;
    started_at?: number;
  }): Promise<{ session_id: string; started_at: number }> {
    return this.json('POST', '/v1/sessions', body);
  }

  appendEvents(
    sessionId: string,
    events: GameEventWire[],
  ): Promise<{ accepted_through_seq: number }> {
    return this.request('POST', `/v1/sessions/${sessionId}/events`, {
      headers: { 'content-type': 'application/x-ndjson' },
      body: eventsToNdjson(events),
    });
  }

  finalize(sessionId: string): Promise<ReferenceEntryWire> {
    return this.request('POST', `/v1/sessions/${sessionId}/finalize`);
  }

  getSession(sessionId: string): Promise<StoredLogWire> {
    return this.request('GET', `/v1/sessions/${sessionId}`);
  }

  query(params: {
    player?: string;
    level?: string;
    solved?: boolean;
    limit?: number;
  }): Promise<ReferenceEntryWire[]> {
    const search = new URLSearchParams();
    if (params.player !== undefined) search.set('player', params.player);
    if (params.level !== undefined) search.set('level', params.level);
    if (params.solved !== undefined) search.set('solved', String(params.solved));
    if (params.limit !== undefined) search.set('limit', String(params.limit));
    const qs = search.toString();
    return this.request('GET', '/v1/sessions' + (qs ? `?${qs}` : ''));
  }

  getAnalytics(sessionId: string, k?: number): Promise<AnalyticsPayloadWire> {
    const suffix = k === undefined ? '' : `?k=${k}`;
    return this.request('GET', `/v1/sessions/${sessionId}/analytics${suffix}`);
  }

  getLevel(levelId: string): Promise<LevelSpec> {
    return this.request('GET', `/v1/levels/${levelId}`);
  }

  simulate(body: {
    level_id: string;
    placements: Placements;
    seed: number;
    cfg?: Record<string, unknown>;
  }): Promise<RunResultWire> {
    return this.json('POST', '/v1/simulate', body);
  }

  verify(body: {
    level_id: string;
    placements: Placements;
    cfg?: Record<string, unknown>;
  }): Promise<VerifyResultWire> {
    return this.json('POST', '/v1/verify', body);
  }
}
