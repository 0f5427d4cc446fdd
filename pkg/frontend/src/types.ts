// Wire types mirroring the server's canonical JSON formats.

export type Color = 'red' | 'blue' | 'yellow' | 'purple';
export type SemaphoreState = 'open' | 'closed';
export type Outcome = 'success' | 'collision' | 'wrong_exit' | 'timeout';

export interface LevelNode {
  id: string;
  kind: 'track' | 'spawn' | 'exit';
  signal_eligible: boolean;
  exit_color: Color | null;
}

export interface LevelEdge {
  id: string;
  from: string;
  to: string;
  colors: Color[];
  sem_eligible: boolean;
}

export interface LevelSpec {
  level_id: string;
  nodes: LevelNode[];
  edges: LevelEdge[];
  spawn_schedule: { tick: number; spawn_node: string; color: Color; arrow_id: string }[];
  defaults: Record<string, unknown>;
}

export interface Placements {
  semaphores: Record<string, SemaphoreState>;
  signals: Record<string, string[]>;
}

export type ActionKind =
  | 'place_semaphore'
  | 'remove_semaphore'
  | 'place_signal'
  | 'remove_signal'
  | 'link_signal'
  | 'unlink_signal'
  | 'start_test'
  | 'submit_solution'
  | 'reset_board';

export interface ActionBody {
  type: 'action';
  kind: ActionKind;
  target: string | null;
  link: { node: string; edge: string } | null;
  seed: number | null;
}

export interface SystemBody {
  type: 'system';
  kind: string;
  detail: Record<string, unknown>;
}

export type EventBody = ActionBody | SystemBody;

export interface GameEventWire {
  seq: number;
  t_ms: number;
  body: EventBody;
}

export interface BoardStateWire {
  level_id: string;
  tick: number;
  arrows: { arrow_id: string; color: Color; node: string; delivered: boolean }[];
  semaphores: Record<string, SemaphoreState>;
  signals: Record<string, string[]>;
  pending_spawns: LevelSpec['spawn_schedule'];
  phase: 'edit' | 'running' | 'terminal';
  outcome: Outcome | null;
  idle_ticks: number;
}

export interface RunResultWire {
  outcome: Outcome;
  ticks: number;
  events: SystemBody[];
  final_state: BoardStateWire;
}

export interface VerifyResultWire {
  seeds_run: number;
  seeds_passed: number;
  solved: boolean;
  per_seed: { outcome: Outcome; seed: number; ticks: number }[];
}

export interface ReferenceEntryWire {
  session_id: string;
  object_key: string;
  player_id: string;
  level_id: string;
  started_at: number;
  duration_ms: number;
  solved: boolean;
  action_count: number;
  test_run_count: number;
  trace_signature: number;
  action_token_digest: string;
  schema_version: number;
}

export interface MetricsWire {
  action_count: number;
  action_counts_by_kind: Record<string, number>;
  board_state_trajectory_len: number;
  duration_ms: number;
  final_placements: string[];
  first_test_seq: number | null;
  solved: boolean;
  test_run_count: number;
}

export interface PeerWire {
  peer_session_id: string;
  peer_player_id: string;
  distance: number;
  shared_level: string;
}

export interface RecommendationWire {
  kind: string;
  target: string | null;
  support: number;
  message: string;
}

export interface PromptWire {
  rule_id: string;
  message: string;
  trigger_values: Record<string, unknown>;
}

export type PanelKind = 'action_timeline' | 'metric_cards' | 'trace_overlay' | 'peer_comparison';

export interface VizPanelWire {
  panel_kind: PanelKind;
  data_ref: Record<string, unknown>;
}

export interface AnalyticsPayloadWire {
  payload_version: number;
  session_id: string;
  generated_at: number;
  metrics: MetricsWire;
  peers: PeerWire[];
  recommendations: RecommendationWire[];
  prompts: PromptWire[];
  viz: { panels: VizPanelWire[] };
}

export interface StoredLogWire {
  header: {
    session_id: string;
    player_id: string;
    level_id: string;
    started_at: number;
    schema_version: number;
  };
  events: GameEventWire[];
  snapshots: { at_seq: number; state_hash: number; state: BoardStateWire }[];
  enrichments: unknown[];
  finalized: boolean;
  derived?: Record<string, unknown>;
}
