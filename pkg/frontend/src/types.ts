/** JSON contract of the tuning service (all values in physical units). */

export interface BoxBounds {
  x_min: number[];
  x_max: number[];
}

export interface AskResponse {
  x_next: number[];
  params: Record<string, number>;
  weights: number[] | null;
  losses: number[] | null;
  iteration: number;
  suggested_start: boolean;
  surrogate_value: number | null;
  phase: string;
}

export interface TellResponse {
  phase: string;
  n_observations: number;
  best_so_far: { x: number[]; y: number } | null;
}

export interface HistoryRecord {
  x: number[];
  y: number;
  failure: boolean;
  weights: number[] | null;
  losses: number[] | null;
  surrogate_value: number | null;
}

export interface HistoryResponse {
  records: HistoryRecord[];
  weights_trace: number[][];
  best_so_far: { x: number[]; y: number } | null;
  phase: string;
  iteration: number;
  n_observations: number;
  param_names: string[];
  box: BoxBounds;
}

export interface CreateSessionResponse {
  session_id: string;
  phase: string;
}

export interface SessionSummary {
  session_id: string;
  phase: string;
  n_observations: number;
  created_at: number;
  updated_at: number;
}

export interface SourceTask {
  task_id: string;
  inputs: number[][];
  outputs: number[];
}

export interface CreateSessionRequest {
  sources: (SourceTask | { path: string })[];
  config: {
    box: BoxBounds;
    param_names?: string[];
    schedule?: { alpha0: number; alpha1: number; beta: number } | null;
    seed?: number;
    [key: string]: unknown;
  };
}
