// JSON schemas of the /v1 session API. Every number shown in the console
// comes from one of these payloads; nothing is computed locally.

export interface ModelMeta {
  schema_version: number;
  feature_names: string[];
  n_classes: number;
  bits: number;
  dataset_fingerprint: string | null;
  units: UnitMeta[];
}

export interface UnitMeta {
  id: string;
  cost: number;
  members: string[];
}

export interface Prediction {
  class_probabilities: number[];
  predicted_class: number;
  top_probability: number;
}

export interface HistoryEntry {
  t: number;
  id: string;
  score: number | null;
  values: Record<string, number>;
}

export interface SessionState {
  schema_version: number;
  session_id: string;
  created: number;
  updated: number;
  total_cost: number;
  known: Record<string, number>;
  history: HistoryEntry[];
  prediction: Prediction;
}

export interface Candidate {
  id: string;
  score: number;
  numerator: number;
  cost: number;
}

export interface Suggestion {
  candidates: Candidate[];
  none_remaining: boolean;
}

export type SessionCreated = SessionState & {
  suggestion: Suggestion;
  warnings: string[];
};

export type AcquireResponse = SessionCreated;

export interface SuggestionResponse extends Suggestion {
  schema_version: number;
  session_id: string;
  total_cost: number;
  prediction: Prediction;
}

export interface ApiErrorBody {
  schema_version?: number;
  error: { code: string; message: string };
}
