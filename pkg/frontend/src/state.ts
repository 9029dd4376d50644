// View model derivation. Everything here is a pure function of service
// payloads: the console never recomputes scores, costs, or probabilities.

import type {
  Candidate,
  ModelMeta,
  SessionState,
  Suggestion,
  UnitMeta,
} from './types.js';

export const SUGGESTION_CAP = 10;

export interface KnownRow {
  name: string;
  value: number; // normalized value as stored by the service
  acquiredAt: number | null; // history step, null for initial values
}

export interface SuggestionRow extends Candidate {
  rank: number; // 1-based position in the full sorted list
  members: string[]; // >1 entry for grouped (e.g. one-hot) units
}

export interface TrajectoryPoint {
  cost: number;
  topProbability: number;
}

export interface SessionView {
  sessionId: string;
  totalCost: number;
  prediction: {
    classProbabilities: number[];
    predictedClass: number;
    topProbability: number;
  };
  knownRows: KnownRow[];
  suggestionRows: SuggestionRow[];
  hiddenSuggestions: number; // collapsed by the cap; 0 when expanded
  noneRemaining: boolean;
}

function unitByCandidate(meta: ModelMeta): Map<string, UnitMeta> {
  return new Map(meta.units.map((u) => [u.id, u]));
}

export function buildView(
  meta: ModelMeta,
  state: SessionState,
  suggestion: Suggestion,
  expanded = false,
): SessionView {
  const acquiredStep = new Map<string, number>();
  for (const h of state.history) {
    for (const name of Object.keys(h.values)) acquiredStep.set(name, h.t);
  }
  const knownRows: KnownRow[] = Object.entries(state.known).map(
    ([name, value]) => ({
      name,
      value,
      acquiredAt: acquiredStep.get(name) ?? null,
    }),
  );

  const units = unitByCandidate(meta);
  const all: SuggestionRow[] = suggestion.candidates.map((c, i) => ({
    ...c,
    rank: i + 1,
    members: units.get(c.id)?.members ?? [c.id],
  }));
  const shown = expanded ? all : all.slice(0, SUGGESTION_CAP);

  return {
    sessionId: state.session_id,
    totalCost: state.total_cost,
    prediction: {
      classProbabilities: state.prediction.class_probabilities,
      predictedClass: state.prediction.predicted_class,
      topProbability: state.prediction.top_probability,
    },
    knownRows,
    suggestionRows: shown,
    hiddenSuggestions: all.length - shown.length,
    noneRemaining: suggestion.none_remaining,
  };
}

/** Appends the point for the latest service state; one point per acquisition. */
export function appendTrajectory(
  trajectory: TrajectoryPoint[],
  state: SessionState,
): TrajectoryPoint[] {
  return [
    ...trajectory,
    {
      cost: state.total_cost,
      topProbability: state.prediction.top_probability,
    },
  ];
}

const storageKey = (sessionId: string) => `facq-trajectory:${sessionId}`;

export function saveTrajectory(
  storage: Pick<Storage, 'setItem'>,
  sessionId: string,
  trajectory: TrajectoryPoint[],
): void {
  storage.setItem(storageKey(sessionId), JSON.stringify(trajectory));
}

export function loadTrajectory(
  storage: Pick<Storage, 'getItem'>,
  sessionId: string,
): TrajectoryPoint[] {
  const raw = storage.getItem(storageKey(sessionId));
  if (!raw) return [];
  try {
    const parsed = JSON.parse(raw);
    return Array.isArray(parsed) ? (parsed as TrajectoryPoint[]) : [];
  } catch {
    return [];
  }
}
