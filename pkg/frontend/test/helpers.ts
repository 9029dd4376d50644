import type {
  ModelMeta,
  SessionCreated,
  SessionState,
  Suggestion,
} from '../src/types.js';

export function makeMeta(overrides: Partial<ModelMeta> = {}): ModelMeta {
  return {
    schema_version: 1,
    feature_names: ['age', 'bp', 'hr'],
    n_classes: 2,
    bits: 8,
    dataset_fingerprint: 'abc123',
    units: [
      { id: 'age', cost: 1, members: ['age'] },
      { id: 'bp', cost: 2, members: ['bp'] },
      { id: 'hr', cost: 4, members: ['hr'] },
    ],
    ...overrides,
  };
}

export function makeState(overrides: Partial<SessionState> = {}): SessionState {
  return {
    schema_version: 1,
    session_id: 'sess-1',
    created: 1000,
    updated: 1000,
    total_cost: 0,
    known: {},
    history: [],
    prediction: {
      class_probabilities: [0.6, 0.4],
      predicted_class: 0,
      top_probability: 0.6,
    },
    ...overrides,
  };
}

export function makeSuggestion(
  overrides: Partial<Suggestion> = {},
): Suggestion {
  return {
    candidates: [
      { id: 'bp', score: 0.05, numerator: 0.1, cost: 2 },
      { id: 'age', score: 0.04, numerator: 0.04, cost: 1 },
      { id: 'hr', score: 0.01, numerator: 0.04, cost: 4 },
    ],
    none_remaining: false,
    ...overrides,
  };
}

export function makeCreated(
  overrides: Partial<SessionCreated> = {},
): SessionCreated {
  return {
    ...makeState(),
    suggestion: makeSuggestion(),
    warnings: [],
    ...overrides,
  };
}

/** Installs a fetch mock that records calls and replays canned responses. */
export function mockFetch(
  handler: (url: string, init?: RequestInit) => { status?: number; body: unknown },
) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  globalThis.fetch = (async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const { status = 200, body } = handler(url, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });
  }) as typeof fetch;
  return calls;
}

export class MemoryStorage {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}
