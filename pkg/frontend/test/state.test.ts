import { describe, expect, it } from 'vitest';

import {
  SUGGESTION_CAP,
  appendTrajectory,
  buildView,
  loadTrajectory,
  saveTrajectory,
} from '../src/state.js';
import {
  MemoryStorage,
  makeMeta,
  makeState,
  makeSuggestion,
} from './helpers.js';

describe('buildView', () => {
  it('derives known rows from the service state only', () => {
    const state = makeState({
      known: { age: 0.25, bp: 0.5 },
      history: [{ t: 0, id: 'bp', score: 0.05, values: { bp: 0.5 } }],
      total_cost: 2,
    });
    const view = buildView(makeMeta(), state, makeSuggestion());
    expect(view.totalCost).toBe(2);
    expect(view.knownRows).toEqual([
      { name: 'age', value: 0.25, acquiredAt: null },
      { name: 'bp', value: 0.5, acquiredAt: 0 },
    ]);
  });

  it('keeps suggestion order and attaches 1-based ranks', () => {
    const view = buildView(makeMeta(), makeState(), makeSuggestion());
    expect(view.suggestionRows.map((r) => [r.rank, r.id])).toEqual([
      [1, 'bp'],
      [2, 'age'],
      [3, 'hr'],
    ]);
  });

  it('caps the list at ten until expanded', () => {
    const candidates = Array.from({ length: 14 }, (_, i) => ({
      id: `f${i}`,
      score: 1 - i / 100,
      numerator: 1 - i / 100,
      cost: 1,
    }));
    const meta = makeMeta({
      feature_names: candidates.map((c) => c.id),
      units: candidates.map((c) => ({ id: c.id, cost: 1, members: [c.id] })),
    });
    const sug = makeSuggestion({ candidates });
    const collapsed = buildView(meta, makeState(), sug);
    expect(collapsed.suggestionRows).toHaveLength(SUGGESTION_CAP);
    expect(collapsed.hiddenSuggestions).toBe(4);
    const expanded = buildView(meta, makeState(), sug, true);
    expect(expanded.suggestionRows).toHaveLength(14);
    expect(expanded.hiddenSuggestions).toBe(0);
    // ranks keep their full-list positions either way
    expect(expanded.suggestionRows[13].rank).toBe(14);
  });

  it('copies prediction numbers verbatim from the payload', () => {
    const state = makeState({
      prediction: {
        class_probabilities: [0.123, 0.877],
        predicted_class: 1,
        top_probability: 0.877,
      },
    });
    const view = buildView(makeMeta(), state, makeSuggestion());
    expect(view.prediction.classProbabilities).toEqual([0.123, 0.877]);
    expect(view.prediction.predictedClass).toBe(1);
    expect(view.prediction.topProbability).toBe(0.877);
  });

  it('resolves group members from model metadata', () => {
    const meta = makeMeta({
      units: [
        { id: 'color', cost: 3, members: ['color=red', 'color=blue'] },
        { id: 'age', cost: 1, members: ['age'] },
      ],
    });
    const sug = makeSuggestion({
      candidates: [{ id: 'color', score: 0.2, numerator: 0.6, cost: 3 }],
    });
    const view = buildView(meta, makeState(), sug);
    expect(view.suggestionRows[0].members).toEqual(['color=red', 'color=blue']);
  });

  it('flags exhausted sessions', () => {
    const view = buildView(
      makeMeta(),
      makeState(),
      makeSuggestion({ candidates: [], none_remaining: true }),
    );
    expect(view.noneRemaining).toBe(true);
    expect(view.suggestionRows).toHaveLength(0);
  });
});

describe('trajectory', () => {
  it('appends exactly one point per state update', () => {
    let traj = appendTrajectory([], makeState());
    traj = appendTrajectory(
      traj,
      makeState({
        total_cost: 2,
        prediction: {
          class_probabilities: [0.2, 0.8],
          predicted_class: 1,
          top_probability: 0.8,
        },
      }),
    );
    expect(traj).toEqual([
      { cost: 0, topProbability: 0.6 },
      { cost: 2, topProbability: 0.8 },
    ]);
  });

  it('does not mutate the input array', () => {
    const base = appendTrajectory([], makeState());
    appendTrajectory(base, makeState({ total_cost: 1 }));
    expect(base).toHaveLength(1);
  });

  it('roundtrips through storage keyed by session id', () => {
    const storage = new MemoryStorage();
    const traj = [
      { cost: 0, topProbability: 0.6 },
      { cost: 2, topProbability: 0.8 },
    ];
    saveTrajectory(storage, 'sess-1', traj);
    expect(loadTrajectory(storage, 'sess-1')).toEqual(traj);
    expect(loadTrajectory(storage, 'other')).toEqual([]);
  });

  it('treats corrupt storage as empty', () => {
    const storage = new MemoryStorage();
    storage.setItem('facq-trajectory:sess-1', '{not json');
    expect(loadTrajectory(storage, 'sess-1')).toEqual([]);
  });
});
