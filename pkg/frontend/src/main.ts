// DOM wiring for the acquisition console. Optimistic UI is deliberately
// off: every mutation waits for the service response, and every render is
// driven by the latest payloads (zero local inference).

import { ApiClient, ApiRequestError } from './api.js';
import {
  appendTrajectory,
  buildView,
  loadTrajectory,
  saveTrajectory,
  type SessionView,
  type TrajectoryPoint,
} from './state.js';
import {
  renderKnownRows,
  renderPredictionPanel,
  renderSparkline,
  renderSuggestionRows,
  renderWhatIf,
  escapeHtml,
} from './render.js';
import type { ModelMeta, SessionState, Suggestion } from './types.js';

const api = new ApiClient('');

interface AppState {
  meta: ModelMeta | null;
  sessionId: string | null;
  state: SessionState | null;
  suggestion: Suggestion | null;
  trajectory: TrajectoryPoint[];
  expanded: boolean;
}

const app: AppState = {
  meta: null,
  sessionId: null,
  state: null,
  suggestion: null,
  trajectory: [],
  expanded: false,
};

const el = (id: string) => document.getElementById(id)!;

function banner(message: string, retryable = false): void {
  const box = el('banner');
  box.innerHTML = retryable
    ? `${escapeHtml(message)} <button id="retry">retry</button>`
    : escapeHtml(message);
  box.hidden = false;
  if (retryable) {
    el('retry').addEventListener('click', () => {
      box.hidden = true;
      void boot();
    });
  }
}

function clearBanner(): void {
  el('banner').hidden = true;
}

function currentView(): SessionView | null {
  if (!app.meta || !app.state || !app.suggestion) return null;
  return buildView(app.meta, app.state, app.suggestion, app.expanded);
}

function render(): void {
  const view = currentView();
  if (!view) return;
  el('prediction').innerHTML = renderPredictionPanel(view);
  el('known').innerHTML = renderKnownRows(view);
  el('suggestions').innerHTML = renderSuggestionRows(view);
  el('trajectory').innerHTML = renderSparkline(app.trajectory);
  el('session-label').textContent = `session ${view.sessionId.slice(0, 8)}`;

  el('suggestions')
    .querySelectorAll<HTMLButtonElement>('button.acquire')
    .forEach((btn) =>
      btn.addEventListener('click', () => void promptAcquire(btn.dataset.id!)),
    );
  el('suggestions')
    .querySelectorAll<HTMLButtonElement>('button.whatif')
    .forEach((btn) =>
      btn.addEventListener('click', () => showWhatIf(btn.dataset.id!)),
    );
  const showAll = document.getElementById('show-all');
  if (showAll) {
    showAll.addEventListener('click', () => {
      app.expanded = true;
      render();
    });
  }
}

function showWhatIf(id: string): void {
  const view = currentView();
  const row = view?.suggestionRows.find((r) => r.id === id);
  if (!row) return;
  const pop = el('popover');
  pop.innerHTML =
    renderWhatIf(row) + '<button id="popover-close">close</button>';
  pop.hidden = false;
  el('popover-close').addEventListener('click', () => {
    pop.hidden = true; // read-only: closing never touches session state
  });
}

async function promptAcquire(id: string): Promise<void> {
  if (!app.meta || !app.sessionId) return;
  const unit = app.meta.units.find((u) => u.id === id);
  if (!unit) return;
  try {
    let response;
    if (unit.members.length === 1) {
      const raw = window.prompt(`Value for ${unit.members[0]}:`);
      if (raw === null) return;
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        banner(`"${raw}" is not a number`);
        return;
      }
      response = await api.acquireFeature(app.sessionId, id, value);
    } else {
      const values: Record<string, number> = {};
      for (const name of unit.members) {
        const raw = window.prompt(`Value for ${name} (group ${id}):`);
        if (raw === null) return;
        const value = Number(raw);
        if (!Number.isFinite(value)) {
          banner(`"${raw}" is not a number`);
          return;
        }
        values[name] = value;
      }
      response = await api.acquireGroup(app.sessionId, id, values);
    }
    clearBanner();
    app.state = response;
    app.suggestion = response.suggestion;
    app.trajectory = appendTrajectory(app.trajectory, response);
    saveTrajectory(window.sessionStorage, app.sessionId, app.trajectory);
    if (response.warnings.length > 0) banner(response.warnings.join('; '));
    render();
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 409) {
      // conflict: someone else advanced the session; re-sync and re-render
      await refresh();
      banner(err.message);
    } else if (err instanceof ApiRequestError) {
      banner(err.message);
    } else {
      banner('service unreachable', true);
    }
  }
}

async function refresh(): Promise<void> {
  if (!app.sessionId) return;
  app.state = await api.getState(app.sessionId);
  const sug = await api.getSuggestion(app.sessionId);
  app.suggestion = { candidates: sug.candidates, none_remaining: sug.none_remaining };
  render();
}

async function startSession(initial: Record<string, number>): Promise<void> {
  const created = await api.createSession(initial);
  app.sessionId = created.session_id;
  app.state = created;
  app.suggestion = created.suggestion;
  app.expanded = false;
  app.trajectory = appendTrajectory([], created);
  saveTrajectory(window.sessionStorage, created.session_id, app.trajectory);
  window.location.hash = created.session_id;
  if (created.warnings.length > 0) banner(created.warnings.join('; '));
  render();
}

async function resumeSession(sessionId: string): Promise<boolean> {
  try {
    app.state = await api.getState(sessionId);
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 404) return false;
    throw err;
  }
  app.sessionId = sessionId;
  const sug = await api.getSuggestion(sessionId);
  app.suggestion = { candidates: sug.candidates, none_remaining: sug.none_remaining };
  app.trajectory = loadTrajectory(window.sessionStorage, sessionId);
  if (app.trajectory.length === 0 && app.state) {
    app.trajectory = appendTrajectory([], app.state);
  }
  render();
  return true;
}

function renderStartForm(meta: ModelMeta): void {
  const rows = meta.feature_names
    .map(
      (name) =>
        `<label>${escapeHtml(name)} <input type="text" name="${escapeHtml(name)}" placeholder="unknown"></label>`,
    )
    .join('');
  el('start-form').innerHTML =
    `${rows}<button id="start">start session</button>`;
  el('start').addEventListener('click', () => {
    const initial: Record<string, number> = {};
    el('start-form')
      .querySelectorAll<HTMLInputElement>('input')
      .forEach((input) => {
        if (input.value.trim() !== '') {
          const v = Number(input.value);
          if (Number.isFinite(v)) initial[input.name] = v;
        }
      });
    void startSession(initial).catch(() =>
      banner('could not create session', true),
    );
  });
}

async function boot(): Promise<void> {
  try {
    app.meta = await api.model();
  } catch {
    banner('service unreachable', true);
    return;
  }
  renderStartForm(app.meta);
  const fromHash = window.location.hash.slice(1);
  if (fromHash) {
    const resumed = await resumeSession(fromHash).catch(() => false);
    if (!resumed) window.location.hash = '';
  }
}

if (typeof document !== 'undefined') {
  void boot();
}
