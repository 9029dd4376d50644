// HTML/SVG fragment builders. Pure string functions so they are testable
// without a DOM; main.ts assigns the results to innerHTML.

import type { SessionView, SuggestionRow, TrajectoryPoint } from './state.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export const fmtProb = (p: number): string => `${(p * 100).toFixed(1)}%`;
export const fmtCost = (c: number): string =>
  Number.isInteger(c) ? String(c) : c.toFixed(2);
export const fmtScore = (s: number): string => s.toExponential(2);

export function renderPredictionPanel(view: SessionView): string {
  const bars = view.prediction.classProbabilities
    .map((p, i) => {
      const top = i === view.prediction.predictedClass ? ' top' : '';
      return (
        `<div class="prob-row${top}">` +
        `<span class="prob-label">class ${i}</span>` +
        `<div class="prob-track"><div class="prob-fill" style="width:${(p * 100).toFixed(1)}%"></div></div>` +
        `<span class="prob-value">${fmtProb(p)}</span></div>`
      );
    })
    .join('');
  return (
    `<div class="headline">class ${view.prediction.predictedClass} ` +
    `at ${fmtProb(view.prediction.topProbability)} confidence, ` +
    `cost ${fmtCost(view.totalCost)}</div>${bars}`
  );
}

export function renderKnownRows(view: SessionView): string {
  if (view.knownRows.length === 0) {
    return '<p class="empty">No features acquired yet.</p>';
  }
  const rows = view.knownRows
    .map(
      (r) =>
        `<tr><td>${escapeHtml(r.name)}</td>` +
        `<td class="num">${r.value.toFixed(4)}</td>` +
        `<td class="num">${r.acquiredAt === null ? 'initial' : `step ${r.acquiredAt + 1}`}</td></tr>`,
    )
    .join('');
  return `<table><thead><tr><th>feature</th><th>value</th><th>acquired</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderSuggestionRows(view: SessionView): string {
  if (view.noneRemaining) {
    return '<p class="empty">All features are known.</p>';
  }
  const rows = view.suggestionRows
    .map(
      (r) =>
        `<tr data-id="${escapeHtml(r.id)}">` +
        `<td class="num">${r.rank}</td>` +
        `<td>${escapeHtml(r.id)}</td>` +
        `<td class="num">${fmtScore(r.score)}</td>` +
        `<td class="num">${fmtCost(r.cost)}</td>` +
        `<td><button class="whatif" data-id="${escapeHtml(r.id)}">?</button>` +
        `<button class="acquire" data-id="${escapeHtml(r.id)}">enter</button></td></tr>`,
    )
    .join('');
  const expander =
    view.hiddenSuggestions > 0
      ? `<button id="show-all">show all (${view.hiddenSuggestions} more)</button>`
      : '';
  return (
    `<table><thead><tr><th>#</th><th>feature</th><th>score</th><th>cost</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>${expander}`
  );
}

/** Score decomposition popover; read-only, built from the suggestion payload. */
export function renderWhatIf(row: SuggestionRow): string {
  return (
    `<h3>${escapeHtml(row.id)}</h3>` +
    `<dl><dt>rank</dt><dd>${row.rank}</dd>` +
    `<dt>sensitivity x probability</dt><dd>${fmtScore(row.numerator)}</dd>` +
    `<dt>cost</dt><dd>${fmtCost(row.cost)}</dd>` +
    `<dt>score</dt><dd>${fmtScore(row.score)}</dd></dl>` +
    (row.members.length > 1
      ? `<p class="group-note">acquired together: ${row.members.map(escapeHtml).join(', ')}</p>`
      : '')
  );
}

/** Polyline points for the confidence-vs-cost sparkline, "x,y x,y ...". */
export function sparklinePoints(
  trajectory: TrajectoryPoint[],
  width: number,
  height: number,
  pad = 2,
): string {
  if (trajectory.length === 0) return '';
  const maxCost = Math.max(...trajectory.map((p) => p.cost), 1e-9);
  const x = (c: number) => pad + (c / maxCost) * (width - 2 * pad);
  const y = (p: number) => height - pad - p * (height - 2 * pad);
  if (trajectory.length === 1) {
    const p = trajectory[0];
    return `${x(p.cost).toFixed(1)},${y(p.topProbability).toFixed(1)}`;
  }
  return trajectory
    .map((p) => `${x(p.cost).toFixed(1)},${y(p.topProbability).toFixed(1)}`)
    .join(' ');
}

export function renderSparkline(trajectory: TrajectoryPoint[]): string {
  const w = 260;
  const h = 60;
  const pts = sparklinePoints(trajectory, w, h);
  return (
    `<svg viewBox="0 0 ${w} ${h}" width="${w}" height="${h}" role="img" aria-label="confidence vs cost">` +
    `<polyline fill="none" stroke="currentColor" stroke-width="1.5" points="${pts}"></polyline>` +
    `</svg>`
  );
}
