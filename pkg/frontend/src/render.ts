// HTML string builders. Pure functions over service payloads: numeric
// cells carry the exact payload value in data-value, the visible text is
// only a formatting of it.

import type { QueueCard } from './state.js';
import { baselineDelta, orderedRows } from './state.js';
import type {
  CandidateSample,
  DemographicsData,
  DistributionData,
  OwnershipEntry,
  StatusPayload,
  SummaryRow,
  Theme,
} from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function fmtPct(value: number): string {
  return value.toFixed(2);
}

function num(value: number, suffix = ''): string {
  return `<span data-value="${String(value)}">${fmtPct(value)}${suffix}</span>`;
}

/** Wrap the server-provided offset spans in <mark>; the UI does no
 * linguistic processing of its own. */
export function highlight(text: string, offsets: [number, number][]): string {
  const sorted = [...offsets].sort((a, b) => a[0] - b[0]);
  let html = '';
  let pos = 0;
  for (const [start, end] of sorted) {
    if (start < pos || end > text.length) continue;
    html += escapeHtml(text.slice(pos, start));
    html += `<mark>${escapeHtml(text.slice(start, end))}</mark>`;
    pos = end;
  }
  return html + escapeHtml(text.slice(pos));
}

function sampleHtml(sample: CandidateSample): string {
  return `<blockquote class="sample" data-text-key="${escapeHtml(sample.text_key)}">${highlight(
    sample.text,
    sample.offsets,
  )}</blockquote>`;
}

const STATE_LABELS: Record<QueueCard['state'], string> = {
  queued: '',
  posting: 'saving…',
  accepted: 'accepted',
  rejected: 'rejected',
  conflict: 'already decided',
  failed: 'failed, press again to retry',
};

export function candidateCard(card: QueueCard, active: boolean): string {
  const c = card.candidate;
  const classes = ['card', `card--${card.state}`];
  if (active) classes.push('card--active');
  const conflict = card.conflict
    ? `<p class="conflict">decided before: <strong>${escapeHtml(card.conflict.prior_verdict)}</strong>` +
      (card.conflict.iteration !== null ? ` (iteration ${card.conflict.iteration})` : '') +
      '</p>'
    : '';
  const error = card.error ? `<p class="error">${escapeHtml(card.error)}</p>` : '';
  return (
    `<article class="${classes.join(' ')}" data-lemma="${escapeHtml(c.lemma)}">` +
    `<header><strong class="lemma">${escapeHtml(c.lemma)}</strong>` +
    `<span class="counts">${c.match_count} matched text(s) · corpus df ` +
    `<span data-value="${String(c.corpus_doc_frequency)}">${c.corpus_doc_frequency.toFixed(3)}</span></span>` +
    `<span class="state">${STATE_LABELS[card.state]}</span></header>` +
    conflict +
    error +
    c.samples.map(sampleHtml).join('') +
    `</article>`
  );
}

export function summaryTable(rows: SummaryRow[]): string {
  const body = rows
    .map(
      (row) =>
        `<tr><td>${escapeHtml(row.party)}</td><td>${row.n_ads}</td>` +
        `<td>${num(row.pct_matched, '%')}</td></tr>`,
    )
    .join('');
  return (
    '<table class="summary"><thead><tr><th>Party</th><th>Ads</th><th>Matched</th></tr></thead>' +
    `<tbody>${body}</tbody></table>`
  );
}

/** Horizontal bars per theme for one party; zero rows stay visible. */
export function distributionBars(
  rows: Record<string, number>,
  themes: Map<string, Theme>,
): string {
  const items = orderedRows(rows)
    .map(({ themeId, pct }) => {
      const name = themes.get(themeId)?.display_name ?? themeId;
      return (
        `<div class="bar-row" data-theme="${escapeHtml(themeId)}">` +
        `<span class="bar-label">${escapeHtml(name)}</span>` +
        `<span class="bar-track"><span class="bar-fill" style="width:${Math.min(pct, 100)}%"></span></span>` +
        `<span class="bar-value">${num(pct, '%')}</span></div>`
      );
    })
    .join('');
  return `<div class="bars">${items}</div>`;
}

export function distributionSection(
  data: DistributionData,
  themes: Map<string, Theme>,
): string {
  return Object.keys(data)
    .sort()
    .map(
      (party) =>
        `<section class="party-distribution" data-party="${escapeHtml(party)}">` +
        `<h3>${escapeHtml(party)}</h3>${distributionBars(data[party]!, themes)}</section>`,
    )
    .join('');
}

export function ownershipTable(
  entries: OwnershipEntry[],
  themes: Map<string, Theme>,
  k = 3,
): string {
  const header =
    '<tr><th>Theme</th>' +
    Array.from({ length: k }, (_, i) => `<th>#${i + 1}</th>`).join('') +
    '</tr>';
  const body = entries
    .map((entry) => {
      const name = themes.get(entry.theme_id)?.display_name ?? entry.theme_id;
      const cells = Array.from({ length: k }, (_, i) => {
        const slot = entry.ranked[i];
        if (!slot) return '<td></td>';
        return `<td>${escapeHtml(slot.party)} (${num(100 * slot.share, '%')})</td>`;
      }).join('');
      return `<tr data-theme="${escapeHtml(entry.theme_id)}"><td>${escapeHtml(name)}</td>${cells}</tr>`;
    })
    .join('');
  return `<table class="ownership"><thead>${header}</thead><tbody>${body}</tbody></table>`;
}

export function demographicsTable(
  data: DemographicsData,
  themes: Map<string, Theme>,
): string {
  const label = (group: string) =>
    data.grouping === 'per_theme' ? themes.get(group)?.display_name ?? group : group;
  const header =
    '<tr><th>Demographic</th><th>Population</th>' +
    data.groups.map((g) => `<th>${escapeHtml(label(g))}</th>`).join('') +
    '</tr>';
  let lastAxis = '';
  const body = data.rows
    .map((row) => {
      const separator =
        row.axis !== lastAxis && lastAxis !== ''
          ? `<tr class="axis-break"><td colspan="${data.groups.length + 2}"></td></tr>`
          : '';
      lastAxis = row.axis;
      const population =
        row.population === null ? '<td></td>' : `<td>${num(row.population, '%')}</td>`;
      const cells = data.groups
        .map((group) => {
          const value = row.values[group];
          if (value === undefined) return '<td></td>';
          const delta = baselineDelta(value, row.population);
          const deltaHtml =
            delta === null
              ? ''
              : ` <span class="delta ${delta >= 0 ? 'delta--up' : 'delta--down'}">` +
                `${delta >= 0 ? '+' : ''}${delta.toFixed(2)}</span>`;
          return `<td>${num(value, '%')}${deltaHtml}</td>`;
        })
        .join('');
      return `${separator}<tr data-axis="${escapeHtml(row.axis)}" data-key="${escapeHtml(row.key)}">` +
        `<td>${escapeHtml(row.key)}</td>${population}${cells}</tr>`;
    })
    .join('');
  const coverage = data.coverage
    .map(
      (c) =>
        `<p class="coverage">${c.excluded_ads} ad(s) in ${escapeHtml(label(c.group))} ` +
        `carry no ${escapeHtml(c.axis)} data (excluded from that axis).</p>`,
    )
    .join('');
  return (
    `<table class="demographics"><thead>${header}</thead><tbody>${body}</tbody></table>` +
    coverage
  );
}

export function statusLine(status: StatusPayload, staleBadge: boolean): string {
  const iteration = status.iterations[status.iterations.length - 1];
  const converged =
    status.converged === null ? 'no iterations yet' : status.converged ? 'converged' : 'active';
  return (
    `<span>corpus ${status.corpus.ads} ads / ${status.corpus.texts} texts</span>` +
    `<span>lexicon v${status.lexicon_version}</span>` +
    `<span>open iteration ${status.open_iteration} (${status.decisions_in_open_iteration} decisions)</span>` +
    `<span>${iteration ? `last accepted ${iteration.accepted}` : 'no iterations'}</span>` +
    `<span class="badge badge--${status.converged ? 'done' : 'active'}">${converged}</span>` +
    (staleBadge ? '<span class="badge badge--stale">rematch needed</span>' : '')
  );
}
