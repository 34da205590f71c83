// App wiring: review queue with keyboard triage, dashboards fed verbatim
// from /reports, status polling with a rematch-needed badge. All state
// lives on the server; this file only renders and forwards verdicts.

import { ApiClient, ApiError, ServiceUnreachable } from './api.js';
import { ReviewQueue, rematchNeeded } from './state.js';
import {
  candidateCard,
  demographicsTable,
  distributionSection,
  escapeHtml,
  ownershipTable,
  statusLine,
  summaryTable,
} from './render.js';
import type { Theme, Verdict } from './types.js';

const api = new ApiClient('');

interface AppState {
  themes: Map<string, Theme>;
  themeId: string | null;
  queue: ReviewQueue;
  view: 'review' | 'dashboards';
  basis: 'ads' | 'impressions';
  demographics: 'per_theme' | 'per_party';
  reportsFetchedAt: number | null;
  offline: boolean;
}

const state: AppState = {
  themes: new Map(),
  themeId: null,
  queue: new ReviewQueue([]),
  view: 'review',
  basis: 'ads',
  demographics: 'per_theme',
  reportsFetchedAt: null,
  offline: false,
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setOffline(offline: boolean): void {
  state.offline = offline;
  el('offline-banner').hidden = !offline;
}

async function guard<T>(work: Promise<T>): Promise<T | null> {
  try {
    const result = await work;
    setOffline(false);
    return result;
  } catch (error) {
    if (error instanceof ServiceUnreachable) {
      setOffline(true);
      return null;
    }
    throw error;
  }
}

// ---------------------------------------------------------------- review

function renderThemeList(): void {
  const items = [...state.themes.values()]
    .map((theme) => {
      const active = theme.id === state.themeId ? ' theme--active' : '';
      return (
        `<button class="theme${active}" data-theme="${escapeHtml(theme.id)}">` +
        `${escapeHtml(theme.display_name)} <small>${theme.words.length}</small></button>`
      );
    })
    .join('');
  el('themes').innerHTML = items;
}

function renderQueue(): void {
  const current = state.queue.current();
  const pending = state.queue.pending();
  const settled = state.queue.settled();
  el('queue').innerHTML = pending.length
    ? pending.map((card) => candidateCard(card, card === current)).join('')
    : '<p class="empty">No open candidates for this theme. Pick another theme or iterate.</p>';
  el('ledger').innerHTML = settled.length
    ? '<h3>Decided this session</h3>' + settled.map((card) => candidateCard(card, false)).join('')
    : '';
}

async function loadCandidates(themeId: string): Promise<void> {
  state.themeId = themeId;
  renderThemeList();
  const candidates = await guard(api.getCandidates(themeId));
  if (candidates === null) return;
  state.queue = new ReviewQueue(candidates);
  renderQueue();
}

async function submitVerdict(verdict: Verdict): Promise<void> {
  const card = state.queue.current();
  if (!card || !state.themeId) return;
  const lemma = card.candidate.lemma;
  state.queue.beginVerdict(lemma, verdict);
  renderQueue();
  try {
    const response = await api.postDecision(lemma, card.candidate.theme_id, verdict);
    state.queue.confirm(response.lemma, response.verdict);
    setOffline(false);
  } catch (error) {
    if (error instanceof ServiceUnreachable) {
      // non-destructive: the card returns to the queue, nothing is retried
      // behind the user's back
      state.queue.rollback(lemma, 'service unreachable; verdict not saved');
      setOffline(true);
    } else if (error instanceof ApiError && error.conflict()) {
      state.queue.markConflict(lemma, error.conflict()!);
    } else if (error instanceof ApiError) {
      state.queue.rollback(lemma, `server rejected the verdict (HTTP ${error.status})`);
    } else {
      throw error;
    }
  }
  renderQueue();
  void refreshStatus();
}

async function iterate(): Promise<void> {
  const record = await guard(api.postIterate());
  if (record === null) return;
  el('iterate-result').textContent =
    `iteration ${record.iteration}: accepted ${record.accepted}, ` +
    `rejected ${record.rejected} of ${record.suggested} suggested`;
  if (state.themeId) await loadCandidates(state.themeId);
  await refreshStatus();
  if (state.view === 'dashboards') await loadDashboards();
}

// ------------------------------------------------------------ dashboards

async function loadDashboards(): Promise<void> {
  const [summary, distribution, ownership, demographics] = await Promise.all([
    guard(api.getSummary()),
    guard(api.getDistribution(state.basis)),
    guard(api.getOwnership()),
    guard(api.getDemographics(state.demographics)),
  ]);
  if (!summary || !distribution || !ownership || !demographics) return;
  state.reportsFetchedAt = distribution.lexicon_version;
  el('summary').innerHTML = summaryTable(summary.data);
  el('distributions').innerHTML = distributionSection(distribution.data, state.themes);
  el('ownership').innerHTML = ownershipTable(ownership.data, state.themes);
  el('demographics').innerHTML = demographicsTable(demographics.data, state.themes);
  el('report-version').textContent =
    `reports at lexicon v${distribution.lexicon_version} ` +
    `(thresholds ${distribution.config.min_exclusive}/${distribution.config.multi_threshold})`;
  void refreshStatus();
}

async function refreshStatus(): Promise<void> {
  const status = await guard(api.getStatus());
  if (status === null) return;
  const stale =
    state.view === 'dashboards' &&
    rematchNeeded(status.lexicon_version, state.reportsFetchedAt);
  el('status').innerHTML = statusLine(status, stale);
}

// ---------------------------------------------------------------- wiring

function switchView(view: 'review' | 'dashboards'): void {
  state.view = view;
  el('view-review').hidden = view !== 'review';
  el('view-dashboards').hidden = view !== 'dashboards';
  document
    .querySelectorAll('nav button')
    .forEach((b) => b.classList.toggle('tab--active', b.id === `tab-${view}`));
  if (view === 'dashboards') void loadDashboards();
  void refreshStatus();
}

function bindEvents(): void {
  el('tab-review').addEventListener('click', () => switchView('review'));
  el('tab-dashboards').addEventListener('click', () => switchView('dashboards'));
  el('iterate').addEventListener('click', () => void iterate());
  el('themes').addEventListener('click', (event) => {
    const button = (event.target as HTMLElement).closest('button[data-theme]');
    if (button) void loadCandidates(button.getAttribute('data-theme')!);
  });
  el('basis-toggle').addEventListener('click', (event) => {
    const button = (event.target as HTMLElement).closest('button[data-basis]');
    if (!button) return;
    state.basis = button.getAttribute('data-basis') as 'ads' | 'impressions';
    document
      .querySelectorAll('#basis-toggle button')
      .forEach((b) => b.classList.toggle('tab--active', b === button));
    void loadDashboards();
  });
  el('grouping-toggle').addEventListener('click', (event) => {
    const button = (event.target as HTMLElement).closest('button[data-grouping]');
    if (!button) return;
    state.demographics = button.getAttribute('data-grouping') as 'per_theme' | 'per_party';
    document
      .querySelectorAll('#grouping-toggle button')
      .forEach((b) => b.classList.toggle('tab--active', b === button));
    void loadDashboards();
  });
  document.addEventListener('keydown', (event) => {
    if (state.view !== 'review') return;
    if (event.target instanceof HTMLInputElement) return;
    if (event.key === 'a') void submitVerdict('accept');
    else if (event.key === 'r') void submitVerdict('reject');
    else if (event.key === 's' || event.key === 'j') {
      state.queue.skip();
      renderQueue();
    }
  });
}

async function boot(): Promise<void> {
  bindEvents();
  const themes = await guard(api.getThemes());
  if (themes === null) return;
  state.themes = new Map(themes.map((t) => [t.id, t]));
  renderThemeList();
  const first = themes[0];
  if (first) await loadCandidates(first.id);
  await refreshStatus();
  setInterval(() => void refreshStatus(), 15_000);
}

void boot();
