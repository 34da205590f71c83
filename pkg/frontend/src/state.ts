// Review-queue state machine, kept free of DOM and fetch so it is
// directly testable. The server is the authority: cards settle only on a
// confirmed response, optimistic marks roll back on any failure, and a
// failed POST is never retried without a fresh keypress.

import type { Candidate, ConflictDetail, Verdict } from './types.js';

export type CardState =
  | 'queued' // awaiting a verdict
  | 'posting' // optimistic, request in flight
  | 'accepted' // server-confirmed
  | 'rejected' // server-confirmed
  | 'conflict' // 409: decided elsewhere, prior verdict shown
  | 'failed'; // request failed; stays actionable, never auto-retried

export interface QueueCard {
  candidate: Candidate;
  state: CardState;
  optimistic: Verdict | null;
  conflict: ConflictDetail | null;
  error: string | null;
}

const SETTLED: ReadonlySet<CardState> = new Set(['accepted', 'rejected', 'conflict']);

export class ReviewQueue {
  readonly cards: QueueCard[];
  private cursor = 0;

  constructor(candidates: Candidate[]) {
    this.cards = candidates.map((candidate) => ({
      candidate,
      state: 'queued',
      optimistic: null,
      conflict: null,
      error: null,
    }));
  }

  /** The card the keyboard acts on: first unsettled card at/after the cursor. */
  current(): QueueCard | null {
    for (let i = this.cursor; i < this.cards.length; i++) {
      const card = this.cards[i]!;
      if (!SETTLED.has(card.state) && card.state !== 'posting') return card;
    }
    return null;
  }

  /** Cards still needing a verdict (the visible queue). */
  pending(): QueueCard[] {
    return this.cards.filter((c) => !SETTLED.has(c.state));
  }

  /** Session ledger: cards the server has settled, in queue order. */
  settled(): QueueCard[] {
    return this.cards.filter((c) => SETTLED.has(c.state));
  }

  skip(): void {
    const card = this.current();
    if (card) this.cursor = this.cards.indexOf(card) + 1;
  }

  private find(lemma: string): QueueCard | null {
    return this.cards.find((c) => c.candidate.lemma === lemma) ?? null;
  }

  /** Optimistic mark before the POST goes out. */
  beginVerdict(lemma: string, verdict: Verdict): QueueCard | null {
    const card = this.find(lemma);
    if (!card || SETTLED.has(card.state) || card.state === 'posting') return null;
    card.state = 'posting';
    card.optimistic = verdict;
    card.error = null;
    return card;
  }

  /** 2xx: the card reflects the server's confirmation and leaves the queue. */
  confirm(lemma: string, verdict: Verdict): void {
    const card = this.find(lemma);
    if (!card) return;
    card.state = verdict === 'accept' ? 'accepted' : 'rejected';
    card.optimistic = null;
  }

  /** 409: decided elsewhere; surface the prior verdict, leave the queue. */
  markConflict(lemma: string, detail: ConflictDetail): void {
    const card = this.find(lemma);
    if (!card) return;
    card.state = 'conflict';
    card.optimistic = null;
    card.conflict = detail;
  }

  /** Network or server failure: roll the optimistic mark back. */
  rollback(lemma: string, message: string): void {
    const card = this.find(lemma);
    if (!card) return;
    card.state = 'failed';
    card.optimistic = null;
    card.error = message;
  }
}

/** The dashboards were fetched at one lexicon version; new decisions make
 * them stale until the next refresh or iterate. */
export function rematchNeeded(
  currentVersion: number,
  fetchedVersion: number | null,
): boolean {
  return fetchedVersion !== null && currentVersion !== fetchedVersion;
}

/** Difference shown next to the population column, in percentage points. */
export function baselineDelta(value: number, population: number | null): number | null {
  return population === null ? null : value - population;
}

/** Distribution rows ordered for display: descending, zero rows retained. */
export function orderedRows(
  rows: Record<string, number>,
): { themeId: string; pct: number }[] {
  return Object.entries(rows)
    .map(([themeId, pct]) => ({ themeId, pct }))
    .sort((a, b) => b.pct - a.pct || a.themeId.localeCompare(b.themeId));
}
