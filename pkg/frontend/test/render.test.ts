import { describe, expect, it } from 'vitest';

import { ReviewQueue } from '../src/state.js';
import {
  candidateCard,
  demographicsTable,
  distributionBars,
  distributionSection,
  highlight,
  ownershipTable,
} from '../src/render.js';
import type { Candidate, DemographicsData, DistributionData, Theme } from '../src/types.js';

const THEMES = new Map<string, Theme>(
  [
    ['housing', 'Housing'],
    ['climate', 'Climate'],
    ['defense', 'Defense'],
  ].map(([id, name]) => [
    id!,
    { id: id!, display_name: name!, cap_categories: [1], description: '', words: [] },
  ]),
);

/** Pull every data-value number out of rendered HTML, in document order. */
function dataValues(html: string): number[] {
  return [...html.matchAll(/data-value="([^"]+)"/g)].map((m) => Number(m[1]));
}

describe('highlight', () => {
  it('wraps exactly the server-provided spans', () => {
    const text = 'Nieuwe woningen en een woning.';
    const html = highlight(text, [
      [7, 15],
      [23, 29],
    ]);
    expect(html).toBe('Nieuwe <mark>woningen</mark> en een <mark>woning</mark>.');
  });

  it('escapes markup inside and outside the spans', () => {
    const html = highlight('<b> woord </b>', [[4, 9]]);
    expect(html).toBe('&lt;b&gt; <mark>woord</mark> &lt;/b&gt;');
  });

  it('ignores spans that fall outside the text', () => {
    expect(highlight('kort', [[10, 20]])).toBe('kort');
  });
});

describe('candidateCard', () => {
  const candidate: Candidate = {
    lemma: 'hypotheek',
    theme_id: 'housing',
    match_count: 4,
    corpus_doc_frequency: 0.0976,
    samples: [{ text_key: 'k1', text: 'lagere hypotheek nu', offsets: [[7, 16]] }],
  };

  it('renders counts and highlighted samples from the payload only', () => {
    const queue = new ReviewQueue([candidate]);
    const html = candidateCard(queue.current()!, true);
    expect(html).toContain('hypotheek');
    expect(html).toContain('4 matched text(s)');
    expect(html).toContain('<mark>hypotheek</mark>');
    expect(html).toContain('card--active');
    expect(dataValues(html)).toContain(0.0976);
  });

  it('shows the prior verdict on a conflict', () => {
    const queue = new ReviewQueue([candidate]);
    queue.beginVerdict('hypotheek', 'accept');
    queue.markConflict('hypotheek', {
      message: 'decided',
      prior_verdict: 'reject',
      iteration: 3,
    });
    const html = candidateCard(queue.settled()[0]!, false);
    expect(html).toContain('decided before');
    expect(html).toContain('reject');
    expect(html).toContain('iteration 3');
  });
});

describe('distribution rendering', () => {
  const rows = { housing: 62.5, climate: 37.5, defense: 0.0 };

  it('data-value attributes equal the payload numbers exactly', () => {
    const html = distributionBars(rows, THEMES);
    expect(dataValues(html)).toEqual([62.5, 37.5, 0]);
  });

  it('zero-percent themes are rendered, not omitted', () => {
    const html = distributionBars(rows, THEMES);
    expect(html).toContain('data-theme="defense"');
    expect(html).toContain('0.00%');
  });

  it('parties render in sorted order with their own sections', () => {
    const data: DistributionData = {
      'Partij B': rows,
      'Partij A': { housing: 100.0, climate: 0.0, defense: 0.0 },
    };
    const html = distributionSection(data, THEMES);
    const order = [...html.matchAll(/data-party="([^"]+)"/g)].map((m) => m[1]);
    expect(order).toEqual(['Partij A', 'Partij B']);
  });
});

describe('ownershipTable', () => {
  it('renders party (share%) cells and pads missing ranks', () => {
    const html = ownershipTable(
      [
        {
          theme_id: 'housing',
          ranked: [
            { party: 'A', share: 0.6 },
            { party: 'B', share: 0.4 },
          ],
        },
        { theme_id: 'climate', ranked: [] },
      ],
      THEMES,
      3,
    );
    expect(html).toContain('A (<span data-value="60">60.00%</span>)');
    expect(html).toContain('B (<span data-value="40">40.00%</span>)');
    const climateRow = html.slice(html.indexOf('data-theme="climate"'));
    expect(climateRow).toContain('<td></td><td></td><td></td>');
  });
});

describe('demographicsTable', () => {
  const data: DemographicsData = {
    grouping: 'per_theme',
    groups: ['housing', 'climate'],
    rows: [
      { axis: 'gender', key: 'female', population: 50.29, values: { housing: 58.8, climate: 50.31 } },
      { axis: 'gender', key: 'male', population: 49.71, values: { housing: 41.2, climate: 49.69 } },
      { axis: 'age', key: '18-24', population: 10.17, values: { housing: 17.02 } },
    ],
    coverage: [{ group: 'climate', axis: 'age', excluded_ads: 2 }],
  };

  it('keeps payload values exact and shows baseline deltas', () => {
    const html = demographicsTable(data, THEMES);
    expect(dataValues(html)).toEqual([50.29, 58.8, 50.31, 49.71, 41.2, 49.69, 10.17, 17.02]);
    expect(html).toContain('+8.51'); // 58.80 vs 50.29 population
    expect(html).toContain('delta--down');
  });

  it('renders blank cells for groups without data on a row', () => {
    const html = demographicsTable(data, THEMES);
    const ageRow = html.slice(html.indexOf('data-key="18-24"'));
    expect(ageRow.slice(0, ageRow.indexOf('</tr>'))).toContain('<td></td>');
  });

  it('lists coverage diagnostics verbatim', () => {
    const html = demographicsTable(data, THEMES);
    expect(html).toContain('2 ad(s) in Climate carry no age data');
  });
});
