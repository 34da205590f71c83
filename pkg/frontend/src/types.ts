// Payload shapes of the curation service. The UI renders these verbatim
// and never recomputes a statistic from them.

export interface ThemeWord {
  lemma: string;
  provenance: string;
}

export interface Theme {
  id: string;
  display_name: string;
  cap_categories: number[];
  description: string;
  words: ThemeWord[];
}

export interface CandidateSample {
  text_key: string;
  text: string;
  offsets: [number, number][];
}

export interface Candidate {
  lemma: string;
  theme_id: string;
  match_count: number;
  corpus_doc_frequency: number;
  samples: CandidateSample[];
}

export type Verdict = 'accept' | 'reject';

export interface DecisionResponse {
  lemma: string;
  theme_id: string;
  verdict: Verdict;
  iteration: number;
  lexicon_version: number;
}

export interface ConflictDetail {
  message: string;
  prior_verdict: string;
  iteration: number | null;
}

export interface IterationRecord {
  iteration: number;
  lexicon_version_before: number;
  lexicon_version_after: number;
  suggested: number;
  accepted: number;
  rejected: number;
  converged: Record<string, boolean>;
}

export interface StatusPayload {
  corpus: { ads: number; texts: number };
  lexicon_version: number;
  matched_lexicon_version: number | null;
  open_iteration: number;
  decisions_in_open_iteration: number;
  iterations: IterationRecord[];
  converged: boolean | null;
  config: {
    min_exclusive: number;
    multi_threshold: number;
    suggestion_k: number;
    df_ceiling: number;
  };
}

export interface ReportEnvelope<T> {
  table: string;
  lexicon_version: number;
  config: { min_exclusive: number; multi_threshold: number };
  basis?: string;
  data: T;
}

/** party -> theme_id -> percentage */
export type DistributionData = Record<string, Record<string, number>>;

export interface OwnershipEntry {
  theme_id: string;
  ranked: { party: string; share: number }[];
}

export interface DemographicsRow {
  axis: string;
  key: string;
  population: number | null;
  values: Record<string, number>;
}

export interface DemographicsData {
  grouping: string;
  groups: string[];
  rows: DemographicsRow[];
  coverage: { group: string; axis: string; excluded_ads: number }[];
}

export interface SummaryRow {
  party: string;
  n_ads: number;
  n_matched: number;
  pct_matched: number;
}

export interface AdSummary {
  id: string;
  page_name: string;
  party: string;
  start_date: string;
  end_date: string | null;
  impressions: { lower: number; upper: number | null };
}

export interface TextPayload {
  text_key: string;
  raw: string;
  text: string;
  lemmas: string[];
  lemma_counts: Record<string, number>;
  ads: AdSummary[];
}
