// Thin typed client over the service's JSON endpoints. Every mutation in
// the app goes through postDecision/postIterate here; nothing else writes.

import type {
  Candidate,
  ConflictDetail,
  DecisionResponse,
  DemographicsData,
  DistributionData,
  IterationRecord,
  OwnershipEntry,
  ReportEnvelope,
  StatusPayload,
  SummaryRow,
  TextPayload,
  Theme,
  Verdict,
} from './types.js';

/** Non-2xx response; carries the HTTP status and the decoded detail. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`HTTP ${status}`);
  }

  conflict(): ConflictDetail | null {
    if (this.status !== 409) return null;
    return this.detail as ConflictDetail;
  }
}

/** fetch() itself failed: the service is down or unreachable. */
export class ServiceUnreachable extends Error {
  constructor(public readonly reason: unknown) {
    super('curation service unreachable');
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // some error responses carry no body; keep null
    }
    if (!response.ok) {
      const detail =
        body && typeof body === 'object' && 'detail' in body
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  getThemes(): Promise<Theme[]> {
    return this.request('/themes');
  }

  getCandidates(themeId: string): Promise<Candidate[]> {
    return this.request(`/themes/${encodeURIComponent(themeId)}/candidates`);
  }

  getText(textKey: string): Promise<TextPayload> {
    return this.request(`/texts/${encodeURIComponent(textKey)}`);
  }

  postDecision(lemma: string, themeId: string, verdict: Verdict): Promise<DecisionResponse> {
    return this.request('/decisions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ lemma, theme_id: themeId, verdict }),
    });
  }

  postIterate(): Promise<IterationRecord> {
    return this.request('/iterate', { method: 'POST' });
  }

  getStatus(): Promise<StatusPayload> {
    return this.request('/status');
  }

  getSummary(): Promise<ReportEnvelope<SummaryRow[]>> {
    return this.request('/reports/matched_summary');
  }

  getDistribution(basis: 'ads' | 'impressions'): Promise<ReportEnvelope<DistributionData>> {
    return this.request(`/reports/distribution_${basis}`);
  }

  getOwnership(): Promise<ReportEnvelope<OwnershipEntry[]>> {
    return this.request('/reports/ownership');
  }

  getDemographics(grouping: 'per_theme' | 'per_party'): Promise<ReportEnvelope<DemographicsData>> {
    return this.request(`/reports/demographics_${grouping}`);
  }
}
