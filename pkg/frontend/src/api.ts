// Thin typed client for the warehouse service. The fetch function is
// injected so tests can drive it without a network.

import type { ApiErrorBody, Metadata, PivotRequest, PivotResponse, RefreshResponse } from './types.js';

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message || body.error);
    this.status = status;
    this.code = body.error;
    this.field = body.field;
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly token: string;
  private readonly fetchFn: FetchLike;
  private pivotSeq = 0;

  constructor(base: string, token: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, '');
    this.token = token;
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  async metadata(): Promise<Metadata> {
    return (await this.call('GET', '/api/metadata')) as Metadata;
  }

  /**
   * Run a pivot query. Responses that arrive after a newer pivot() call
   * was issued resolve to null so a slow request can never clobber the
   * latest grid.
   */
  async pivot(request: PivotRequest): Promise<PivotResponse | null> {
    const seq = ++this.pivotSeq;
    const response = (await this.call('POST', '/api/pivot', request)) as PivotResponse;
    return seq === this.pivotSeq ? response : null;
  }

  async refresh(): Promise<RefreshResponse> {
    return (await this.call('POST', '/api/refresh', { mode: 'full' })) as RefreshResponse;
  }

  private async call(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: { method: string; headers: Record<string, string>; body?: string } = {
      method,
      headers: { authorization: `Bearer ${this.token}` },
    };
    if (body !== undefined) {
      init.headers['content-type'] = 'application/json';
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    const payload = await response.json();
    if (response.status >= 400) {
      const err = (payload ?? {}) as ApiErrorBody;
      throw new ApiError(response.status, {
        error: err.error ?? 'UNKNOWN',
        message: err.message ?? `request failed with status ${response.status}`,
        field: err.field,
      });
    }
    return payload;
  }
}
