import type { Verdict } from './verdicts.js';

export interface Progress {
  total: number;
  by_status: Record<string, number>;
  judgments: number;
  by_annotator: Record<string, number>;
}

export interface AnnotationView {
  job_id: string;
  // Original and both rephrasings, in server-randomized order with no labels.
  sentences: [string, string, string];
  permutation_token: string;
  progress: Progress;
}

export type NextResult =
  | { done: false; view: AnnotationView }
  | { done: true; progress: Progress };

export interface JudgmentAck {
  job_id: string;
  status: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let detail = response.statusText || `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === 'string') detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base = '',
  ) {}

  async fetchNext(annotator: string): Promise<NextResult> {
    const url = `${this.base}/api/next?annotator=${encodeURIComponent(annotator)}`;
    const response = await this.fetchFn(url);
    if (!response.ok) throw await errorFrom(response);
    const body = await response.json();
    if (body.done) return { done: true, progress: body.progress };
    return {
      done: false,
      view: {
        job_id: body.job_id,
        sentences: body.sentences,
        permutation_token: body.permutation_token,
        progress: body.progress,
      },
    };
  }

  async submitJudgment(judgment: {
    job_id: string;
    annotator: string;
    verdict: Verdict;
    permutation_token: string;
  }): Promise<JudgmentAck> {
    const response = await this.fetchFn(`${this.base}/api/judgments`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(judgment),
    });
    if (!response.ok) throw await errorFrom(response);
    return response.json();
  }

  async fetchProgress(): Promise<Progress> {
    const response = await this.fetchFn(`${this.base}/api/progress`);
    if (!response.ok) throw await errorFrom(response);
    return response.json();
  }
}
