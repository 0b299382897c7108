import { ApiClient, ApiError, AnnotationView, Progress } from './api.js';
import type { Verdict } from './verdicts.js';

export type Screen =
  | { kind: 'select-annotator' }
  | { kind: 'loading' }
  | { kind: 'annotating'; view: AnnotationView; submitting: boolean; notice: string | null }
  | { kind: 'done'; progress: Progress }
  | { kind: 'error'; message: string };

/**
 * All UI state and transitions, DOM-free so the whole flow is testable.
 *
 * Rules the transitions enforce:
 * - a verdict is only ever sent for the currently loaded job, and at most
 *   once per view (submit is a no-op while a request is in flight);
 * - the view advances only after the server acknowledged the judgment;
 * - a 401 anywhere sends the user back to annotator selection;
 * - a 409 means someone else finalized the job first: skip it with a
 *   notice and move on;
 * - network failures keep the current view so nothing is lost; the user
 *   retries explicitly.
 */
export class AnnotationController {
  private screenState: Screen = { kind: 'select-annotator' };
  private annotatorId: string | null = null;
  private lastProgress: Progress | null = null;
  private pendingNotice: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (screen: Screen) => void = () => {},
  ) {}

  get screen(): Screen {
    return this.screenState;
  }

  get annotator(): string | null {
    return this.annotatorId;
  }

  /** Latest progress counters reported by the server; never computed locally. */
  get progress(): Progress | null {
    return this.lastProgress;
  }

  async start(annotator: string): Promise<void> {
    const trimmed = annotator.trim();
    if (!trimmed) return;
    this.annotatorId = trimmed;
    await this.fetchNext();
  }

  signOut(): void {
    this.annotatorId = null;
    this.pendingNotice = null;
    this.setScreen({ kind: 'select-annotator' });
  }

  async fetchNext(): Promise<void> {
    if (this.annotatorId === null) {
      this.setScreen({ kind: 'select-annotator' });
      return;
    }
    this.setScreen({ kind: 'loading' });
    let result;
    try {
      result = await this.api.fetchNext(this.annotatorId);
    } catch (err) {
      this.handleFailure(err, 'Could not load the next item.');
      return;
    }
    this.lastProgress = result.done ? result.progress : result.view.progress;
    if (result.done) {
      this.setScreen({ kind: 'done', progress: result.progress });
    } else {
      this.setScreen({
        kind: 'annotating',
        view: result.view,
        submitting: false,
        notice: this.pendingNotice,
      });
      this.pendingNotice = null;
    }
  }

  async submit(verdict: Verdict): Promise<void> {
    const screen = this.screenState;
    if (screen.kind !== 'annotating' || screen.submitting) return;
    if (this.annotatorId === null) return;
    this.setScreen({ ...screen, submitting: true, notice: null });
    try {
      await this.api.submitJudgment({
        job_id: screen.view.job_id,
        annotator: this.annotatorId,
        verdict,
        permutation_token: screen.view.permutation_token,
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Finalized by a race with another annotator; nothing to record.
        this.pendingNotice = 'That item was already finalized; it was skipped.';
        await this.fetchNext();
        return;
      }
      if (err instanceof ApiError && err.status === 401) {
        this.signOut();
        return;
      }
      // Keep the loaded view so the annotator can simply try again.
      this.setScreen({
        ...screen,
        submitting: false,
        notice: 'Submitting failed. Check the connection and try again.',
      });
      return;
    }
    await this.fetchNext();
  }

  async retry(): Promise<void> {
    if (this.screenState.kind === 'error') await this.fetchNext();
  }

  private handleFailure(err: unknown, fallback: string): void {
    if (err instanceof ApiError && err.status === 401) {
      this.signOut();
      return;
    }
    const message = err instanceof Error && err.message ? err.message : fallback;
    this.setScreen({ kind: 'error', message });
  }

  private setScreen(screen: Screen): void {
    this.screenState = screen;
    this.onChange(screen);
  }
}
