// Application controller: every user action goes through here, and every
// write goes to the backend (the UI owns no persistent state of its own).
// main.ts binds DOM events to these methods; the workflow tests drive them
// directly against a live backend.

import {
  AnnotationApi,
  ApiError,
  type FrameRecordDoc,
  type FrameStatus,
  type OverviewResponse,
  type QAPairDoc,
} from "./api.js";
import {
  clampIntoInterval,
  filterQAs,
  initialViewState,
  isExcluded,
  navigate,
  parseQidFilter,
  staleRead,
  type NavigationTarget,
  type ViewMode,
  type ViewState,
} from "./state.js";

export interface ControllerEvents {
  onRender?: () => void;
  onError?: (message: string) => void;
  onStale?: (serverVersion: number) => void;
}

export class AppController {
  state: ViewState = initialViewState();
  overview: OverviewResponse | null = null;
  record: FrameRecordDoc | null = null;
  excluded = false;
  optionsByQid: Map<number, string[]> = new Map();
  lastError: string | null = null;
  stale = false;

  constructor(
    public api: AnnotationApi,
    private events: ControllerEvents = {},
  ) {}

  /** Load the overview and open the first scenario. */
  async boot(): Promise<void> {
    this.overview = await this.api.overview();
    this.trackVersion(this.overview.version);
    const names = Object.keys(this.overview.scenarios).sort();
    if (names.length > 0) {
      await this.selectScenario(names[0]);
    }
  }

  async selectScenario(name: string): Promise<void> {
    const detail = await this.api.scenario(name);
    this.state.scenario = name;
    this.state.frames = detail.frames;
    this.state.entryFrame = detail.entry_frame;
    this.state.exitFrame = detail.exit_frame;
    this.state.frameIndex = detail.frames[0];
    this.trackVersion(detail.version);
    await this.loadFrame(this.state.frameIndex);
  }

  /** navigate(previous | next | jump): refresh the frame or report an
   * inline error and leave the view unchanged. */
  async navigate(target: NavigationTarget): Promise<boolean> {
    let frame: number;
    try {
      frame = navigate(this.state, target);
    } catch (error) {
      this.fail(error);
      return false;
    }
    if (frame !== this.state.frameIndex || this.record === null) {
      await this.loadFrame(frame);
    }
    return true;
  }

  async loadFrame(frame: number): Promise<void> {
    const response = await this.api.frame(this.state.scenario, frame);
    this.state.frameIndex = frame;
    this.record = response.record;
    this.excluded = response.excluded;
    this.trackVersion(response.version);
    this.lastError = null;
    this.events.onRender?.();
  }

  /** QAs of the current frame under the active qid filter. */
  visibleQAs(): QAPairDoc[] {
    if (this.record === null) return [];
    return filterQAs(this.record.qa_pairs, this.state.qidFilter);
  }

  /** Apply a qid filter string; invalid tokens report inline and keep the
   * previous filter. Blank text clears the filter (all questions). */
  applyQidFilter(text: string): boolean {
    try {
      this.state.qidFilter = parseQidFilter(text);
    } catch (error) {
      this.fail(error);
      return false;
    }
    this.lastError = null;
    this.events.onRender?.();
    return true;
  }

  setViewMode(mode: ViewMode): void {
    this.state.viewMode = mode;
    this.events.onRender?.();
  }

  pinImage(name: string | null): void {
    this.state.pinnedImage = name;
    this.events.onRender?.();
  }

  setImagesStick(stick: boolean): void {
    this.state.imagesStick = stick;
    this.events.onRender?.();
  }

  /** Save an edited answer; optionally store it as a common option or mark
   * the frame controversial in the same write. On backend rejection the
   * local state stays unchanged and the error surfaces inline. */
  async editAnswer(
    qid: number,
    newText: string,
    action: { saveAsOption?: boolean; markControversial?: boolean } = {},
  ): Promise<boolean> {
    try {
      const response = await this.api.edit({
        scenario: this.state.scenario,
        frame_index: this.state.frameIndex,
        qid,
        new_text: newText,
        mark: action.markControversial ? "controversial" : undefined,
        save_as_option: action.saveAsOption ? true : undefined,
      });
      this.record = response.record;
      this.state.knownVersion = response.version;
      this.optionsByQid.delete(qid); // refetched lazily after a new option
      this.lastError = null;
      this.events.onRender?.();
      return true;
    } catch (error) {
      this.fail(error);
      return false;
    }
  }

  async markStatus(status: FrameStatus): Promise<boolean> {
    try {
      const response = await this.api.mark(
        this.state.scenario,
        this.state.frameIndex,
        status,
      );
      this.record = response.record;
      this.state.knownVersion = response.version;
      this.lastError = null;
      this.events.onRender?.();
      return true;
    } catch (error) {
      this.fail(error);
      return false;
    }
  }

  /** Persist the review interval, then clamp navigation into it. */
  async setInterval(entryFrame: number, exitFrame: number): Promise<boolean> {
    try {
      const response = await this.api.setInterval(
        this.state.scenario,
        entryFrame,
        exitFrame,
      );
      this.state.entryFrame = response.entry_frame;
      this.state.exitFrame = response.exit_frame;
      this.state.knownVersion = response.version;
    } catch (error) {
      this.fail(error);
      return false;
    }
    await this.loadFrame(clampIntoInterval(this.state));
    return true;
  }

  /** Common options for one qid, cached until an edit invalidates them. */
  async commonOptions(qid: number): Promise<string[]> {
    const cached = this.optionsByQid.get(qid);
    if (cached !== undefined) return cached;
    const response = await this.api.options(qid);
    this.optionsByQid.set(qid, response.options);
    return response.options;
  }

  async historyFor(qid?: number): Promise<number> {
    const response = await this.api.history(this.state.scenario, {
      frameIndex: this.state.frameIndex,
      qid,
    });
    return response.edits.length;
  }

  frameExcluded(frame: number): boolean {
    return isExcluded(this.state, frame);
  }

  /** Poll the backend version; flips the stale banner when another writer
   * advanced it past what this view has seen. */
  async checkStale(): Promise<boolean> {
    const response = await this.api.version();
    this.stale = staleRead(this.state, response.version);
    if (this.stale) this.events.onStale?.(response.version);
    return this.stale;
  }

  /** Re-fetch everything the view depends on; clears the stale banner. */
  async refresh(): Promise<void> {
    const detail = await this.api.scenario(this.state.scenario);
    this.state.frames = detail.frames;
    this.state.entryFrame = detail.entry_frame;
    this.state.exitFrame = detail.exit_frame;
    this.trackVersion(detail.version);
    this.optionsByQid.clear();
    this.stale = false;
    await this.loadFrame(this.state.frameIndex);
  }

  private trackVersion(serverVersion: number): void {
    if (serverVersion > this.state.knownVersion) {
      this.state.knownVersion = serverVersion;
    }
  }

  private fail(error: unknown): void {
    const message =
      error instanceof ApiError || error instanceof Error
        ? error.message
        : String(error);
    this.lastError = message;
    this.events.onError?.(message);
  }
}
