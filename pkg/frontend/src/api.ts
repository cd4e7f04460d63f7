// Typed client for the annotation backend. Every mutation response carries a
// version counter; callers use it to detect stale reads.

export type FrameStatus = "raw" | "controversial" | "verified";

export interface QAPairDoc {
  qid: number;
  question: string;
  answer: string;
  payload: unknown;
  frame_index: number;
}

export interface FrameRecordDoc {
  scenario: string;
  frame_index: number;
  qa_pairs: QAPairDoc[];
  policy_answers: Record<string, string>;
  images: string[];
  status: FrameStatus;
  [extra: string]: unknown;
}

export interface ScenarioSummary {
  entry_frame: number;
  exit_frame: number;
  stored: number;
  excluded: number;
  unreadable: number;
  raw: number;
  controversial: number;
  verified: number;
}

export interface OverviewResponse {
  scenarios: Record<string, ScenarioSummary>;
  version: number;
}

export interface ScenarioDetail {
  name: string;
  frames: number[];
  entry_frame: number;
  exit_frame: number;
  version: number;
}

export interface FrameResponse {
  record: FrameRecordDoc;
  excluded: boolean;
  version: number;
}

export interface QAMatch extends QAPairDoc {
  frame_index: number;
}

export interface QasResponse {
  matches: QAMatch[];
  version: number;
}

export interface EditRecordDoc {
  scenario: string;
  frame_index: number;
  qid: number;
  old_value: string;
  new_value: string;
  timestamp: number;
  marked_controversial: boolean;
}

export interface EditResponse {
  edit: EditRecordDoc | null;
  record: FrameRecordDoc;
  version: number;
}

export interface MarkResponse {
  record: FrameRecordDoc;
  version: number;
}

export interface OptionsResponse {
  options: string[];
  version?: number;
}

export interface IntervalResponse {
  entry_frame: number;
  exit_frame: number;
  version: number;
}

export interface QasFilter {
  qids?: number[];
  keyword?: string;
  lo?: number;
  hi?: number;
}

export interface EditRequest {
  scenario: string;
  frame_index: number;
  qid: number;
  new_text: string;
  mark?: FrameStatus;
  save_as_option?: boolean;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class AnnotationApi {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  version(): Promise<{ version: number }> {
    return this.request("/api/version");
  }

  overview(): Promise<OverviewResponse> {
    return this.request("/api/overview");
  }

  scenario(name: string): Promise<ScenarioDetail> {
    return this.request(`/api/scenario/${encodeURIComponent(name)}`);
  }

  frame(scenario: string, index: number): Promise<FrameResponse> {
    return this.request(`/api/frame/${encodeURIComponent(scenario)}/${index}`);
  }

  qas(scenario: string, filter: QasFilter = {}): Promise<QasResponse> {
    const params = new URLSearchParams();
    if (filter.qids && filter.qids.length > 0) {
      params.set("qids", filter.qids.join(","));
    }
    if (filter.keyword) params.set("keyword", filter.keyword);
    if (filter.lo !== undefined) params.set("lo", String(filter.lo));
    if (filter.hi !== undefined) params.set("hi", String(filter.hi));
    const qs = params.toString();
    return this.request(
      `/api/qas/${encodeURIComponent(scenario)}${qs ? "?" + qs : ""}`,
    );
  }

  history(
    scenario: string,
    filter: { frameIndex?: number; qid?: number } = {},
  ): Promise<{ edits: EditRecordDoc[] }> {
    const params = new URLSearchParams();
    if (filter.frameIndex !== undefined) {
      params.set("frame_index", String(filter.frameIndex));
    }
    if (filter.qid !== undefined) params.set("qid", String(filter.qid));
    const qs = params.toString();
    return this.request(
      `/api/history/${encodeURIComponent(scenario)}${qs ? "?" + qs : ""}`,
    );
  }

  options(qid: number): Promise<OptionsResponse> {
    return this.request(`/api/options/${qid}`);
  }

  allOptions(): Promise<{ options: Record<string, string[]> }> {
    return this.request("/api/options");
  }

  edit(body: EditRequest): Promise<EditResponse> {
    return this.request("/api/edit", { method: "POST", body });
  }

  mark(
    scenario: string,
    frameIndex: number,
    status: FrameStatus,
  ): Promise<MarkResponse> {
    return this.request("/api/mark", {
      method: "POST",
      body: { scenario, frame_index: frameIndex, status },
    });
  }

  addOption(qid: number, text: string): Promise<OptionsResponse> {
    return this.request("/api/options", {
      method: "POST",
      body: { qid, text },
    });
  }

  setInterval(
    scenario: string,
    entryFrame: number,
    exitFrame: number,
  ): Promise<IntervalResponse> {
    return this.request("/api/interval", {
      method: "PUT",
      body: { scenario, entry_frame: entryFrame, exit_frame: exitFrame },
    });
  }

  imageUrl(scenario: string, file: string): string {
    return `${this.baseUrl}/images/${encodeURIComponent(scenario)}/${encodeURIComponent(file)}`;
  }

  private async request<T>(
    path: string,
    init: { method?: string; body?: unknown } = {},
  ): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: init.method ?? "GET",
      headers: init.body !== undefined
        ? { "Content-Type": "application/json" }
        : undefined,
      body: init.body !== undefined ? JSON.stringify(init.body) : undefined,
    });
    let doc: unknown = null;
    try {
      doc = await response.json();
    } catch {
      throw new ApiError(response.status, "backend returned non-JSON");
    }
    if (!response.ok) {
      const message =
        doc && typeof doc === "object" && "error" in doc
          ? String((doc as { error: unknown }).error)
          : `backend returned ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return doc as T;
  }
}
