// @vitest-environment jsdom

import { describe, expect, it, vi } from "vitest";

import type { EditRecordDoc, OverviewResponse, QAPairDoc } from "../src/api.js";
import { initialViewState, type ViewState } from "../src/state.js";
import {
  renderEditPane,
  renderFrameStrip,
  renderImagePanes,
  renderIntervalForm,
  renderQAList,
  renderScenarioList,
  renderStaleBanner,
  renderStatusChip,
  renderToast,
} from "../src/views.js";

function makeState(overrides: Partial<ViewState> = {}): ViewState {
  return {
    ...initialViewState(),
    scenario: "demo",
    frames: [0, 5, 10],
    frameIndex: 5,
    entryFrame: 0,
    exitFrame: 11,
    ...overrides,
  };
}

function qa(qid: number, payload: Record<string, unknown> = {}): QAPairDoc {
  return {
    qid,
    question: `question ${qid}`,
    answer: `answer ${qid}`,
    payload,
    frame_index: 0,
  };
}

const noNav = { onPrevious: () => {}, onNext: () => {}, onJump: () => {} };

describe("renderFrameStrip", () => {
  it("disables previous on the first frame and next on the last", () => {
    const first = renderFrameStrip(makeState({ frameIndex: 0 }), "raw", noNav);
    expect(
      (first.querySelector(".nav-previous") as HTMLButtonElement).disabled,
    ).toBe(true);
    expect(
      (first.querySelector(".nav-next") as HTMLButtonElement).disabled,
    ).toBe(false);

    const last = renderFrameStrip(makeState({ frameIndex: 10 }), "raw", noNav);
    expect(
      (last.querySelector(".nav-previous") as HTMLButtonElement).disabled,
    ).toBe(false);
    expect(
      (last.querySelector(".nav-next") as HTMLButtonElement).disabled,
    ).toBe(true);
  });

  it("shows the excluded badge only outside the review interval", () => {
    const inside = renderFrameStrip(makeState(), "raw", noNav);
    expect(inside.querySelector(".badge-excluded")).toBeNull();

    const outside = renderFrameStrip(
      makeState({ entryFrame: 5, exitFrame: 10, frameIndex: 10 }),
      "raw",
      noNav,
    );
    const badge = outside.querySelector(".badge-excluded");
    expect(badge).not.toBeNull();
    expect(badge!.textContent).toBe("excluded");
  });

  it("passes the typed frame number to the jump handler", () => {
    const onJump = vi.fn();
    const strip = renderFrameStrip(makeState(), "raw", { ...noNav, onJump });
    (strip.querySelector(".jump-input") as HTMLInputElement).value = "10";
    (strip.querySelector(".jump-go") as HTMLButtonElement).click();
    expect(onJump).toHaveBeenCalledWith(10);
  });

  it("renders the frame status chip", () => {
    const strip = renderFrameStrip(makeState(), "verified", noNav);
    const chip = strip.querySelector(".status-chip");
    expect(chip!.className).toContain("status-verified");
    expect(chip!.textContent).toBe("verified");
  });
});

describe("renderQAList", () => {
  const pairs = [qa(19, { ids: ["o1"] }), qa(43)];

  it("hides per-question metadata in vqa-only mode", () => {
    const list = renderQAList(pairs, "vqa-only", {}, () => {});
    expect(list.querySelectorAll(".qa-card")).toHaveLength(2);
    expect(list.querySelector(".qa-metadata")).toBeNull();
  });

  it("shows per-question metadata in full mode", () => {
    const list = renderQAList(pairs, "full", {}, () => {});
    const meta = list.querySelectorAll(".qa-metadata");
    expect(meta.length).toBe(2);
    expect(meta[0].textContent).toContain("o1");
  });

  it("shows a policy answer when one exists for the qid", () => {
    const list = renderQAList(pairs, "vqa-only", { "19": "policy text" }, () => {});
    const cards = list.querySelectorAll(".qa-card");
    expect(cards[0].querySelector(".qa-policy-answer")!.textContent).toBe(
      "policy text",
    );
    expect(cards[1].querySelector(".qa-policy-answer")).toBeNull();
  });

  it("passes the QA pair to the edit handler", () => {
    const onEdit = vi.fn();
    const list = renderQAList(pairs, "vqa-only", {}, onEdit);
    (list.querySelector('[data-qid="43"] .qa-edit') as HTMLButtonElement).click();
    expect(onEdit).toHaveBeenCalledWith(pairs[1]);
  });
});

describe("renderEditPane", () => {
  const history: EditRecordDoc[] = [
    {
      scenario: "demo",
      frame_index: 0,
      qid: 43,
      old_value: "before",
      new_value: "after",
      timestamp: 1.0,
      marked_controversial: false,
    },
  ];

  it("preloads the textarea with the current answer", () => {
    const pane = renderEditPane(qa(43), [], [], {
      onSave: () => {},
      onSaveAsOption: () => {},
      onMarkControversial: () => {},
      onCancel: () => {},
    });
    expect((pane.querySelector(".edit-text") as HTMLTextAreaElement).value).toBe(
      "answer 43",
    );
  });

  it("fills the textarea from a common option and saves that text", () => {
    const onSave = vi.fn();
    const pane = renderEditPane(qa(43), ["canned answer"], [], {
      onSave,
      onSaveAsOption: () => {},
      onMarkControversial: () => {},
      onCancel: () => {},
    });
    (pane.querySelector(".option-use") as HTMLButtonElement).click();
    const text = pane.querySelector(".edit-text") as HTMLTextAreaElement;
    expect(text.value).toBe("canned answer");
    (pane.querySelector(".edit-save") as HTMLButtonElement).click();
    expect(onSave).toHaveBeenCalledWith("canned answer");
  });

  it("routes save-as-option and mark-controversial separately", () => {
    const onSaveAsOption = vi.fn();
    const onMarkControversial = vi.fn();
    const pane = renderEditPane(qa(43), [], [], {
      onSave: () => {},
      onSaveAsOption,
      onMarkControversial,
      onCancel: () => {},
    });
    const text = pane.querySelector(".edit-text") as HTMLTextAreaElement;
    text.value = "revised";
    (pane.querySelector(".edit-save-option") as HTMLButtonElement).click();
    expect(onSaveAsOption).toHaveBeenCalledWith("revised");
    (
      pane.querySelector(".edit-mark-controversial") as HTMLButtonElement
    ).click();
    expect(onMarkControversial).toHaveBeenCalledWith("revised");
  });

  it("lists prior edits", () => {
    const pane = renderEditPane(qa(43), [], history, {
      onSave: () => {},
      onSaveAsOption: () => {},
      onMarkControversial: () => {},
      onCancel: () => {},
    });
    const entries = pane.querySelectorAll(".edit-history-entry");
    expect(entries).toHaveLength(1);
    expect(entries[0].textContent).toBe('"before" -> "after"');
  });
});

describe("renderImagePanes", () => {
  const imageUrl = (file: string) => `/images/demo/${file}`;

  it("renders both slots and badges the pinned image", () => {
    const state = makeState({ pinnedImage: "a.png", imagesStick: true });
    const panes = renderImagePanes(["a.png", "b.png"], state, imageUrl, {
      onPin: () => {},
      onStickToggle: () => {},
    });
    const slots = panes.querySelectorAll(".image-slot");
    expect(slots).toHaveLength(2);
    expect(slots[0].querySelector(".badge-pinned")).not.toBeNull();
    expect(slots[1].querySelector(".badge-pinned")).toBeNull();
    expect((slots[1].querySelector("img") as HTMLImageElement).src).toContain(
      "/images/demo/b.png",
    );
  });

  it("pins an unpinned image and unpins a pinned one", () => {
    const onPin = vi.fn();
    const unpinned = renderImagePanes(["a.png"], makeState(), imageUrl, {
      onPin,
      onStickToggle: () => {},
    });
    (unpinned.querySelector(".image-pin") as HTMLButtonElement).click();
    expect(onPin).toHaveBeenCalledWith("a.png");

    onPin.mockClear();
    const pinned = renderImagePanes(
      ["a.png"],
      makeState({ pinnedImage: "a.png" }),
      imageUrl,
      { onPin, onStickToggle: () => {} },
    );
    (pinned.querySelector(".image-pin") as HTMLButtonElement).click();
    expect(onPin).toHaveBeenCalledWith(null);
  });

  it("marks empty slots and reports stick toggles", () => {
    const onStickToggle = vi.fn();
    const panes = renderImagePanes([null, null], makeState(), imageUrl, {
      onPin: () => {},
      onStickToggle,
    });
    expect(panes.querySelectorAll(".image-empty")).toHaveLength(2);
    const box = panes.querySelector(
      ".images-stick input",
    ) as HTMLInputElement;
    expect(box.checked).toBe(true);
    box.checked = false;
    box.dispatchEvent(new Event("change"));
    expect(onStickToggle).toHaveBeenCalledWith(false);
  });
});

describe("renderScenarioList", () => {
  const overview: OverviewResponse = {
    scenarios: {
      b_scene: {
        entry_frame: 0,
        exit_frame: 4,
        stored: 4,
        excluded: 0,
        unreadable: 0,
        raw: 4,
        controversial: 0,
        verified: 0,
      },
      a_scene: {
        entry_frame: 0,
        exit_frame: 3,
        stored: 3,
        excluded: 0,
        unreadable: 0,
        raw: 1,
        controversial: 0,
        verified: 2,
      },
    },
    version: 0,
  };

  it("sorts scenarios, marks the active one, and selects on click", () => {
    const onSelect = vi.fn();
    const list = renderScenarioList(overview, "b_scene", onSelect);
    const items = list.querySelectorAll("li");
    expect(items[0].querySelector("button")!.textContent).toBe("a_scene");
    expect(items[1].className).toContain("active");
    expect(items[0].querySelector(".scenario-counts")!.textContent).toBe(
      "3 frames, 2 verified",
    );
    (items[0].querySelector("button") as HTMLButtonElement).click();
    expect(onSelect).toHaveBeenCalledWith("a_scene");
  });
});

describe("renderIntervalForm", () => {
  it("submits the typed entry and exit frames", () => {
    const onSet = vi.fn();
    const form = renderIntervalForm(makeState(), onSet);
    (form.querySelector(".interval-entry") as HTMLInputElement).value = "5";
    (form.querySelector(".interval-exit") as HTMLInputElement).value = "10";
    (form.querySelector(".interval-apply") as HTMLButtonElement).click();
    expect(onSet).toHaveBeenCalledWith(5, 10);
  });
});

describe("renderStatusChip", () => {
  it("carries the status in class and text", () => {
    const chip = renderStatusChip("controversial");
    expect(chip.className).toBe("status-chip status-controversial");
    expect(chip.textContent).toBe("controversial");
  });
});

describe("toast and stale banner", () => {
  it("renders an error toast", () => {
    const toast = renderToast("save rejected");
    expect(toast.className).toBe("toast toast-error");
    expect(toast.textContent).toBe("save rejected");
  });

  it("renders a stale banner whose refresh button fires", () => {
    const onRefresh = vi.fn();
    const banner = renderStaleBanner(onRefresh);
    expect(banner.className).toBe("stale-banner");
    (banner.querySelector(".stale-refresh") as HTMLButtonElement).click();
    expect(onRefresh).toHaveBeenCalled();
  });
});
