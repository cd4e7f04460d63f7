// Page bootstrap: owns the DOM shell, delegates every action to the
// controller, and re-renders panels after each change.

import { AnnotationApi, type QAPairDoc } from "./api.js";
import { AppController } from "./controller.js";
import { clampIntoInterval, imageSlots } from "./state.js";
import {
  renderEditPane,
  renderFrameStrip,
  renderImagePanes,
  renderIntervalForm,
  renderQAList,
  renderScenarioList,
  renderStaleBanner,
  renderToast,
} from "./views.js";

const STALE_POLL_MS = 4000;

function backendBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? window.location.origin;
}

function swap(id: string, node: HTMLElement | null): void {
  const host = document.getElementById(id);
  if (!host) return;
  host.replaceChildren();
  if (node) host.appendChild(node);
}

async function start(): Promise<void> {
  const api = new AnnotationApi(backendBase());
  let editing: QAPairDoc | null = null;

  const controller = new AppController(api, {
    onRender: () => void render(),
    onError: (message) => swap("toast-host", renderToast(message)),
    onStale: () => swap("stale-host", renderStaleBanner(() => {
      void controller.refresh();
      swap("stale-host", null);
    })),
  });

  async function openEditor(pair: QAPairDoc): Promise<void> {
    editing = pair;
    const [options, history] = await Promise.all([
      controller.commonOptions(pair.qid),
      api.history(controller.state.scenario, {
        frameIndex: controller.state.frameIndex,
        qid: pair.qid,
      }),
    ]);
    swap(
      "editor",
      renderEditPane(pair, options, history.edits, {
        onSave: (text) => {
          void controller
            .editAnswer(pair.qid, text)
            .then((ok) => ok && closeEditor());
        },
        onSaveAsOption: (text) => {
          void controller
            .editAnswer(pair.qid, text, { saveAsOption: true })
            .then((ok) => ok && closeEditor());
        },
        onMarkControversial: (text) => {
          void controller
            .editAnswer(pair.qid, text, { markControversial: true })
            .then((ok) => ok && closeEditor());
        },
        onCancel: closeEditor,
      }),
    );
  }

  function closeEditor(): void {
    editing = null;
    swap("editor", null);
  }

  async function render(): Promise<void> {
    const { state, record } = controller;
    if (controller.overview) {
      swap(
        "scenarios",
        renderScenarioList(controller.overview, state.scenario, (name) => {
          closeEditor();
          void controller.selectScenario(name);
        }),
      );
    }
    if (!record) return;
    swap(
      "frame-strip",
      renderFrameStrip(state, record.status, {
        onPrevious: () => void controller.navigate({ kind: "previous" }),
        onNext: () => void controller.navigate({ kind: "next" }),
        onJump: (frame) => void controller.navigate({ kind: "jump", frame }),
      }),
    );
    swap(
      "qa-list",
      renderQAList(
        controller.visibleQAs(),
        state.viewMode,
        record.policy_answers,
        (pair) => void openEditor(pair),
      ),
    );
    swap(
      "images",
      renderImagePanes(
        imageSlots(state, record.images),
        state,
        (file) => api.imageUrl(state.scenario, file),
        {
          onPin: (name) => controller.pinImage(name),
          onStickToggle: (stick) => controller.setImagesStick(stick),
        },
      ),
    );
    swap(
      "interval",
      renderIntervalForm(state, (entry, exit) => {
        void controller.setInterval(entry, exit);
      }),
    );
    if (editing) {
      const fresh = record.qa_pairs.find((p) => p.qid === editing?.qid);
      if (fresh) void openEditor(fresh);
    }
  }

  const filterInput = document.getElementById(
    "qid-filter",
  ) as HTMLInputElement | null;
  filterInput?.addEventListener("change", () => {
    if (controller.applyQidFilter(filterInput.value)) {
      filterInput.classList.remove("invalid");
    } else {
      filterInput.classList.add("invalid");
    }
  });

  const modeSelect = document.getElementById(
    "view-mode",
  ) as HTMLSelectElement | null;
  modeSelect?.addEventListener("change", () => {
    controller.setViewMode(modeSelect.value === "full" ? "full" : "vqa-only");
  });

  const markVerified = document.getElementById("mark-verified");
  markVerified?.addEventListener("click", () => {
    void controller.markStatus("verified");
  });
  const markControversial = document.getElementById("mark-controversial");
  markControversial?.addEventListener("click", () => {
    void controller.markStatus("controversial");
  });

  window.setInterval(() => {
    void controller.checkStale();
  }, STALE_POLL_MS);

  await controller.boot();
  // keep the landing frame inside the review interval
  const clamped = clampIntoInterval(controller.state);
  if (clamped !== controller.state.frameIndex) {
    await controller.loadFrame(clamped);
  }
}

window.addEventListener("DOMContentLoaded", () => {
  void start().catch((error) => {
    swap("toast-host", renderToast(String(error)));
  });
});
