// DOM builders. Each function renders one panel from plain data and wires
// the supplied handlers; main.ts swaps them into the page on every render.
// No framework: the whole UI is a handful of elements.

import type {
  EditRecordDoc,
  FrameStatus,
  OverviewResponse,
  QAPairDoc,
} from "./api.js";
import type { ViewMode, ViewState } from "./state.js";
import { isExcluded, isFirstFrame, isLastFrame } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderScenarioList(
  overview: OverviewResponse,
  active: string,
  onSelect: (name: string) => void,
): HTMLElement {
  const list = el("ul", "scenario-list");
  for (const name of Object.keys(overview.scenarios).sort()) {
    const summary = overview.scenarios[name];
    const item = el("li", name === active ? "scenario active" : "scenario");
    const button = el("button", "scenario-name", name);
    button.addEventListener("click", () => onSelect(name));
    item.appendChild(button);
    item.appendChild(
      el(
        "span",
        "scenario-counts",
        `${summary.stored} frames, ${summary.verified} verified`,
      ),
    );
    list.appendChild(item);
  }
  return list;
}

export function renderStatusChip(status: FrameStatus): HTMLElement {
  return el("span", `status-chip status-${status}`, status);
}

export interface FrameStripHandlers {
  onPrevious: () => void;
  onNext: () => void;
  onJump: (frame: number) => void;
}

export function renderFrameStrip(
  state: ViewState,
  status: FrameStatus,
  handlers: FrameStripHandlers,
): HTMLElement {
  const strip = el("div", "frame-strip");

  const previous = el("button", "nav-previous", "previous");
  previous.disabled = isFirstFrame(state);
  previous.addEventListener("click", handlers.onPrevious);
  strip.appendChild(previous);

  const position = state.frames.indexOf(state.frameIndex);
  strip.appendChild(
    el(
      "span",
      "frame-position",
      `frame ${state.frameIndex} (${position + 1}/${state.frames.length})`,
    ),
  );

  const next = el("button", "nav-next", "next");
  next.disabled = isLastFrame(state);
  next.addEventListener("click", handlers.onNext);
  strip.appendChild(next);

  const jump = el("input", "jump-input") as HTMLInputElement;
  jump.type = "number";
  jump.placeholder = "frame";
  const go = el("button", "jump-go", "jump");
  go.addEventListener("click", () => handlers.onJump(Number(jump.value)));
  strip.appendChild(jump);
  strip.appendChild(go);

  strip.appendChild(renderStatusChip(status));
  if (isExcluded(state, state.frameIndex)) {
    strip.appendChild(el("span", "badge-excluded", "excluded"));
  }
  return strip;
}

export function renderQAList(
  pairs: QAPairDoc[],
  viewMode: ViewMode,
  policyAnswers: Record<string, string>,
  onEdit: (pair: QAPairDoc) => void,
): HTMLElement {
  const list = el("div", "qa-list");
  for (const pair of pairs) {
    const card = el("div", "qa-card");
    card.dataset.qid = String(pair.qid);
    const head = el("div", "qa-head");
    head.appendChild(el("span", "qa-qid", `Q${pair.qid}`));
    const edit = el("button", "qa-edit", "edit");
    edit.addEventListener("click", () => onEdit(pair));
    head.appendChild(edit);
    card.appendChild(head);
    card.appendChild(el("p", "qa-question", pair.question));
    card.appendChild(el("p", "qa-answer", pair.answer));
    const policy = policyAnswers[String(pair.qid)];
    if (policy !== undefined) {
      card.appendChild(el("p", "qa-policy-answer", policy));
    }
    if (viewMode === "full" && pair.payload != null) {
      // full view exposes the raw per-question metadata; vqa-only hides it
      card.appendChild(
        el("pre", "qa-metadata", JSON.stringify(pair.payload, null, 2)),
      );
    }
    list.appendChild(card);
  }
  return list;
}

export interface EditPaneHandlers {
  onSave: (text: string) => void;
  onSaveAsOption: (text: string) => void;
  onMarkControversial: (text: string) => void;
  onCancel: () => void;
}

export function renderEditPane(
  pair: QAPairDoc,
  options: string[],
  history: EditRecordDoc[],
  handlers: EditPaneHandlers,
): HTMLElement {
  const pane = el("div", "edit-pane");
  pane.dataset.qid = String(pair.qid);
  pane.appendChild(el("h3", "edit-title", `Edit Q${pair.qid}`));
  pane.appendChild(el("p", "edit-question", pair.question));

  const text = el("textarea", "edit-text") as HTMLTextAreaElement;
  text.value = pair.answer;
  pane.appendChild(text);

  const optionList = el("ul", "common-options");
  for (const option of options) {
    const item = el("li", "common-option");
    const use = el("button", "option-use", option);
    use.addEventListener("click", () => {
      text.value = option;
    });
    item.appendChild(use);
    optionList.appendChild(item);
  }
  pane.appendChild(optionList);

  const actions = el("div", "edit-actions");
  const save = el("button", "edit-save", "save");
  save.addEventListener("click", () => handlers.onSave(text.value));
  const saveOption = el("button", "edit-save-option", "save as option");
  saveOption.addEventListener("click", () =>
    handlers.onSaveAsOption(text.value),
  );
  const controversial = el(
    "button",
    "edit-mark-controversial",
    "mark controversial",
  );
  controversial.addEventListener("click", () =>
    handlers.onMarkControversial(text.value),
  );
  const cancel = el("button", "edit-cancel", "cancel");
  cancel.addEventListener("click", handlers.onCancel);
  for (const button of [save, saveOption, controversial, cancel]) {
    actions.appendChild(button);
  }
  pane.appendChild(actions);

  if (history.length > 0) {
    const log = el("ul", "edit-history");
    for (const entry of history) {
      log.appendChild(
        el(
          "li",
          "edit-history-entry",
          `"${entry.old_value}" -> "${entry.new_value}"`,
        ),
      );
    }
    pane.appendChild(log);
  }
  return pane;
}

export interface ImagePaneHandlers {
  onPin: (name: string | null) => void;
  onStickToggle: (stick: boolean) => void;
}

export function renderImagePanes(
  slots: (string | null)[],
  state: ViewState,
  imageUrl: (file: string) => string,
  handlers: ImagePaneHandlers,
): HTMLElement {
  const panes = el("div", "image-panes");
  slots.forEach((name, index) => {
    const pane = el("div", "image-slot");
    pane.dataset.slot = String(index);
    if (name !== null) {
      const img = el("img", "frame-image") as HTMLImageElement;
      img.src = imageUrl(name);
      img.alt = name;
      pane.appendChild(img);
      const pinned = state.pinnedImage === name;
      const pin = el("button", "image-pin", pinned ? "unpin" : "pin");
      pin.addEventListener("click", () =>
        handlers.onPin(pinned ? null : name),
      );
      pane.appendChild(pin);
      if (pinned) pane.appendChild(el("span", "badge-pinned", "pinned"));
    } else {
      pane.appendChild(el("span", "image-empty", "no image"));
    }
    panes.appendChild(pane);
  });
  const stick = el("label", "images-stick");
  const box = el("input") as HTMLInputElement;
  box.type = "checkbox";
  box.checked = state.imagesStick;
  box.addEventListener("change", () => handlers.onStickToggle(box.checked));
  stick.appendChild(box);
  stick.appendChild(document.createTextNode(" images stick"));
  panes.appendChild(stick);
  return panes;
}

export function renderIntervalForm(
  state: ViewState,
  onSet: (entry: number, exit: number) => void,
): HTMLElement {
  const form = el("div", "interval-form");
  const entry = el("input", "interval-entry") as HTMLInputElement;
  entry.type = "number";
  entry.value = String(state.entryFrame);
  const exit = el("input", "interval-exit") as HTMLInputElement;
  exit.type = "number";
  exit.value = String(state.exitFrame);
  const apply = el("button", "interval-apply", "set interval");
  apply.addEventListener("click", () =>
    onSet(Number(entry.value), Number(exit.value)),
  );
  form.appendChild(el("span", "interval-label", "review interval"));
  form.appendChild(entry);
  form.appendChild(exit);
  form.appendChild(apply);
  return form;
}

export function renderToast(message: string): HTMLElement {
  return el("div", "toast toast-error", message);
}

export function renderStaleBanner(onRefresh: () => void): HTMLElement {
  const banner = el(
    "div",
    "stale-banner",
    "another session changed this dataset ",
  );
  const refresh = el("button", "stale-refresh", "refresh");
  refresh.addEventListener("click", onRefresh);
  banner.appendChild(refresh);
  return banner;
}
