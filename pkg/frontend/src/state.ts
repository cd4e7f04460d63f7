// View state and the pure rules behind navigation, filtering, and exclusion.
// Everything here is synchronous and side-effect free so the rules are
// testable without a DOM or a backend.

import type { QAPairDoc } from "./api.js";

export type ViewMode = "vqa-only" | "full";

export interface ViewState {
  scenario: string;
  frames: number[]; // stored frame indices, ascending
  frameIndex: number; // invariant: one of `frames`
  entryFrame: number;
  exitFrame: number; // exclusive
  viewMode: ViewMode;
  qidFilter: number[]; // empty filter means every question
  pinnedImage: string | null;
  imagesStick: boolean;
  knownVersion: number;
}

export class FilterError extends Error {}

export class NavigationError extends Error {}

export type NavigationTarget =
  | { kind: "previous" }
  | { kind: "next" }
  | { kind: "jump"; frame: number };

export function initialViewState(): ViewState {
  return {
    scenario: "",
    frames: [],
    frameIndex: 0,
    entryFrame: 0,
    exitFrame: 0,
    viewMode: "vqa-only",
    qidFilter: [],
    pinnedImage: null,
    imagesStick: true,
    knownVersion: 0,
  };
}

/** Parse a comma/space separated qid filter; blank means "all questions". */
export function parseQidFilter(text: string): number[] {
  const tokens = text.split(/[\s,]+/).filter((t) => t.length > 0);
  const qids: number[] = [];
  for (const token of tokens) {
    if (!/^\d+$/.test(token)) {
      throw new FilterError(`non-numeric qid filter token "${token}"`);
    }
    const qid = Number(token);
    if (!qids.includes(qid)) qids.push(qid);
  }
  return qids;
}

/** Blankness law: an empty filter renders every QA pair unchanged. */
export function filterQAs(
  pairs: QAPairDoc[],
  qidFilter: number[],
): QAPairDoc[] {
  if (qidFilter.length === 0) return pairs.slice();
  return pairs.filter((pair) => qidFilter.includes(pair.qid));
}

/** Resolve a navigation target to a stored frame index.
 *
 * previous/next at the boundary stay put (the buttons are disabled there);
 * a jump to a frame that is not stored raises NavigationError and the caller
 * leaves the view unchanged.
 */
export function navigate(state: ViewState, target: NavigationTarget): number {
  const position = state.frames.indexOf(state.frameIndex);
  if (position < 0) {
    throw new NavigationError(
      `current frame ${state.frameIndex} is not stored`,
    );
  }
  if (target.kind === "previous") {
    return position === 0 ? state.frameIndex : state.frames[position - 1];
  }
  if (target.kind === "next") {
    return position === state.frames.length - 1
      ? state.frameIndex
      : state.frames[position + 1];
  }
  if (!state.frames.includes(target.frame)) {
    throw new NavigationError(`no stored frame ${target.frame}`);
  }
  return target.frame;
}

export function isFirstFrame(state: ViewState): boolean {
  return state.frames.indexOf(state.frameIndex) === 0;
}

export function isLastFrame(state: ViewState): boolean {
  return state.frames.indexOf(state.frameIndex) === state.frames.length - 1;
}

/** A frame outside the half-open review interval [entry, exit) is excluded.
 * Excluded frames still load and display, just with the badge. */
export function isExcluded(state: ViewState, frame: number): boolean {
  return !(state.entryFrame <= frame && frame < state.exitFrame);
}

/** Nearest stored frame inside the interval, used to clamp navigation after
 * the interval shrinks below the current frame. Falls back to the current
 * frame when the interval contains no stored frame at all. */
export function clampIntoInterval(state: ViewState): number {
  if (!isExcluded(state, state.frameIndex)) return state.frameIndex;
  const inside = state.frames.filter((f) => !isExcluded(state, f));
  if (inside.length === 0) return state.frameIndex;
  let best = inside[0];
  for (const frame of inside) {
    if (
      Math.abs(frame - state.frameIndex) < Math.abs(best - state.frameIndex)
    ) {
      best = frame;
    }
  }
  return best;
}

/** True when the backend moved past the version this view last saw. */
export function staleRead(state: ViewState, serverVersion: number): boolean {
  return serverVersion > state.knownVersion;
}

/** The two image slots: a pinned reference stays in the first slot across
 * navigation while images-stick is on; the rest fill from the frame. */
export function imageSlots(
  state: ViewState,
  frameImages: string[],
): (string | null)[] {
  const slots: (string | null)[] = [null, null];
  if (state.imagesStick && state.pinnedImage !== null) {
    slots[0] = state.pinnedImage;
    slots[1] = frameImages.find((name) => name !== state.pinnedImage) ?? null;
    return slots;
  }
  slots[0] = frameImages[0] ?? null;
  slots[1] = frameImages[1] ?? null;
  return slots;
}
