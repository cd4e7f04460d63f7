// End-to-end annotation workflow against a live backend serving a freshly
// generated fixture dataset. Covers: frame navigation, qid filtering, answer
// edits, common options, controversial/verified marks, review intervals,
// reload fidelity (a fresh client sees exactly the backend state), excluded
// badge state, and stale-read detection across two concurrent clients.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnnotationApi } from "../src/api.js";
import { AppController } from "../src/controller.js";

const SCENARIO = "invading_turn";

let workdir: string;
let server: ChildProcess | null = null;
let api: AnnotationApi;
let controller: AppController;

function buildFixture(datasetDir: string): void {
  const result = spawnSync(
    "python3",
    [
      "-m",
      "lanebench.cli",
      "run",
      "--scenario",
      SCENARIO,
      "--out",
      datasetDir,
      "--policy",
      "gt-echo",
      "--seed",
      "7",
      "--budget",
      "40",
    ],
    { encoding: "utf8" },
  );
  if (result.status !== 0) {
    throw new Error(
      `fixture run failed (${result.status}):\n${result.stdout}\n${result.stderr}`,
    );
  }
}

function startBackend(datasetDir: string): Promise<string> {
  const child = spawn(
    "python3",
    ["-m", "lanebench.cli", "serve", "--dataset", datasetDir, "--port", "0"],
    { env: { ...process.env, PYTHONUNBUFFERED: "1" } },
  );
  server = child;
  return new Promise((resolve, reject) => {
    let out = "";
    let err = "";
    const timer = setTimeout(() => {
      reject(new Error(`backend never announced an address:\n${out}\n${err}`));
    }, 60_000);
    child.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const match = out.match(/listening on (http:\/\/[0-9.]+:[0-9]+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    child.stderr!.on("data", (chunk: Buffer) => {
      err += chunk.toString();
    });
    child.once("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`backend exited early (${code}):\n${out}\n${err}`));
    });
  });
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "annotation-ui-"));
  const datasetDir = join(workdir, "dataset");
  buildFixture(datasetDir);
  const baseUrl = await startBackend(datasetDir);
  api = new AnnotationApi(baseUrl);
  controller = new AppController(api);
});

afterAll(() => {
  if (server !== null) {
    server.removeAllListeners("exit");
    server.kill();
  }
  rmSync(workdir, { recursive: true, force: true });
});

describe("annotation workflow", () => {
  const editedText = "The turning vehicle is yielding; maintain the lane.";
  const optionText = "No adjustment needed for this step.";
  let editedQid = 0;

  it("boots into the stored scenario on its first frame", async () => {
    await controller.boot();
    expect(controller.state.scenario).toBe(SCENARIO);
    expect(controller.state.frames.length).toBeGreaterThanOrEqual(2);
    expect(controller.state.frameIndex).toBe(controller.state.frames[0]);
    expect(controller.record).not.toBeNull();
    expect(controller.record!.status).toBe("raw");
    expect(controller.record!.qa_pairs.length).toBeGreaterThan(1);
    expect(controller.record!.images).toHaveLength(2);
  });

  it("serves the frame images referenced by the record", async () => {
    const file = controller.record!.images[0];
    const response = await fetch(api.imageUrl(SCENARIO, file));
    expect(response.ok).toBe(true);
    expect(response.headers.get("content-type")).toBe("image/png");
  });

  it("navigates next, previous, and jump across stored frames", async () => {
    const frames = controller.state.frames;
    expect(await controller.navigate({ kind: "next" })).toBe(true);
    expect(controller.state.frameIndex).toBe(frames[1]);
    expect(controller.record!.frame_index).toBe(frames[1]);

    expect(await controller.navigate({ kind: "previous" })).toBe(true);
    expect(controller.state.frameIndex).toBe(frames[0]);

    // previous on the first frame stays put
    expect(await controller.navigate({ kind: "previous" })).toBe(true);
    expect(controller.state.frameIndex).toBe(frames[0]);

    const last = frames[frames.length - 1];
    expect(await controller.navigate({ kind: "jump", frame: last })).toBe(true);
    expect(controller.state.frameIndex).toBe(last);

    // next on the last frame stays put
    expect(await controller.navigate({ kind: "next" })).toBe(true);
    expect(controller.state.frameIndex).toBe(last);

    expect(
      await controller.navigate({ kind: "jump", frame: frames[0] }),
    ).toBe(true);
    expect(controller.state.frameIndex).toBe(frames[0]);
  });

  it("rejects an out-of-range jump and leaves the view unchanged", async () => {
    const frameBefore = controller.state.frameIndex;
    const recordBefore = controller.record;
    expect(await controller.navigate({ kind: "jump", frame: 999 })).toBe(false);
    expect(controller.lastError).toContain("no stored frame 999");
    expect(controller.state.frameIndex).toBe(frameBefore);
    expect(controller.record).toBe(recordBefore);
  });

  it("filters by qid and obeys the blankness law", async () => {
    const record = controller.record!;
    editedQid = record.qa_pairs[0].qid;
    const matching = record.qa_pairs.filter((p) => p.qid === editedQid);

    expect(controller.applyQidFilter(String(editedQid))).toBe(true);
    const visible = controller.visibleQAs();
    expect(visible.length).toBe(matching.length);
    expect(visible.length).toBeLessThan(record.qa_pairs.length);
    expect(visible.every((p) => p.qid === editedQid)).toBe(true);

    // invalid token: inline error, filter unchanged
    expect(controller.applyQidFilter("19,bogus")).toBe(false);
    expect(controller.lastError).toContain("non-numeric");
    expect(controller.state.qidFilter).toEqual([editedQid]);

    // blank filter shows exactly what the backend returns unfiltered
    expect(controller.applyQidFilter("")).toBe(true);
    const frame = controller.state.frameIndex;
    const unfiltered = await api.qas(SCENARIO, { lo: frame, hi: frame + 1 });
    expect(controller.visibleQAs().length).toBe(unfiltered.matches.length);
  });

  it("edits an answer and the backend records the history", async () => {
    const before = await controller.historyFor(editedQid);
    expect(before).toBe(0);
    expect(await controller.editAnswer(editedQid, editedText)).toBe(true);

    const pair = controller.record!.qa_pairs.find((p) => p.qid === editedQid);
    expect(pair!.answer).toBe(editedText);
    expect(await controller.historyFor(editedQid)).toBe(1);

    // the edit persisted server-side, not just in the local record
    const fresh = await api.frame(SCENARIO, controller.state.frameIndex);
    const freshPair = fresh.record.qa_pairs.find((p) => p.qid === editedQid);
    expect(freshPair!.answer).toBe(editedText);
  });

  it("saves an edited answer as a common option for its qid", async () => {
    expect(
      await controller.editAnswer(editedQid, optionText, {
        saveAsOption: true,
      }),
    ).toBe(true);
    expect(await controller.commonOptions(editedQid)).toContain(optionText);

    // the option is offered when editing the same qid on another frame
    await controller.navigate({ kind: "next" });
    expect(await controller.commonOptions(editedQid)).toContain(optionText);
    await controller.navigate({ kind: "previous" });
  });

  it("marks the frame controversial, then verified, and never raw again", async () => {
    expect(await controller.markStatus("controversial")).toBe(true);
    expect(controller.record!.status).toBe("controversial");

    expect(await controller.markStatus("verified")).toBe(true);
    expect(controller.record!.status).toBe("verified");

    // the backend refuses to regress a reviewed frame; the view keeps the
    // verified status and surfaces the rejection inline
    expect(await controller.markStatus("raw")).toBe(false);
    expect(controller.lastError).not.toBeNull();
    expect(controller.record!.status).toBe("verified");
  });

  it("sets the review interval and excludes frames outside it", async () => {
    const frames = controller.state.frames;
    const entry = frames[1];
    const exit = frames[frames.length - 1];
    expect(await controller.setInterval(entry, exit)).toBe(true);
    expect(controller.state.entryFrame).toBe(entry);
    expect(controller.state.exitFrame).toBe(exit);

    // navigation clamped into the interval off the now-excluded first frame
    expect(controller.state.frameIndex).toBe(entry);
    expect(controller.excluded).toBe(false);

    expect(controller.frameExcluded(frames[0])).toBe(true);
    expect(controller.frameExcluded(entry)).toBe(false);
    expect(controller.frameExcluded(exit)).toBe(true);

    // excluded frames still load, flagged by the backend as excluded
    await controller.navigate({ kind: "jump", frame: frames[0] });
    expect(controller.excluded).toBe(true);
    await controller.navigate({ kind: "jump", frame: entry });
    expect(controller.excluded).toBe(false);
  });

  it("reproduces the backend state exactly after a reload", async () => {
    const frames = controller.state.frames;
    const reloaded = new AppController(new AnnotationApi(api.baseUrl));
    await reloaded.boot();

    expect(reloaded.state.scenario).toBe(SCENARIO);
    expect(reloaded.state.frames).toEqual(frames);
    expect(reloaded.state.entryFrame).toBe(controller.state.entryFrame);
    expect(reloaded.state.exitFrame).toBe(controller.state.exitFrame);

    // boot lands on the first stored frame, which is now outside the interval
    expect(reloaded.state.frameIndex).toBe(frames[0]);
    expect(reloaded.excluded).toBe(true);

    const pair = reloaded.record!.qa_pairs.find((p) => p.qid === editedQid);
    expect(pair!.answer).toBe(optionText);
    expect(reloaded.record!.status).toBe("verified");
    expect(await reloaded.commonOptions(editedQid)).toContain(optionText);
    expect(await reloaded.historyFor(editedQid)).toBe(2);

    // blankness law holds on a fresh client too
    const unfiltered = await reloaded.api.qas(SCENARIO, {
      lo: frames[0],
      hi: frames[0] + 1,
    });
    expect(reloaded.visibleQAs().length).toBe(unfiltered.matches.length);
  });

  it("detects a stale read after another session writes", async () => {
    expect(await controller.checkStale()).toBe(false);

    const other = new AnnotationApi(api.baseUrl);
    const target = controller.state.frames[2];
    await other.mark(SCENARIO, target, "controversial");

    expect(await controller.checkStale()).toBe(true);
    expect(controller.stale).toBe(true);

    await controller.refresh();
    expect(controller.stale).toBe(false);
    expect(await controller.checkStale()).toBe(false);
    const refreshed = await api.frame(SCENARIO, target);
    expect(refreshed.record.status).toBe("controversial");
  });
});
