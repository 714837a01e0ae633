import { describe, expect, it } from "vitest";

import {
  advance,
  annotatedBy,
  currentSample,
  initialState,
  pendingFor,
  progress,
  replaceSamples,
  upsertSample,
  type SessionState,
} from "../src/state.js";
import type { AnnotationDoc, SampleDoc, SampleStatus } from "../src/types.js";

function sample(
  id: number,
  status: SampleStatus = "pending",
  annotations: AnnotationDoc[] = [],
): SampleDoc {
  return {
    sample_id: id,
    x: id * 10,
    y: 0,
    stratum_id: "s",
    source_product: "truth",
    status,
    annotations,
    final: null,
  };
}

function note(expert: string, round = 1): AnnotationDoc {
  return { expert_id: expert, label: "Water", confidence: 1, round, timestamp: "t" };
}

function session(samples: SampleDoc[], expertId = "expert-a"): SessionState {
  return { ...replaceSamples(initialState(), samples), expertId };
}

describe("pendingFor", () => {
  it("lists samples this expert has not labelled", () => {
    const samples = [
      sample(0),
      sample(1, "partially-annotated", [note("expert-b")]),
      sample(2, "partially-annotated", [note("expert-a")]),
      sample(3, "needs-review", [note("expert-a"), note("expert-b")]),
      sample(4, "finalized", [note("expert-a"), note("expert-b")]),
    ];
    expect(pendingFor(samples, "expert-a").map((s) => s.sample_id)).toEqual([0, 1]);
    expect(pendingFor(samples, "expert-b").map((s) => s.sample_id)).toEqual([0, 2]);
  });

  it("detects round-1 annotations only", () => {
    const s = sample(0, "pending", [note("expert-a", 2)]);
    expect(annotatedBy(s, "expert-a")).toBe(false);
  });
});

describe("cursor", () => {
  it("starts at the first pending sample", () => {
    const state = session([sample(0), sample(1)]);
    expect(currentSample(state)?.sample_id).toBe(0);
  });

  it("stays on the cursor sample while it is visible", () => {
    const state = { ...session([sample(0), sample(1), sample(2)]), cursorId: 1 };
    expect(currentSample(state)?.sample_id).toBe(1);
  });

  it("falls back to the first pending sample when the cursor vanishes", () => {
    const state = {
      ...session([sample(0), sample(1, "finalized", [note("expert-a"), note("expert-b")])]),
      cursorId: 1,
    };
    expect(currentSample(state)?.sample_id).toBe(0);
  });

  it("advance wraps around the pending list", () => {
    let state = { ...session([sample(0), sample(1), sample(2)]), cursorId: 2 };
    state = advance(state);
    expect(state.cursorId).toBe(0);
  });

  it("advance clears the cursor when nothing is pending", () => {
    const done = sample(0, "finalized", [note("expert-a"), note("expert-b")]);
    const state = advance({ ...session([done]), cursorId: 0 });
    expect(state.cursorId).toBeNull();
    expect(currentSample(state)).toBeNull();
  });
});

describe("upsertSample", () => {
  it("replaces the cached copy in place", () => {
    let state = session([sample(0), sample(1)]);
    const updated = sample(1, "partially-annotated", [note("expert-a")]);
    state = upsertSample(state, updated);
    expect(state.samples).toHaveLength(2);
    expect(state.samples[1].status).toBe("partially-annotated");
  });

  it("appends unknown samples", () => {
    const state = upsertSample(session([sample(0)]), sample(9));
    expect(state.samples.map((s) => s.sample_id)).toEqual([0, 9]);
  });
});

describe("progress", () => {
  it("counts finalized, review and my pending samples", () => {
    const state = session([
      sample(0),
      sample(1, "needs-review", [note("expert-a"), note("expert-b")]),
      sample(2, "finalized", [note("expert-a"), note("expert-b")]),
    ]);
    expect(progress(state)).toEqual({
      total: 3,
      finalized: 1,
      needsReview: 1,
      minePending: 1,
    });
  });
});
