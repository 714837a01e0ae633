// Session state for one expert's console: which samples still need this
// expert's round-1 label, where the cursor sits, and progress counters.
// All functions are pure; the server stays the source of truth and every
// mutation response is folded back in via upsertSample.

import type { SampleDoc } from "./types.js";

export interface SessionState {
  expertId: string | null;
  cursorId: number | null;
  samples: SampleDoc[];
}

export function initialState(): SessionState {
  return { expertId: null, cursorId: null, samples: [] };
}

export function annotatedBy(sample: SampleDoc, expertId: string): boolean {
  return sample.annotations.some((a) => a.round === 1 && a.expert_id === expertId);
}

/** Samples this expert can still give a round-1 label. */
export function pendingFor(samples: SampleDoc[], expertId: string): SampleDoc[] {
  return samples.filter(
    (s) =>
      (s.status === "pending" || s.status === "partially-annotated") &&
      !annotatedBy(s, expertId),
  );
}

export function currentSample(state: SessionState): SampleDoc | null {
  if (state.expertId === null) return null;
  const pending = pendingFor(state.samples, state.expertId);
  if (pending.length === 0) return null;
  const hit = pending.find((s) => s.sample_id === state.cursorId);
  return hit ?? pending[0];
}

/** Move the cursor to the next pending sample after the current one. */
export function advance(state: SessionState): SessionState {
  if (state.expertId === null) return state;
  const pending = pendingFor(state.samples, state.expertId);
  if (pending.length === 0) return { ...state, cursorId: null };
  const idx = pending.findIndex((s) => s.sample_id === state.cursorId);
  const next = pending[(idx + 1) % pending.length] ?? pending[0];
  return { ...state, cursorId: next.sample_id };
}

/** Fold a fresh server copy of one sample into the cache. */
export function upsertSample(state: SessionState, doc: SampleDoc): SessionState {
  const samples = state.samples.some((s) => s.sample_id === doc.sample_id)
    ? state.samples.map((s) => (s.sample_id === doc.sample_id ? doc : s))
    : [...state.samples, doc];
  return { ...state, samples };
}

export function replaceSamples(state: SessionState, samples: SampleDoc[]): SessionState {
  return { ...state, samples };
}

export interface Progress {
  total: number;
  finalized: number;
  needsReview: number;
  minePending: number;
}

export function progress(state: SessionState): Progress {
  const total = state.samples.length;
  const finalized = state.samples.filter((s) => s.status === "finalized").length;
  const needsReview = state.samples.filter((s) => s.status === "needs-review").length;
  const minePending =
    state.expertId === null ? 0 : pendingFor(state.samples, state.expertId).length;
  return { total, finalized, needsReview, minePending };
}
