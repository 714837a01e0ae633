// Console wiring: expert selection, the annotate tab (patch mosaics plus
// label/confidence pickers) and the review tab (side-by-side round-1
// records, consensus resolution). All state shown here is traceable to a
// server response; mutations go exclusively through the two POST endpoints.

import { ApiClient, ApiError } from "./api.js";
import { bindHotkeys } from "./hotkeys.js";
import { buildLegend, buildMosaic } from "./patch.js";
import {
  advance,
  currentSample,
  initialState,
  progress,
  replaceSamples,
  upsertSample,
  type SessionState,
} from "./state.js";
import {
  CLASS_DISPLAY,
  CONFIDENCE_DISPLAY,
  GENERAL_CLASSES,
  type ConfidenceLevel,
  type GeneralClass,
  type SampleDoc,
} from "./types.js";

const api = new ApiClient("");

let state: SessionState = initialState();
let experts: string[] = [];
let activeTab: "annotate" | "review" = "annotate";
let chosenLabel: GeneralClass | null = null;
let chosenConfidence: ConfidenceLevel | null = null;
let reviewChoices = new Map<number, { label?: GeneralClass; confidence?: ConfidenceLevel }>();
let notice = "";

const root = () => document.getElementById("app") as HTMLElement;

async function refresh(): Promise<void> {
  const doc = await api.listSamples();
  experts = doc.experts;
  state = replaceSamples(state, doc.samples);
  render();
}

function setNotice(text: string): void {
  notice = text;
  render();
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

function button(text: string, onClick: () => void, attrs: Record<string, string> = {}) {
  const b = el("button", attrs, text);
  b.addEventListener("click", onClick);
  return b;
}

// -- annotate tab -----------------------------------------------------------

async function submitAnnotation(): Promise<void> {
  const sample = currentSample(state);
  if (!sample || state.expertId === null) return;
  if (chosenLabel === null || chosenConfidence === null) {
    setNotice("Pick a label (1-5) and a confidence level (Q/W/E) before submitting.");
    return;
  }
  try {
    const resp = await api.postAnnotation({
      sample_id: sample.sample_id,
      expert_id: state.expertId,
      label: chosenLabel,
      confidence: chosenConfidence,
    });
    state = upsertSample(state, resp.sample);
    state = advance(state);
    chosenLabel = null;
    chosenConfidence = null;
    notice = "";
    render();
  } catch (err) {
    // keep the cursor where it is; show the rejection inline
    if (err instanceof ApiError && err.code === "duplicate-annotation") {
      await refresh();
    }
    setNotice(err instanceof Error ? err.message : String(err));
  }
}

async function renderPatch(container: HTMLElement, sample: SampleDoc): Promise<void> {
  try {
    const patch = await api.getPatch(sample.sample_id);
    container.replaceChildren();
    for (const window of patch.windows) {
      const grid = el("div", { class: "mosaic", style: `--side:${window.side}` });
      for (const row of buildMosaic(window)) {
        for (const cell of row) {
          grid.append(
            el("div", {
              class: cell.isCenter ? "cell center" : "cell",
              style: `background:${cell.color}`,
              title: cell.title,
            }),
          );
        }
      }
      const legend = el(
        "div",
        { class: "legend" },
        ...buildLegend(window).map((s) =>
          el(
            "span",
            { class: "swatch" },
            el("i", { style: `background:${s.color}` }),
            ` ${s.text}`,
          ),
        ),
      );
      container.append(
        el(
          "figure",
          {},
          el("figcaption", {}, `${window.product} (${window.cell_size} m cells)`),
          grid,
          legend,
        ),
      );
    }
  } catch (err) {
    container.replaceChildren(
      el("p", { class: "error" }, `patch unavailable: ${(err as Error).message}`),
    );
  }
}

function annotateTab(): HTMLElement {
  const pane = el("div", {});
  const sample = currentSample(state);
  if (!sample) {
    pane.append(el("p", {}, "No samples awaiting your round-1 label."));
    return pane;
  }
  pane.append(
    el(
      "h2",
      {},
      `Sample ${sample.sample_id} `,
      el("small", {}, `stratum ${sample.stratum_id} at (${sample.x}, ${sample.y})`),
    ),
  );
  const patchBox = el("div", { class: "patches" }, "loading patch…");
  pane.append(patchBox);
  void renderPatch(patchBox, sample);

  const labels = el("div", { class: "choices" });
  GENERAL_CLASSES.forEach((cls, i) => {
    labels.append(
      button(`${i + 1} ${CLASS_DISPLAY[cls]}`, () => {
        chosenLabel = cls;
        render();
      }, { class: chosenLabel === cls ? "picked" : "" }),
    );
  });
  const confidences = el("div", { class: "choices" });
  ([1, 2, 3] as ConfidenceLevel[]).forEach((level, i) => {
    confidences.append(
      button(`${"QWE"[i]} ${CONFIDENCE_DISPLAY[level]}`, () => {
        chosenConfidence = level;
        render();
      }, { class: chosenConfidence === level ? "picked" : "" }),
    );
  });
  pane.append(
    el("h3", {}, "Label"),
    labels,
    el("h3", {}, "Confidence"),
    confidences,
    button("Submit (Enter)", () => void submitAnnotation(), { class: "submit" }),
  );
  return pane;
}

// -- review tab --------------------------------------------------------------

async function resolveConsensus(sampleId: number): Promise<void> {
  const choice = reviewChoices.get(sampleId);
  if (!choice?.label || !choice.confidence) {
    setNotice("Pick the agreed label and confidence first.");
    return;
  }
  try {
    await api.postConsensus({
      sample_id: sampleId,
      label: choice.label,
      confidence: choice.confidence,
    });
    reviewChoices.delete(sampleId);
    notice = "";
    await refresh();
  } catch (err) {
    if (err instanceof ApiError && err.code === "already-finalized") {
      // someone else resolved it; fall back to the server's view
      await refresh();
      return;
    }
    setNotice(err instanceof Error ? err.message : String(err));
  }
}

function reviewItem(sample: SampleDoc): HTMLElement {
  const choice = reviewChoices.get(sample.sample_id) ?? {};
  const records = el(
    "div",
    { class: "round1" },
    ...sample.annotations
      .filter((a) => a.round === 1)
      .map((a) =>
        el(
          "div",
          { class: "record" },
          el("strong", {}, a.expert_id),
          ` ${CLASS_DISPLAY[a.label]} @ confidence #${a.confidence}`,
        ),
      ),
  );
  const labels = el("div", { class: "choices" });
  for (const cls of GENERAL_CLASSES) {
    labels.append(
      button(CLASS_DISPLAY[cls], () => {
        reviewChoices.set(sample.sample_id, { ...choice, label: cls });
        render();
      }, { class: choice.label === cls ? "picked" : "" }),
    );
  }
  const confidences = el("div", { class: "choices" });
  for (const level of [1, 2, 3] as ConfidenceLevel[]) {
    confidences.append(
      button(CONFIDENCE_DISPLAY[level], () => {
        reviewChoices.set(sample.sample_id, { ...choice, confidence: level });
        render();
      }, { class: choice.confidence === level ? "picked" : "" }),
    );
  }
  return el(
    "div",
    { class: "review-item" },
    el("h3", {}, `Sample ${sample.sample_id}`),
    records,
    labels,
    confidences,
    button("Resolve", () => void resolveConsensus(sample.sample_id)),
  );
}

function reviewTab(): HTMLElement {
  const pane = el("div", {});
  const queue = state.samples.filter((s) => s.status === "needs-review");
  if (queue.length === 0) {
    pane.append(el("p", {}, "Review queue is empty."));
    return pane;
  }
  queue.forEach((s) => pane.append(reviewItem(s)));
  return pane;
}

// -- shell --------------------------------------------------------------------

function expertPicker(): HTMLElement {
  const pane = el("div", { class: "picker" }, el("h2", {}, "Who is annotating?"));
  for (const expert of experts) {
    pane.append(
      button(expert, () => {
        state = { ...state, expertId: expert };
        render();
      }),
    );
  }
  return pane;
}

function render(): void {
  const app = root();
  app.replaceChildren();
  if (state.expertId === null) {
    app.append(expertPicker());
    return;
  }
  const p = progress(state);
  app.append(
    el(
      "header",
      {},
      el("strong", {}, `lcval console — ${state.expertId}`),
      el(
        "span",
        { class: "progress" },
        `${p.finalized}/${p.total} finalized · ${p.minePending} awaiting me`,
      ),
      button(`Annotate (${p.minePending})`, () => {
        activeTab = "annotate";
        render();
      }, { class: activeTab === "annotate" ? "tab picked" : "tab" }),
      button(`Review (${p.needsReview})`, () => {
        activeTab = "review";
        render();
      }, { class: activeTab === "review" ? "tab picked" : "tab" }),
      button("Refresh", () => void refresh()),
    ),
  );
  if (notice) {
    app.append(el("p", { class: "error", role: "alert" }, notice));
  }
  app.append(activeTab === "annotate" ? annotateTab() : reviewTab());
}

bindHotkeys(window, (action) => {
  if (state.expertId === null || activeTab !== "annotate") return;
  if (action.kind === "label") chosenLabel = action.label;
  else if (action.kind === "confidence") chosenConfidence = action.level;
  else {
    void submitAnnotation();
    return;
  }
  render();
});

void refresh();
