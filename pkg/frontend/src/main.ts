// DOM glue: loads the report and schema, renders the dashboards, and wires
// the What-If form and the slice explorer to the API. All score math lives
// on the server; this file only moves JSON into the view models.

import { api, ApiFailure } from "./api.js";
import { fieldModels, validateDraft } from "./forms.js";
import {
  attributionBars,
  driftView,
  fairnessView,
  histogramBars,
  importanceRows,
  predictionSummary,
  scorecardRows,
  sliceView,
  whatifDiffRows,
} from "./viewmodel.js";
import {
  esc,
  renderAttribution,
  renderDiffTable,
  renderDrift,
  renderFairness,
  renderHistogram,
  renderImportance,
  renderScorecard,
  renderSlice,
} from "./render.js";
import type { DataSchema, ScanReport, SlicePredicate } from "./types.js";

interface AppState {
  schema: DataSchema | null;
  report: ScanReport | null;
  draft: Record<string, string>;
  predicates: SlicePredicate[];
}

const state: AppState = { schema: null, report: null, draft: {}, predicates: [] };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string) {
  el("status").textContent = text;
}

function renderDashboards() {
  if (!state.report) return;
  el("scorecard-pane").innerHTML =
    renderScorecard(scorecardRows(state.report)) +
    `<h3>Explainability histogram</h3>` + renderHistogram(histogramBars(state.report)) +
    `<h3>Feature importance</h3>` + renderImportance(importanceRows(state.report));
  el("fairness-pane").innerHTML = renderFairness(fairnessView(state.report.fairness));
  el("drift-pane").innerHTML = renderDrift(driftView(state.report.drift));
}

function whatifForm(schema: DataSchema): string {
  const fields = fieldModels(schema).map((f) => {
    const input = f.options
      ? `<select name="${esc(f.name)}">${f.options.map((o) =>
          `<option value="${esc(o)}" ${state.draft[f.name] === o ? "selected" : ""}>${esc(o)}</option>`).join("")}
         </select>`
      : `<input name="${esc(f.name)}" value="${esc(state.draft[f.name] ?? "")}"
           inputmode="decimal" placeholder="${esc(f.boundsHint ?? "number")}">`;
    return `<label class="field"><span>${esc(f.name)}</span>${input}
      <em class="field-error" data-error="${esc(f.name)}"></em></label>`;
  });
  return `<form id="whatif-form">${fields.join("")}
    <button type="submit">Evaluate</button></form>
    <div id="whatif-result"></div>`;
}

function readDraft(form: HTMLFormElement): Record<string, string> {
  const draft: Record<string, string> = {};
  new FormData(form).forEach((value, key) => {
    draft[key] = String(value);
  });
  return draft;
}

async function submitWhatif(form: HTMLFormElement) {
  if (!state.schema) return;
  state.draft = readDraft(form);
  form.querySelectorAll(".field-error").forEach((node) => (node.textContent = ""));
  const check = validateDraft(state.schema, state.draft);
  if (!check.ok) {
    for (const [field, message] of Object.entries(check.errors)) {
      const slot = form.querySelector(`[data-error="${field}"]`);
      if (slot) slot.textContent = message;
    }
    return;
  }
  setStatus("evaluating…");
  try {
    const response = await api.whatif(check.values);
    el("whatif-result").innerHTML =
      `<p>prediction: <strong>${esc(predictionSummary(response))}</strong></p>` +
      `<h3>Nearest counterfactual</h3>` + renderDiffTable(whatifDiffRows(response)) +
      `<h3>Feature responsibility</h3>` + renderAttribution(attributionBars(response));
    setStatus("ready");
  } catch (err) {
    if (err instanceof ApiFailure) {
      el("whatif-result").innerHTML = `<p class="warning">${esc(err.code)}: ${esc(err.message)}</p>`;
      setStatus("ready");
    } else {
      setStatus(`request failed: ${err}`);
    }
  }
}

function sliceBuilder(schema: DataSchema): string {
  const features = schema.features.map((f) =>
    `<option value="${esc(f.name)}">${esc(f.name)}</option>`).join("");
  const chips = state.predicates.map((p, i) =>
    `<span class="chip">${esc(p.feature)} ${esc(p.op)} ${esc(String(p.value))}
       <button data-remove="${i}">×</button></span>`).join("");
  return `<div class="slice-builder">
      <select id="slice-feature">${features}</select>
      <select id="slice-op"><option>eq</option><option>ne</option><option>lt</option>
        <option>le</option><option>gt</option><option>ge</option></select>
      <input id="slice-value" placeholder="value">
      <button id="slice-add">add</button>
      <button id="slice-run">run slice</button>
    </div>
    <div id="slice-chips">${chips}</div>
    <div id="slice-result"></div>`;
}

function wireSlicePane() {
  if (!state.schema) return;
  el("slice-pane").innerHTML = sliceBuilder(state.schema);
  el("slice-add").onclick = () => {
    const feature = el<HTMLSelectElement>("slice-feature").value;
    const op = el<HTMLSelectElement>("slice-op").value as SlicePredicate["op"];
    const raw = el<HTMLInputElement>("slice-value").value.trim();
    const spec = state.schema!.features.find((f) => f.name === feature);
    const value = spec?.kind === "numerical" && raw !== "" && Number.isFinite(Number(raw))
      ? Number(raw) : raw;
    state.predicates.push({ feature, op, value });
    wireSlicePane();
  };
  el("slice-chips").querySelectorAll("button[data-remove]").forEach((button) => {
    (button as HTMLButtonElement).onclick = () => {
      state.predicates.splice(Number((button as HTMLElement).dataset.remove), 1);
      wireSlicePane();
    };
  });
  el("slice-run").onclick = async () => {
    setStatus("slicing…");
    try {
      const result = await api.slice(state.predicates);
      el("slice-result").innerHTML = renderSlice(sliceView(result));
      setStatus("ready");
    } catch (err) {
      el("slice-result").innerHTML = `<p class="warning">${esc(String(err))}</p>`;
      setStatus("ready");
    }
  };
}

function wireTabs() {
  document.querySelectorAll("nav button").forEach((button) => {
    (button as HTMLButtonElement).onclick = () => {
      document.querySelectorAll("nav button").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      document.querySelectorAll(".pane").forEach((pane) => pane.classList.remove("active"));
      el(`${(button as HTMLElement).dataset.pane}`).classList.add("active");
    };
  });
}

async function init() {
  wireTabs();
  setStatus("loading artifacts…");
  try {
    state.report = await api.report();
    state.schema = await api.schema();
  } catch (err) {
    if (err instanceof ApiFailure && err.status === 503) {
      setStatus("service is still loading; retrying in 2s");
      setTimeout(init, 2000);
      return;
    }
    setStatus(`failed to load: ${err}`);
    return;
  }
  renderDashboards();
  el("whatif-pane").innerHTML = whatifForm(state.schema);
  el<HTMLFormElement>("whatif-form").onsubmit = (event) => {
    event.preventDefault();
    void submitWhatif(el<HTMLFormElement>("whatif-form"));
  };
  wireSlicePane();
  setStatus("ready");
}

void init();
