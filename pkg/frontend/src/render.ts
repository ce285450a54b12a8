// HTML fragment builders over the view models. Pure string functions so the
// test suite can check rendered output without a DOM.

import type {
  AttributionBar,
  DiffRow,
  DriftView,
  FairnessView,
  HistogramBar,
  ImportanceRow,
  ScoreRow,
  SliceView,
} from "./viewmodel.js";

export function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderScorecard(rows: ScoreRow[]): string {
  const cells = rows.map((row) => {
    const cls = row.belowThreshold ? "score-card below" : "score-card";
    const threshold = row.threshold === null ? "" :
      `<div class="threshold">min ${esc(row.threshold)}</div>`;
    return `<div class="${cls}" data-score="${esc(row.key)}">
      <div class="score-label">${esc(row.label)}</div>
      <div class="score-value">${esc(row.display)}</div>${threshold}</div>`;
  });
  return `<div class="scorecard">${cells.join("")}</div>`;
}

export function renderHistogram(bars: HistogramBar[]): string {
  const rows = bars.map((b) => `<tr><td>${esc(b.bin)} change(s)</td>
    <td><div class="bar" style="width:${Math.round(b.pct)}%"></div></td>
    <td data-bin="${esc(b.bin)}">${esc(b.display)}%</td></tr>`);
  return `<table class="histogram">${rows.join("")}</table>`;
}

export function renderImportance(rows: ImportanceRow[]): string {
  const body = rows.map((r) => `<tr><td>#${r.rank}</td><td>${esc(r.feature)}</td>
    <td>${esc(r.display)}</td></tr>`);
  return `<table class="importance"><tr><th></th><th>feature</th><th>share</th></tr>${body.join("")}</table>`;
}

export function renderFairness(view: FairnessView): string {
  if (!view.applicable) {
    return `<p class="empty-state">Fairness: not applicable (no protected attributes in this scan).</p>`;
  }
  const blocks = view.attributes.map((attr) => {
    const bars = attr.bars.map((b) => `<tr class="${b.isMinimum ? "minimum" : ""}">
      <td>${esc(b.label)}</td><td>n=${b.size}</td>
      <td><div class="bar fair" style="width:${Math.round(b.fairness)}%"></div></td>
      <td data-subgroup="${esc(b.label)}">${esc(b.display)}</td></tr>`);
    const extras = [
      attr.augmentation ? `augmentation: ${esc(attr.augmentation)}` : null,
      attr.diFinal !== null ? `disparate impact: <span data-di="${esc(attr.attribute)}">${esc(attr.diFinal)}</span>` : null,
    ].filter(Boolean).join(" · ");
    return `<section class="fairness-attr">
      <h3>${esc(attr.attribute)} — score <span data-attr-score="${esc(attr.attribute)}">${esc(attr.display)}</span></h3>
      ${extras ? `<p>${extras}</p>` : ""}
      <table>${bars.join("")}</table></section>`;
  });
  return `<div class="fairness" data-fairness-score="${esc(view.display)}">
    <p>mode: ${esc(view.mode)} · overall score <strong>${esc(view.display)}</strong></p>
    ${blocks.join("")}</div>`;
}

export function renderDrift(view: DriftView): string {
  if (!view.applicable) {
    return `<p class="empty-state">Drift: not applicable (no out-of-time window in this scan).</p>`;
  }
  const rows = view.rankings.map((r) => `<tr class="${r.moved ? "moved" : ""}">
    <td>#${r.position}</td><td>${esc(r.train)}</td><td>${esc(r.oot)}</td></tr>`);
  const badge = view.alert ? `<span class="alert-badge">DRIFT ALERT</span>` : "";
  return `<div class="drift">
    <p>rank similarity <strong data-drift-score="1">${esc(view.display)}</strong>
       (threshold ${esc(view.threshold)}) ${badge}</p>
    <table><tr><th></th><th>training</th><th>out-of-time</th></tr>${rows.join("")}</table></div>`;
}

export function renderDiffTable(rows: DiffRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty-state">No changes needed.</p>`;
  }
  const body = rows.map((r) => `<tr data-diff-feature="${esc(r.feature)}">
    <td>${esc(r.feature)}</td><td>${esc(r.original)}</td><td>${esc(r.counterfactual)}</td></tr>`);
  return `<table class="diff"><tr><th>feature</th><th>current value</th><th>counterfactual value</th></tr>
    ${body.join("")}</table>`;
}

export function renderAttribution(bars: AttributionBar[]): string {
  const body = bars.map((b) => `<tr class="${b.group}">
    <td>${esc(b.feature)}</td>
    <td><div class="bar ${b.group}" style="width:${b.width}%"></div></td>
    <td data-delta="${esc(b.feature)}">${esc(b.display)}</td></tr>`);
  return `<table class="attribution">${body.join("")}</table>`;
}

export function renderSlice(view: SliceView): string {
  const warning = view.lowSupport
    ? `<p class="warning">low support: only ${view.support} row(s) match this slice</p>` : "";
  const metrics = view.metrics.map((m) =>
    `<tr><td>${esc(m.name)}</td><td data-metric="${esc(m.name)}">${esc(m.display)}</td></tr>`);
  return `<div class="slice">
    <p>support <strong>${view.support}</strong> · blended score <strong data-slice-score="1">${esc(view.score)}</strong></p>
    ${warning}<table>${metrics.join("")}</table></div>`;
}
