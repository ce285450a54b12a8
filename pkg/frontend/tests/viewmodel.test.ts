// Thin-client checks against a stubbed API: every rendered score must equal
// the corresponding response field, and the What-If diff table must mirror
// the changed features exactly.

import { describe, expect, it } from "vitest";

import type { FairnessReport, ScanReport, SliceResult, WhatIfResponse } from "../src/types.js";
import {
  attributionBars,
  driftView,
  fairnessView,
  formatScore,
  histogramBars,
  importanceRows,
  scorecardRows,
  sliceView,
  whatifDiffRows,
} from "../src/viewmodel.js";
import {
  renderDiffTable,
  renderDrift,
  renderFairness,
  renderHistogram,
  renderScorecard,
  renderSlice,
} from "../src/render.js";

const FAIRNESS: FairnessReport = {
  mode: "synthetic",
  score: 93.44,
  intersectional: null,
  attributes: [
    {
      attribute: "gender",
      augmentation: { original: 220, synthetic: 211, total: 431, skipped: 0 },
      score: 93.44,
      disparate_impact: { per_facet: { male: 0.41, female: 0.7 }, final: 0.5857 },
      tests: [
        {
          attribute: "gender",
          favorable: "approved",
          score: 93.44,
          skipped_cells: [],
          subgroups: [
            { attribute: "gender", value: "female", size: 98, f_plus: 9, f_minus: 5,
              flip_rate: 0.0408, fairness: 95.92 },
            { attribute: "gender", value: "male", size: 122, f_plus: 7, f_minus: 15,
              flip_rate: 0.0656, fairness: 93.44 },
          ],
        },
      ],
    },
  ],
};

const REPORT: ScanReport = {
  format: 1,
  engine_version: "0.1.0",
  config: {},
  scorecard: {
    explainability: 84.29,
    robustness_avg: 95.92,
    robustness_min: 91.17,
    robustness_per_class: { approved: 95.92 },
    performance: 75.64,
    drift: 84.75,
    fairness: 97.01,
    trust_weights: {},
    trust: 87.52,
  },
  explainability: { score: 84.29, histogram: { "1": 51.3, "2": 37.3, "3": 10.0, "4": 1.3, "5": 0.0, ">5": 0.0 } },
  importance: {
    counts: { loan_amount: 45, income: 34, history: 21 },
    shares: { loan_amount: 0.45, income: 0.34, history: 0.21 },
    ranking: ["loan_amount", "income", "history"],
  },
  robustness: { per_class: { approved: 95.92 }, min: 91.17, avg: 95.92 },
  performance: { score: 75.64, metrics: { precision: 80.0, f1: 75.2 }, weights: { precision: 0.3, f1: 0.7 } },
  drift: {
    train_attribution: { counts: {}, shares: { a: 0.6, b: 0.4 }, ranking: ["a", "b"] },
    oot_attribution: { counts: {}, shares: { a: 0.6, b: 0.4 }, ranking: ["b", "a"] },
    dcg: 0.85,
    idcg: 0.9,
    score: 0.944,
    threshold: 0.95,
    alert: true,
    skipped_train: 0,
    skipped_oot: 0,
  },
  fairness: FAIRNESS,
  counterfactuals: [],
  slices: [],
  skipped_instances: 0,
  totals: { validation_rows: 150, model_queries: 9000 },
};

describe("scorecard is byte-traceable to the response", () => {
  it("renders every component from its own field", () => {
    const rows = scorecardRows(REPORT);
    const byKey = Object.fromEntries(rows.map((r) => [r.key, r]));
    expect(byKey.explainability.display).toBe((84.29).toFixed(2));
    expect(byKey.robustness_avg.display).toBe((95.92).toFixed(2));
    expect(byKey.robustness_min.display).toBe((91.17).toFixed(2));
    expect(byKey.performance.display).toBe((75.64).toFixed(2));
    expect(byKey.drift.display).toBe((84.75).toFixed(2));
    expect(byKey.fairness.display).toBe((97.01).toFixed(2));
    expect(byKey.trust.display).toBe((87.52).toFixed(2));

    const html = renderScorecard(rows);
    for (const row of rows) {
      expect(html).toContain(row.display);
    }
  });

  it("marks not-applicable components as NA instead of a number", () => {
    const na = structuredClone(REPORT);
    na.scorecard.fairness = null;
    na.scorecard.drift = null;
    const byKey = Object.fromEntries(scorecardRows(na).map((r) => [r.key, r]));
    expect(byKey.fairness.display).toBe("NA");
    expect(byKey.drift.display).toBe("NA");
  });

  it("flags components below their policy threshold without rescaling them", () => {
    const rows = scorecardRows(REPORT, { min_scores: { performance: 80 } });
    const perf = rows.find((r) => r.key === "performance")!;
    expect(perf.belowThreshold).toBe(true);
    expect(perf.display).toBe((75.64).toFixed(2));
  });
});

describe("dashboards mirror their sub-reports", () => {
  it("histogram percentages come straight from the report", () => {
    const bars = histogramBars(REPORT);
    for (const bar of bars) {
      expect(bar.display).toBe(formatScore(REPORT.explainability.histogram[bar.bin]));
    }
    const html = renderHistogram(bars);
    expect(html).toContain("51.30");
    expect(html).toContain("37.30");
  });

  it("importance rows preserve the server ranking and shares", () => {
    const rows = importanceRows(REPORT);
    expect(rows.map((r) => r.feature)).toEqual(REPORT.importance.ranking);
    expect(rows[0].display).toBe((0.45).toFixed(3));
  });

  it("fairness bars equal the subgroup fields and flag the minimum", () => {
    const view = fairnessView(REPORT.fairness);
    expect(view.applicable).toBe(true);
    expect(view.display).toBe((93.44).toFixed(2));
    const bars = view.attributes[0].bars;
    expect(bars.map((b) => b.display)).toEqual([(95.92).toFixed(2), (93.44).toFixed(2)]);
    expect(bars[1].isMinimum).toBe(true);
    expect(bars[0].isMinimum).toBe(false);
    expect(view.attributes[0].diFinal).toBe((0.5857).toFixed(3));
    const html = renderFairness(view);
    expect(html).toContain("95.92");
    expect(html).toContain("93.44");
  });

  it("fairness renders a not-applicable state when the report has none", () => {
    const view = fairnessView(null);
    expect(view.applicable).toBe(false);
    expect(renderFairness(view)).toContain("not applicable");
  });

  it("drift view carries the score, threshold and alert through", () => {
    const view = driftView(REPORT.drift);
    expect(view.display).toBe((0.944).toFixed(3));
    expect(view.threshold).toBe(0.95);
    expect(view.alert).toBe(true);
    expect(view.rankings[0]).toEqual({ position: 1, train: "a", oot: "b", moved: true });
    expect(renderDrift(view)).toContain("DRIFT ALERT");
  });

  it("identical rankings render without an alert badge", () => {
    const calm = structuredClone(REPORT.drift!);
    calm.oot_attribution.ranking = ["a", "b"];
    calm.score = 1.0;
    calm.alert = false;
    const view = driftView(calm);
    expect(view.rankings.every((r) => !r.moved)).toBe(true);
    expect(renderDrift(view)).not.toContain("DRIFT ALERT");
  });
});

describe("what-if round trip", () => {
  const WHATIF: WhatIfResponse = {
    prediction: { label: "high", value: null, scores: [0.2, 0.8] },
    diff: [
      { feature: "Age", original: 50, counterfactual: 52 },
      { feature: "BMI", original: 25.365, counterfactual: 36.765 },
    ],
    attribution: [
      { feature: "BMI", delta: 0.31, group: "positive" },
      { feature: "Age", delta: -0.05, group: "negative" },
      { feature: "children", delta: 0.0, group: "zero" },
    ],
    distance: 0.62,
    query_count: 9,
  };

  it("diff table rows equal the changed features exactly", () => {
    const rows = whatifDiffRows(WHATIF);
    expect(rows).toEqual([
      { feature: "Age", original: "50", counterfactual: "52" },
      { feature: "BMI", original: "25.365", counterfactual: "36.765" },
    ]);
    const html = renderDiffTable(rows);
    expect(html).toContain('data-diff-feature="Age"');
    expect(html).toContain('data-diff-feature="BMI"');
    expect((html.match(/data-diff-feature/g) ?? []).length).toBe(WHATIF.diff.length);
  });

  it("attribution bars keep the signed deltas and group labels", () => {
    const bars = attributionBars(WHATIF);
    expect(bars[0]).toMatchObject({ feature: "BMI", display: (0.31).toFixed(4), group: "positive", width: 100 });
    expect(bars[1].group).toBe("negative");
    expect(bars[2].width).toBe(0);
  });
});

describe("slice explorer", () => {
  const RESULT: SliceResult = {
    query: { predicates: [{ feature: "credit_history", op: "eq", value: "0" }] },
    support: 12,
    low_support: true,
    score: 61.54,
    metrics: { precision: 61.54, f1: 58.1 },
  };

  it("metrics and support mirror the response", () => {
    const view = sliceView(RESULT);
    expect(view.support).toBe(12);
    expect(view.lowSupport).toBe(true);
    expect(view.score).toBe((61.54).toFixed(2));
    expect(view.metrics).toEqual([
      { name: "precision", display: (61.54).toFixed(2) },
      { name: "f1", display: (58.1).toFixed(2) },
    ]);
    const html = renderSlice(view);
    expect(html).toContain("low support");
    expect(html).toContain("61.54");
  });

  it("an empty slice shows support 0 and no metrics", () => {
    const view = sliceView({ query: { predicates: [] }, support: 0, low_support: true,
                             score: null, metrics: null });
    expect(view.score).toBe("NA");
    expect(view.metrics).toEqual([]);
  });
});
