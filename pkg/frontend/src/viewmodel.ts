// Pure view-model builders: API payloads in, display rows out.
//
// Thin-client contract: every number shown in the console is a formatted
// copy of a response field. Nothing in here aggregates, averages or rescales
// scores, so each rendered value is byte-traceable to its API source.

import type {
  DriftReport,
  FairnessReport,
  Policy,
  ScanReport,
  SliceResult,
  WhatIfResponse,
} from "./types.js";

export function formatScore(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "NA";
  }
  return value.toFixed(2);
}

export interface ScoreRow {
  key: string;
  label: string;
  value: number | null;
  display: string;
  threshold: number | null;
  belowThreshold: boolean;
}

const SCORE_LABELS: [string, string][] = [
  ["explainability", "Explainability"],
  ["robustness_avg", "Robustness (avg)"],
  ["robustness_min", "Robustness (min)"],
  ["performance", "Performance"],
  ["drift", "Drift sustainability"],
  ["fairness", "Fairness"],
  ["trust", "Trust factor"],
];

const POLICY_KEYS: Record<string, string> = {
  explainability: "explainability",
  robustness_avg: "robustness",
  robustness_min: "robustness_min",
  performance: "performance",
  drift: "drift",
  fairness: "fairness",
  trust: "trust",
};

export function scorecardRows(report: ScanReport, policy?: Policy | null): ScoreRow[] {
  const card = report.scorecard as unknown as Record<string, number | null>;
  return SCORE_LABELS.map(([key, label]) => {
    const value = card[key];
    const threshold = policy?.min_scores?.[POLICY_KEYS[key]] ?? null;
    return {
      key,
      label,
      value,
      display: formatScore(value),
      threshold,
      belowThreshold: threshold !== null && value !== null && value < threshold,
    };
  });
}

export interface HistogramBar {
  bin: string;
  pct: number;
  display: string;
}

export function histogramBars(report: ScanReport): HistogramBar[] {
  return Object.entries(report.explainability.histogram).map(([bin, pct]) => ({
    bin,
    pct,
    display: formatScore(pct),
  }));
}

export interface ImportanceRow {
  rank: number;
  feature: string;
  share: number;
  display: string;
}

export function importanceRows(report: ScanReport): ImportanceRow[] {
  return report.importance.ranking.map((feature, i) => ({
    rank: i + 1,
    feature,
    share: report.importance.shares[feature],
    display: report.importance.shares[feature].toFixed(3),
  }));
}

export interface FairnessBar {
  label: string;
  size: number;
  fairness: number;
  display: string;
  isMinimum: boolean;
}

export interface FairnessAttributeView {
  attribute: string;
  score: number;
  display: string;
  augmentation: string | null;
  diFinal: string | null;
  bars: FairnessBar[];
}

export interface FairnessView {
  applicable: boolean;
  mode: string | null;
  score: number | null;
  display: string;
  attributes: FairnessAttributeView[];
  intersectional: FairnessAttributeView | null;
}

function cellLabel(value: string | string[]): string {
  return Array.isArray(value) ? value.join(" × ") : value;
}

function attributeView(attr: FairnessReport["attributes"][number]): FairnessAttributeView {
  const bars: FairnessBar[] = [];
  for (const test of attr.tests) {
    for (const sub of test.subgroups) {
      bars.push({
        label: attr.tests.length > 1
          ? `${cellLabel(sub.value)} (favorable ${String(test.favorable)})`
          : cellLabel(sub.value),
        size: sub.size,
        fairness: sub.fairness,
        display: formatScore(sub.fairness),
        isMinimum: sub.fairness === attr.score,
      });
    }
  }
  return {
    attribute: attr.attribute,
    score: attr.score,
    display: formatScore(attr.score),
    augmentation: attr.augmentation
      ? `${attr.augmentation.original} real + ${attr.augmentation.synthetic} synthetic = ${attr.augmentation.total}`
      : null,
    diFinal: attr.disparate_impact === null
      ? null
      : typeof attr.disparate_impact.final === "number"
        ? attr.disparate_impact.final.toFixed(3)
        : String(attr.disparate_impact.final),
    bars,
  };
}

export function fairnessView(fairness: FairnessReport | null): FairnessView {
  if (fairness === null) {
    return { applicable: false, mode: null, score: null, display: "NA",
             attributes: [], intersectional: null };
  }
  return {
    applicable: true,
    mode: fairness.mode,
    score: fairness.score,
    display: formatScore(fairness.score),
    attributes: fairness.attributes.map(attributeView),
    intersectional: fairness.intersectional ? attributeView(fairness.intersectional) : null,
  };
}

export interface DriftRankRow {
  position: number;
  train: string;
  oot: string;
  moved: boolean;
}

export interface DriftView {
  applicable: boolean;
  score: number | null;
  display: string;
  threshold: number | null;
  alert: boolean;
  rankings: DriftRankRow[];
}

export function driftView(drift: DriftReport | null): DriftView {
  if (drift === null) {
    return { applicable: false, score: null, display: "NA", threshold: null,
             alert: false, rankings: [] };
  }
  const rankings = drift.train_attribution.ranking.map((feature, i) => ({
    position: i + 1,
    train: feature,
    oot: drift.oot_attribution.ranking[i],
    moved: feature !== drift.oot_attribution.ranking[i],
  }));
  return {
    applicable: true,
    score: drift.score,
    display: drift.score.toFixed(3),
    threshold: drift.threshold,
    alert: drift.alert,
    rankings,
  };
}

export interface DiffRow {
  feature: string;
  original: string;
  counterfactual: string;
}

export function whatifDiffRows(response: WhatIfResponse): DiffRow[] {
  return response.diff.map((d) => ({
    feature: d.feature,
    original: String(d.original),
    counterfactual: String(d.counterfactual),
  }));
}

export interface AttributionBar {
  feature: string;
  delta: number;
  display: string;
  group: "positive" | "negative" | "zero";
  width: number;
}

export function attributionBars(response: WhatIfResponse): AttributionBar[] {
  const magnitudes = response.attribution.map((a) => Math.abs(a.delta));
  const top = Math.max(...magnitudes, 0);
  return response.attribution.map((a) => ({
    feature: a.feature,
    delta: a.delta,
    display: a.delta.toFixed(4),
    group: a.group,
    width: top > 0 ? Math.round((Math.abs(a.delta) / top) * 100) : 0,
  }));
}

export function predictionSummary(response: WhatIfResponse): string {
  const p = response.prediction;
  if (p.label !== null) {
    return p.scores ? `${p.label} (scores ${p.scores.map((s) => s.toFixed(4)).join(", ")})` : p.label;
  }
  return p.value === null ? "?" : String(p.value);
}

export interface SliceView {
  support: number;
  lowSupport: boolean;
  score: string;
  metrics: { name: string; display: string }[];
}

export function sliceView(result: SliceResult): SliceView {
  return {
    support: result.support,
    lowSupport: result.low_support,
    score: formatScore(result.score),
    metrics: result.metrics
      ? Object.entries(result.metrics).map(([name, value]) => ({
          name,
          display: formatScore(value),
        }))
      : [],
  };
}
