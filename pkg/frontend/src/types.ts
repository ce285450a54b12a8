// Payload shapes of the audit service JSON API. The console renders these
// verbatim; it never derives a score on its own.

export interface FeatureSpec {
  name: string;
  kind: "categorical" | "numerical";
  values?: string[];
  bounds?: [number, number];
}

export interface TargetSpec {
  name: string;
  task: "binary" | "multiclass" | "regression";
  classes?: string[];
  favorable?: string | (number | null)[];
}

export interface DataSchema {
  features: FeatureSpec[];
  target: TargetSpec;
  protected: string[];
}

export interface ScoreCard {
  explainability: number | null;
  robustness_avg: number | null;
  robustness_min: number | null;
  robustness_per_class: Record<string, number>;
  performance: number | null;
  drift: number | null;
  fairness: number | null;
  trust_weights: Record<string, number>;
  trust: number | null;
}

export interface SubgroupResult {
  attribute: string;
  value: string | string[];
  size: number;
  f_plus: number;
  f_minus: number;
  flip_rate: number;
  fairness: number;
}

export interface FlipTestOutcome {
  attribute: string;
  favorable: unknown;
  subgroups: SubgroupResult[];
  score: number;
  skipped_cells: unknown[];
}

export interface AttributeFairness {
  attribute: string;
  augmentation: { original: number; synthetic: number; total: number; skipped: number } | null;
  tests: FlipTestOutcome[];
  score: number;
  disparate_impact: { per_facet: Record<string, number | string>; final: number | string } | null;
}

export interface FairnessReport {
  mode: string;
  attributes: AttributeFairness[];
  score: number;
  intersectional: AttributeFairness | null;
}

export interface AttributionVector {
  counts: Record<string, number>;
  shares: Record<string, number>;
  ranking: string[];
}

export interface DriftReport {
  train_attribution: AttributionVector;
  oot_attribution: AttributionVector;
  dcg: number;
  idcg: number;
  score: number;
  threshold: number;
  alert: boolean;
  skipped_train: number;
  skipped_oot: number;
}

export interface ScanReport {
  format: number;
  engine_version: string;
  config: Record<string, unknown>;
  scorecard: ScoreCard;
  explainability: { score: number; histogram: Record<string, number> };
  importance: AttributionVector;
  robustness: { per_class: Record<string, number>; min: number; avg: number };
  performance: { score: number | null; metrics: Record<string, number>; weights: Record<string, number> };
  drift: DriftReport | null;
  fairness: FairnessReport | null;
  counterfactuals: CounterfactualDigest[];
  slices: SliceResult[];
  skipped_instances: number;
  totals: { validation_rows: number; model_queries: number };
}

export interface CounterfactualDigest {
  row: number;
  changes: { feature: string; original: unknown; counterfactual: unknown }[];
  n_changed: number;
  distance: number;
  query_count: number;
}

export interface WhatIfResponse {
  prediction: { label: string | null; value: number | null; scores: number[] | null };
  diff: { feature: string; original: unknown; counterfactual: unknown }[];
  attribution: { feature: string; delta: number; group: "positive" | "negative" | "zero" }[];
  distance: number;
  query_count: number;
}

export interface SlicePredicate {
  feature: string;
  op: "eq" | "ne" | "lt" | "le" | "gt" | "ge" | "in";
  value: unknown;
}

export interface SliceResult {
  query: { predicates: SlicePredicate[] };
  support: number;
  low_support: boolean;
  score: number | null;
  metrics: Record<string, number> | null;
}

export interface Policy {
  min_scores: Record<string, number>;
}

export interface ApiError {
  error: string;
  detail: string;
}
