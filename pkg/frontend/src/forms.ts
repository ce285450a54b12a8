// What-If form model: fields generated from the data schema, with
// client-side validation mirroring the server's instance rules (non-empty
// category token, finite number, declared values when the schema lists
// them) so a bad draft never leaves the browser.

import type { DataSchema, FeatureSpec } from "./types.js";

export interface FieldModel {
  name: string;
  kind: "categorical" | "numerical";
  options: string[] | null;
  boundsHint: string | null;
}

export function fieldModels(schema: DataSchema): FieldModel[] {
  return schema.features.map((f: FeatureSpec) => ({
    name: f.name,
    kind: f.kind,
    options: f.values ?? null,
    boundsHint: f.bounds ? `${f.bounds[0]} .. ${f.bounds[1]}` : null,
  }));
}

export interface ValidationResult {
  ok: boolean;
  errors: Record<string, string>;
  values: (string | number)[];
}

export function validateDraft(schema: DataSchema, draft: Record<string, string>): ValidationResult {
  const errors: Record<string, string> = {};
  const values: (string | number)[] = [];
  for (const f of schema.features) {
    const raw = (draft[f.name] ?? "").trim();
    if (f.kind === "categorical") {
      if (raw === "") {
        errors[f.name] = "pick a value";
      } else if (f.values && !f.values.includes(raw)) {
        errors[f.name] = `must be one of: ${f.values.join(", ")}`;
      }
      values.push(raw);
    } else {
      if (raw === "") {
        errors[f.name] = "enter a number";
        values.push(NaN);
        continue;
      }
      const num = Number(raw);
      if (!Number.isFinite(num)) {
        errors[f.name] = "not a finite number";
      }
      values.push(num);
    }
  }
  return { ok: Object.keys(errors).length === 0, errors, values };
}
