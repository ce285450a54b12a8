"""Auditing a model you cannot import: the subprocess bridge.

serve_model.py (in this directory) is a stand-in for any third-party model
runtime. The engine launches it, streams prediction requests over
stdin/stdout, and runs the exact same audit it would run on a builtin model.
Swap the selector for ``http://host:port`` and nothing else changes.
"""

import pathlib
import sys

from complai import (
    DistanceConfig,
    NiceConfig,
    SearchContext,
    SubprocessModel,
    compute_norm_stats,
    generate_batch,
    explainability_score,
)

from _loan_data import SCHEMA, make_loans

SERVE = pathlib.Path(__file__).parent / "serve_model.py"


def main():
    train = make_loans(400)
    validation = make_loans(100, seed=23)

    with SubprocessModel(f"{sys.executable} {SERVE}", SCHEMA.target) as model:
        sample = validation.rows[0]
        pred = model.predict_one(sample)
        print(f"external model answered: label={pred.label!r} scores={pred.scores}")

        cfg = NiceConfig(distance=DistanceConfig(norm_stats=compute_norm_stats(train)))
        context = SearchContext.build(train, model, cfg)
        _, results = generate_batch(validation.rows, context)
        ok = [r for r in results if r is not None]
        print(f"counterfactuals for {len(ok)}/{len(validation)} rows "
              f"after {model.query_count} prediction queries")
        print(f"explainability of the external model: {explainability_score(ok):.2f}")
    print("child process shut down cleanly (stdin closed)")
    print("\n(the CLI equivalent: complai scan --config scan.json "
          f"--model 'exec:{sys.executable} demos/serve_model.py')")


if __name__ == "__main__":
    main()
