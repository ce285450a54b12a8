"""Command line interface: scan, gate, drift, fairness, whatif, serve.

Every subcommand accepts ``--config scan.json`` with individual flags
overriding config fields. Exit codes: 0 success, 1 policy-gate failure,
2 usage error, 3 pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .drift import oot_drift
from .errors import ComplaiError, SchemaError
from .fairness import fairness_audit
from .models import resolve_model
from .nice import NiceConfig, SearchContext
from .heom import DistanceConfig
from .tabular import compute_norm_stats, load_csv, load_schema
from .workbench import AuditSession, GateResult, ScanConfig, gate, scan
from . import service

EXIT_OK = 0
EXIT_GATE_FAIL = 1
EXIT_USAGE = 2
EXIT_PIPELINE = 3


def _load_config(args) -> ScanConfig:
    config = ScanConfig.load(args.config) if args.config else ScanConfig()
    overrides = {
        "schema": getattr(args, "schema", None),
        "train": getattr(args, "train", None),
        "validation": getattr(args, "validation", None),
        "oot": getattr(args, "oot", None),
        "model": getattr(args, "model", None),
        "out": getattr(args, "out", None),
        "parallelism": getattr(args, "parallelism", None),
        "drift_threshold": getattr(args, "threshold", None),
        "fairness_mode": getattr(args, "mode", None),
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(config, name, value)
    if getattr(args, "protected", None):
        config.protected = args.protected.split(",")
    if getattr(args, "favorable", None):
        config.favorable = _parse_favorable(args.favorable)
    if getattr(args, "intersectional", False):
        config.intersectional = True
    return config


def _parse_favorable(raw: str):
    """A class label, or lo:hi for regression (either side may be empty)."""
    if ":" in raw:
        lo, _, hi = raw.partition(":")
        try:
            return [float(lo) if lo else None, float(hi) if hi else None]
        except ValueError:
            pass
    return raw


def _print_scorecard(report: dict):
    card = report["scorecard"]
    for name in ("explainability", "robustness_avg", "robustness_min",
                 "performance", "drift", "fairness", "trust"):
        value = card.get(name)
        shown = "NA" if value is None else f"{value:.2f}"
        print(f"{name:>16}: {shown}")
    print(f"{'report':>16}: {report['config']['out']}")


def cmd_scan(args) -> int:
    config = _load_config(args)
    session = AuditSession.open(config)
    try:
        report = scan(config, session)
    finally:
        session.close()
    _print_scorecard(report)
    return EXIT_OK


def cmd_gate(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    with open(args.policy, "r", encoding="utf-8") as fh:
        policy = json.load(fh)
    result: GateResult = gate(report, policy)
    print(json.dumps(result.to_json(), indent=2))
    return EXIT_OK if result.passed else EXIT_GATE_FAIL


def cmd_drift(args) -> int:
    config = _load_config(args)
    if not config.oot:
        raise SchemaError("drift needs --oot (or an oot path in the config)")
    schema = load_schema(config.schema)
    train = load_csv(config.train, schema)
    oot = load_csv(config.oot, schema)
    model = resolve_model(config.model, train, config.model_hyper or None)
    cfg = NiceConfig(distance=DistanceConfig(norm_stats=compute_norm_stats(train, config.norm_method)))
    sigma = None
    if not schema.target.is_classification:
        sigma = float(np.std(np.array(train.labels, dtype=float)))
    report = oot_drift(model, train, oot, cfg, config.drift_threshold,
                       sigma=sigma, parallelism=config.parallelism)
    print(json.dumps(report.to_json(), indent=2))
    return EXIT_OK


def cmd_fairness(args) -> int:
    config = _load_config(args)
    if args.data:
        config.validation = args.data
    if not config.train:
        config.train = config.validation
    schema = load_schema(config.schema)
    data = load_csv(config.validation, schema)
    train = load_csv(config.train, schema)
    model = resolve_model(config.model, train, config.model_hyper or None)
    protected = config.protected if config.protected is not None else list(schema.protected)
    if not protected:
        raise SchemaError("no protected attributes given (flag --protected or schema)")
    cfg = NiceConfig(distance=DistanceConfig(norm_stats=compute_norm_stats(train, config.norm_method)))
    favorable = config.favorable
    if isinstance(favorable, list):
        favorable = tuple(favorable)
    report = fairness_audit(data, protected, model, cfg, favorable=favorable,
                            mode=config.fairness_mode, parallelism=config.parallelism,
                            intersectional=config.intersectional)
    print(json.dumps(report.to_json(), indent=2))
    return EXIT_OK


def _parse_instance(raw: str):
    if raw.startswith("@"):
        with open(raw[1:], "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(raw)


def cmd_whatif(args) -> int:
    from .workbench import whatif

    config = _load_config(args)
    session = AuditSession.open(config)
    try:
        doc = _parse_instance(args.instance)
        if isinstance(doc, dict):
            values = [doc[f.name] for f in session.schema.features]
        else:
            values = doc
        response = whatif(values, session)
    finally:
        session.close()
    print(json.dumps(response.to_json(), indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    config = _load_config(args)
    service.serve(config, report_path=args.report, port=args.port,
                  host=args.host, static_dir=args.static)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complai",
                                     description="Audit black-box models: counterfactual "
                                                 "explanations, robustness, fairness, drift "
                                                 "and a single trust score.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scan config JSON")
        p.add_argument("--schema", help="schema JSON path")
        p.add_argument("--train", help="training CSV")
        p.add_argument("--model", help="builtin:<kind> | exec:<command> | http(s)://host:port")
        p.add_argument("--parallelism", type=int)

    p_scan = sub.add_parser("scan", help="run the full audit and write the report")
    common(p_scan)
    p_scan.add_argument("--validation", help="validation CSV")
    p_scan.add_argument("--oot", help="out-of-time CSV for drift")
    p_scan.add_argument("--protected", help="comma-separated protected attributes")
    p_scan.add_argument("--favorable", help="favorable class, or lo:hi for regression")
    p_scan.add_argument("--out", help="report path (default ./complai_report.json)")
    p_scan.set_defaults(fn=cmd_scan)

    p_gate = sub.add_parser("gate", help="check a report against a policy")
    p_gate.add_argument("--report", required=True)
    p_gate.add_argument("--policy", required=True)
    p_gate.set_defaults(fn=cmd_gate)

    p_drift = sub.add_parser("drift", help="drift score between train and an OOT window")
    common(p_drift)
    p_drift.add_argument("--oot", help="out-of-time CSV")
    p_drift.add_argument("--threshold", type=float, help="alert threshold (default 0.8)")
    p_drift.set_defaults(fn=cmd_drift)

    p_fair = sub.add_parser("fairness", help="flip-test and disparate impact")
    common(p_fair)
    p_fair.add_argument("--data", help="dataset CSV to audit (defaults to config validation)")
    p_fair.add_argument("--protected", help="comma-separated protected attributes")
    p_fair.add_argument("--favorable", help="favorable class, or lo:hi for regression")
    p_fair.add_argument("--mode", choices=["synthetic", "real"])
    p_fair.add_argument("--intersectional", action="store_true")
    p_fair.set_defaults(fn=cmd_fairness)

    p_whatif = sub.add_parser("whatif", help="prediction, counterfactual and attribution "
                                             "for one instance")
    common(p_whatif)
    p_whatif.add_argument("--validation", help="validation CSV")
    p_whatif.add_argument("--instance", required=True,
                          help="instance JSON (object or array), or @file")
    p_whatif.set_defaults(fn=cmd_whatif)

    p_serve = sub.add_parser("serve", help="HTTP service + console over scan artifacts")
    common(p_serve)
    p_serve.add_argument("--validation", help="validation CSV")
    p_serve.add_argument("--report", help="report path (default: config out)")
    p_serve.add_argument("--port", type=int, default=service.DEFAULT_PORT)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static", help="console assets directory")
    p_serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (FileNotFoundError, json.JSONDecodeError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComplaiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
