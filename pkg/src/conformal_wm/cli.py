"""Command-line surface: detect, simulate, bleu.

Exit codes: 0 success, 2 validation failure (with one machine-readable
JSON error line on stderr), 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import io as io_mod
from . import simulate as sim_mod
from .bleu import bleu_of_texts
from .conformal import (
    CalibrationSet,
    GroupedCalibrationSet,
    WatermarkScore,
    hierarchical_decision,
    standard_decision,
    weighted_conformal_decision,
)
from .density import compute_weights, fit_kde, mean_shift, quantile_shift
from .io import ScoreRow, ScoreTable, ValidationError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-wm",
        description="Watermark-score auditing with distribution-free "
                    "false-positive-rate control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser(
        "detect", help="flag test essays against a calibration table")
    p_detect.add_argument("cal_path", help="calibration score table (csv or json)")
    p_detect.add_argument("test_path", help="test score table (csv or json)")
    p_detect.add_argument("--method", choices=["standard", "hierarchical", "weighted"],
                          default="standard")
    p_detect.add_argument("--alpha", type=float, default=0.05)
    p_detect.add_argument("--shift", choices=["mean", "quantile"], default="quantile",
                          help="subgroup density estimator (weighted method only)")
    p_detect.add_argument("--bandwidth", type=float, default=0.5)
    p_detect.add_argument("--log-scale", choices=["on", "off"], default="on",
                          help="estimate densities on log10 scores (weighted only)")
    p_detect.add_argument("--out", default=".", help="output directory")

    p_sim = sub.add_parser("simulate", help="run a synthetic scenario end to end")
    p_sim.add_argument("config_path", nargs="?", default=None,
                       help="JSON experiment config; omitted -> built-in default")
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="run a single seed instead of the configured list")
    p_sim.add_argument("--threads", type=int, default=None,
                       help="worker thread cap (overrides CONFORMAL_WM_THREADS)")

    p_bleu = sub.add_parser("bleu", help="similarity of a candidate text to a reference")
    p_bleu.add_argument("reference_path")
    p_bleu.add_argument("candidate_path")

    return parser


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------


def _require_role(table: ScoreTable, role: str, path: str) -> list[ScoreRow]:
    for i, row in enumerate(table.rows, start=1):
        if row.role != role:
            raise ValidationError("role_mismatch",
                                  detail=f"essay {row.essay_id!r} in {path} has role "
                                         f"{row.role!r}, expected {role!r}",
                                  line=i, field_name="role")
    if not table.rows:
        raise ValidationError("empty_table", detail=path)
    return table.rows


def _scores(rows: list[ScoreRow]) -> list[WatermarkScore]:
    return [WatermarkScore(essay_id=r.essay_id, value=r.score) for r in rows]


def cmd_detect(args) -> int:
    cal_rows = _require_role(io_mod.ingest(args.cal_path), "calibration", args.cal_path)
    test_rows = _require_role(io_mod.ingest(args.test_path), "test", args.test_path)
    alpha = args.alpha
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha_out_of_range", detail=repr(alpha),
                              field_name="alpha")
    use_log = args.log_scale == "on"
    extra: dict = {"method": args.method, "alpha": alpha}

    decisions = []
    if args.method == "standard":
        cal = CalibrationSet(scores=tuple(_scores(cal_rows)), provenance=args.cal_path)
        for row in test_rows:
            s = WatermarkScore(row.essay_id, row.score)
            decisions.append((row.essay_id, standard_decision(cal, s, alpha)))

    elif args.method == "hierarchical":
        by_group: dict[str, list[WatermarkScore]] = {}
        for i, row in enumerate(cal_rows, start=1):
            if row.group_id is None:
                raise ValidationError("missing_group_id",
                                      detail=f"calibration essay {row.essay_id!r}",
                                      line=i, field_name="group_id")
            by_group.setdefault(row.group_id, []).append(
                WatermarkScore(row.essay_id, row.score))
        grouped = GroupedCalibrationSet(groups=tuple(
            CalibrationSet(scores=tuple(scores), provenance=group_id)
            for group_id, scores in by_group.items()))
        extra["n_groups"] = len(grouped)
        for row in test_rows:
            s = WatermarkScore(row.essay_id, row.score)
            decisions.append((row.essay_id, hierarchical_decision(grouped, s, alpha)))

    else:  # weighted
        for i, row in enumerate(cal_rows, start=1):
            if row.population is None:
                raise ValidationError("missing_population",
                                      detail=f"calibration essay {row.essay_id!r}",
                                      line=i, field_name="population")
        minority = [r for r in cal_rows if r.population == "minority"]
        if not minority:
            raise ValidationError("no_minority_rows", detail=args.cal_path)
        cal = CalibrationSet(scores=tuple(_scores(cal_rows)), provenance=args.cal_path)
        to_eval = (lambda s: s.log_value) if use_log else (lambda s: s.value)
        cal_logs = [to_eval(s) for s in cal.scores]
        minority_logs = [to_eval(WatermarkScore(r.essay_id, r.score)) for r in minority]
        model_p = fit_kde(cal_logs, args.bandwidth)
        if args.shift == "mean":
            model_q = mean_shift(cal_logs, minority_logs, args.bandwidth)
        else:
            model_q = quantile_shift(cal_logs, minority_logs, args.bandwidth, alpha)
        est = model_q.shift
        extra["shift"] = {
            "method": est.method,
            "branch": est.branch,
            "minority_size": len(minority),
            "q_anchor": est.q_anchor,
            "p_anchor": est.p_anchor,
            "sigma_p": est.sigma_p,
            "sigma_q": est.sigma_q,
            "bandwidth": args.bandwidth,
            "log_scale": use_log,
        }
        for row in test_rows:
            s = WatermarkScore(row.essay_id, row.score)
            weights = compute_weights(model_p, model_q, cal_logs, to_eval(s))
            decisions.append(
                (row.essay_id, weighted_conformal_decision(cal, s, weights, alpha)))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    decisions_path = out_dir / "decisions.csv"
    io_mod.write_decisions_csv(decisions_path, decisions)
    manifest = io_mod.build_manifest(
        command="detect",
        params={"method": args.method, "alpha": alpha, "shift": args.shift,
                "bandwidth": args.bandwidth, "log_scale": use_log},
        seeds=[],
        inputs={"calibration": Path(args.cal_path), "test": Path(args.test_path)},
        outputs={"decisions.csv": decisions_path},
        extra=extra,
    )
    io_mod.write_manifest(manifest, out_dir / "manifest.json")
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.config_path is None:
        config = sim_mod.default_config()
        inputs: dict[str, Path] = {}
    else:
        path = Path(args.config_path)
        if not path.exists():
            raise ValidationError("file_not_found", detail=str(path))
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError("parse_error", detail=str(exc), line=exc.lineno)
        try:
            config = sim_mod.config_from_dict(payload)
        except (ValueError, TypeError, KeyError) as exc:
            raise ValidationError("invalid_config", detail=str(exc))
        inputs = {"config": path}
    if args.seed is not None:
        config = replace(config, seeds=(args.seed,))
    if args.threads is not None:
        config = replace(config, threads=args.threads)
    try:
        config.validate()
    except ValueError as exc:
        raise ValidationError("invalid_config", detail=str(exc))

    report = sim_mod.run_scenario(config)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_csv = out_dir / "metrics.csv"
    metrics_json = out_dir / "metrics.json"
    plot_csv = out_dir / "plot_data.csv"
    io_mod.write_metrics_csv(metrics_csv, report, config.scenario)
    io_mod.write_metrics_json(metrics_json, report, config.scenario)
    io_mod.write_plot_csv(plot_csv, report, config.scenario)
    manifest = io_mod.build_manifest(
        command="simulate",
        params=sim_mod.config_to_dict(config),
        seeds=config.seeds,
        inputs=inputs,
        outputs={"metrics.csv": metrics_csv, "metrics.json": metrics_json,
                 "plot_data.csv": plot_csv},
        extra={"scenario": config.scenario},
    )
    io_mod.write_manifest(manifest, out_dir / "manifest.json")
    return 0


# ---------------------------------------------------------------------------
# bleu
# ---------------------------------------------------------------------------


def cmd_bleu(args) -> int:
    texts = []
    for p in (args.reference_path, args.candidate_path):
        path = Path(p)
        try:
            texts.append(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError("unreadable_file", detail=f"{p}: {exc}")
    score = bleu_of_texts(texts[0], texts[1])
    print(json.dumps({
        "value": score.value,
        "unigram_precision": score.unigram_precision,
        "bigram_precision": score.bigram_precision,
        "brevity_penalty": score.brevity_penalty,
    }, sort_keys=True))
    return 0


_COMMANDS = {"detect": cmd_detect, "simulate": cmd_simulate, "bleu": cmd_bleu}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(exc.to_json(), file=sys.stderr)
        return 2
    except ValueError as exc:
        # Domain validation raised below the io layer (bad scores, degenerate
        # weights, ...) is still an input problem.
        print(json.dumps({"error": "invalid_input", "detail": str(exc)},
                         sort_keys=True), file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(json.dumps({"error": "internal", "detail": f"{type(exc).__name__}: {exc}"},
                         sort_keys=True), file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
