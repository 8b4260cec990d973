"""Command-line driver.

    gauss-ucb simulate CONFIG [--seed N] [--replications R] [--out DIR] [--summary-only]
    gauss-ucb bounds   CONFIG [--out DIR]
    gauss-ucb crossing CONFIG [--seed N] [--replications R] [--out DIR] [--fast]
    gauss-ucb verify   [--fast]
    gauss-ucb report   [--out DIR]

Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import acceptance, bounds, crossing
from .config import ConfigError, ExperimentConfig, parse_config
from .gauss_special import partial_second_moment
from .policies import PolicyKind
from .simulator import iter_traces, run_replications

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

TRACE_COLUMNS = ("replication", "t", "arm", "reward", "cum_pseudo_regret")
BOUND_COLUMNS = ("bound_kind", "arm", "delta", "leading_term", "correction_term", "per_arm_total", "grand_total")
CROSSING_COLUMNS = ("quantity", "params", "estimate", "std_error", "bound", "verdict")


def fmt(x: float) -> str:
    """Round-trippable float text: 17 significant digits, no locale."""
    return format(float(x), ".17g")


class OutputError(OSError):
    pass


def _open_csv(path: Path, columns):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = path.open("w", newline="", encoding="ascii")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(columns)
    return handle, writer


def _write_json(path: Path, payload: dict) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _trace_path(out: Path, index: int, n_policies: int, spec) -> Path:
    if n_policies == 1:
        return out / "traces.csv"
    return out / f"traces_{index}_{spec.kind.value}.csv"


def _comparison_bound(config: ExperimentConfig, spec):
    inst = config.instance
    if spec.kind is PolicyKind.CONSTANT_UCB:
        return bounds.constant_ucb_bound(inst, spec.level)
    if spec.kind is PolicyKind.LAI_UCB:
        return bounds.lai_ucb_bound(inst)
    return None


def cmd_simulate(config: ExperimentConfig, summary_only: bool = False) -> dict:
    """Write per-step traces (or per-replication finals) and summary.json."""
    inst, out = config.instance, config.output_dir
    gaps = inst.gaps
    policy_rows, bound_rows, comparisons = [], [], []
    for i, spec in enumerate(config.policies):
        handle, writer = _open_csv(_trace_path(out, i, len(config.policies), spec), TRACE_COLUMNS)
        with handle:
            for trace in iter_traces(inst, spec, config.replications, config.master_seed):
                rid = trace.replication_id
                if summary_only:
                    steps = [inst.horizon - 1]
                else:
                    steps = range(inst.horizon)
                writer.writerows(
                    (rid, t + 1, int(trace.arms[t]), fmt(trace.rewards[t]), fmt(trace.cumulative_pseudo_regret[t]))
                    for t in steps
                )
        result = run_replications(inst, spec, config.replications, config.master_seed)
        policy_rows.append(
            {
                "policy": result.policy,
                "replications": result.replications,
                "mean_post_init_regret": result.mean_post_init_regret,
                "std_error": result.std_error,
                "mean_full_regret": result.mean_full_regret,
                "mean_pulls": result.mean_pulls.tolist(),
            }
        )
        report = _comparison_bound(config, spec)
        if report is not None:
            bound_rows.append({"policy": result.policy, "bound_kind": report.kind.value, "grand_total": report.grand_total})
            margin = 3.0 * result.std_error if result.replications > 1 else 0.0
            comparisons.append(
                {
                    "policy": result.policy,
                    "bound_kind": report.kind.value,
                    "estimate": result.mean_post_init_regret,
                    "bound": report.grand_total,
                    "margin": margin,
                    "verdict": "pass" if result.mean_post_init_regret + margin <= report.grand_total else "fail",
                }
            )
    summary = {
        "config_hash": config.config_hash,
        "config": config.document,
        "gaps": gaps.tolist(),
        "policies": policy_rows,
        "bounds": bound_rows,
        "comparisons": comparisons,
    }
    _write_json(out / "summary.json", summary)
    return summary


def bound_reports(config: ExperimentConfig) -> list:
    inst = config.instance
    reports = []
    seen = set()
    for spec in config.policies:
        if spec.kind is PolicyKind.CONSTANT_UCB and spec.level.b not in seen:
            seen.add(spec.level.b)
            reports.append(bounds.constant_ucb_bound(inst, spec.level))
    t_after = inst.horizon_after_init
    if t_after >= 2:
        reports.append(bounds.sqrt_log_bound(inst))
    if t_after >= 3:
        reports.append(bounds.optimal_level_bound(inst))
    reports.append(bounds.lai_ucb_bound(inst))
    reports.append(bounds.lai_robbins_lower_bound(inst))
    reports.append(bounds.auer_upper_bound(inst))
    return reports


def cmd_bounds(config: ExperimentConfig) -> list:
    """Write bounds.csv: one row per suboptimal arm and bound, or one zero row when all arms are optimal."""
    reports = bound_reports(config)
    handle, writer = _open_csv(config.output_dir / "bounds.csv", BOUND_COLUMNS)
    with handle:
        for report in reports:
            total = fmt(report.grand_total)
            if not report.entries:
                writer.writerow((report.kind.value, "", fmt(0.0), fmt(0.0), fmt(0.0), fmt(0.0), total))
            for e in report.entries:
                writer.writerow((report.kind.value, e.arm, fmt(e.gap), fmt(e.leading_term), fmt(e.correction_term), fmt(e.total), total))
    return reports


def _params(**kw) -> str:
    return ";".join(f"{k}={v}" for k, v in kw.items())


def crossing_rows(section: dict, seed: int | None = None, replications: int | None = None) -> tuple[list, list]:
    """Rows of crossing.csv (all probabilities) and the stopping-time checks."""
    reps = replications or section["replications"]
    seed = section["seed"] if seed is None else seed
    rows = []
    for i, item in enumerate(section["max_walk"]):
        est = crossing.mc_max_normalized_walk(item["b"], item["horizon_after_init"], reps, seed + i)
        bound = bounds.repeated_test_size_bound(item["b"], item["horizon_after_init"])
        rows.append(("max_normalized_walk", _params(**item), est, bound))
    for i, item in enumerate(section["drifted"]):
        est = crossing.mc_drifted_crossing(item["b"], item["gamma"], item["horizon_after_init"], reps, seed + 1000 + i)
        bound = partial_second_moment(-item["b"]) / item["gamma"] ** 2
        rows.append(("drifted_crossing", _params(**item), est, bound))
    for i, item in enumerate(section["lai_boundary"]):
        lai = crossing.mc_lai_boundary(item["n"], item["gamma"], reps, seed + 2000 + i, item["points_per_decade"])
        bound = min(1.0, bounds.LAI_BOUNDARY_CONSTANT / lai.scale)
        rows.append(("lai_boundary", _params(**item), lai.probability, bound))
    stopping = []
    for i, item in enumerate(section["stopping"]):
        check = crossing.mc_stopping_check(item["b"], item["theta"], item["dt"], max(2, reps // 2), seed + 3000 + i)
        stopping.append({**item, "mean_sqrt_tau": check.mean_sqrt_tau, "std_error": check.std_error, "bound": check.bound,
                         "cap_hit_fraction": check.cap_hit_fraction, "verdict": "pass" if check.passed else "fail"})
    return rows, stopping


def cmd_crossing(config: ExperimentConfig, seed: int | None = None, replications: int | None = None) -> dict:
    rows, stopping = crossing_rows(config.crossing, seed, replications)
    handle, writer = _open_csv(config.output_dir / "crossing.csv", CROSSING_COLUMNS)
    verdicts = []
    with handle:
        for quantity, params, est, bound in rows:
            verdict = "pass" if est.estimate <= bound + 3.0 * est.std_error else "fail"
            verdicts.append(verdict)
            writer.writerow((quantity, params, fmt(est.estimate), fmt(est.std_error), fmt(bound), verdict))
    summary = {"config_hash": config.config_hash, "verdicts": verdicts, "stopping": stopping}
    _write_json(config.output_dir / "crossing_summary.json", summary)
    return summary


def cmd_verify(fast: bool = False, stream=None) -> int:
    stream = stream or sys.stdout

    def show(result):
        print(result.line(), file=stream, flush=True)

    results = acceptance.run_all(fast=fast, on_result=show)
    ok = acceptance.overall_pass(results)
    print(f"overall: {'PASS' if ok else 'FAIL'}", file=stream)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_report(out: Path, stream=None) -> int:
    stream = stream or sys.stdout
    path = out / "summary.json"
    try:
        summary = json.loads(path.read_text(encoding="ascii"))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    print(f"config {summary['config_hash'][:16]}", file=stream)
    for p in summary["policies"]:
        pulls = " ".join(f"{x:.1f}" for x in p["mean_pulls"])
        print(f"{p['policy']:<48} regret {p['mean_post_init_regret']:10.4f} +- {p['std_error']:.4f}  pulls [{pulls}]", file=stream)
    for c in summary["comparisons"]:
        print(f"{c['policy']:<48} {c['bound_kind']:<20} {c['estimate']:.4f} + {c['margin']:.4f} <= {c['bound']:.4f}: {c['verdict']}", file=stream)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gauss-ucb", description="Gaussian bandit UCB experiments, regret bounds and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("config", type=Path, help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--replications", type=int, help="override the replication count")
        p.add_argument("--out", type=Path, help="override the output directory")
        p.add_argument("--fast", action="store_true", help="reduced sizes")

    p = sub.add_parser("simulate", help="run policies and write traces.csv and summary.json")
    add_common(p)
    p.add_argument("--summary-only", action="store_true", help="keep only the final row of each replication")
    add_common(sub.add_parser("bounds", help="write bounds.csv"))
    add_common(sub.add_parser("crossing", help="write crossing.csv"))
    add_common(sub.add_parser("verify", help="run the acceptance suite"), config=False)
    add_common(sub.add_parser("report", help="print a summary written by simulate"), config=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(fast=args.fast)
        if args.command == "report":
            return cmd_report(args.out or Path("out"))
        config = parse_config(args.config)
        reps = args.replications
        if args.fast and reps is None:
            reps = max(2, config.replications // 10)
        if args.command == "crossing":
            config = config.with_overrides(output_dir=args.out)
            section_reps = reps if args.replications is not None else (max(2, config.crossing["replications"] // 10) if args.fast else None)
            summary = cmd_crossing(config, seed=args.seed, replications=section_reps)
            verdicts = summary["verdicts"] + [s["verdict"] for s in summary["stopping"]]
            return EXIT_OK if all(v == "pass" for v in verdicts) else EXIT_VERIFY
        config = config.with_overrides(seed=args.seed, replications=reps, output_dir=args.out)
        if args.command == "simulate":
            cmd_simulate(config, summary_only=args.summary_only)
        else:
            cmd_bounds(config)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
