"""Command-line interface.

One binary, subcommand per capability, JSON reports on stdout with
lexicographically sorted keys so outputs diff cleanly. Domain failures
exit 1 with ``{"error": {"code", "message"}}`` on stderr; flag and usage
problems exit 2. Every stochastic subcommand takes ``--seed`` (falling
back to the DIVSAT_SEED environment variable, then 0) and is then
byte-reproducible.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    aggregate_r,
    correlation_report,
    diversity_impact,
)
from .diversity import DiversityScore, diversity_report
from .embedset import EmbeddingSet, load_set, write_set
from .errors import (
    DivsatError,
    IoError,
    MalformedLine,
    SizeMismatch,
    UsageError,
)
from .filtergate import (
    evaluate_filter,
    external_judge,
    load_captions,
    load_truth,
    load_verdicts,
    run_filter,
    write_verdicts,
)
from .mmd import KernelConfig, MmdEstimate, mmd_calculator
from .saturation import (
    SaturationConfig,
    external_embedder,
    external_provider,
    run_saturation,
    write_trace,
)
from .synth import GaussianSpec, gaussian_set, token_vector


@dataclass
class GlobalConfig:
    seed: int = 0
    fmt: str = "json"
    timeout: float = 300.0
    verbose: int = 0


@dataclass
class RawOutput:
    """Wire-contract output printed verbatim instead of a wrapped report."""

    text: str


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="RNG seed; falls back to DIVSAT_SEED, then 0")
    common.add_argument("--format", choices=("json", "pretty"), default="json",
                        help="report format (default json)")
    common.add_argument("--timeout", type=float, default=300.0,
                        help="seconds allowed per external command (default 300)")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress to stderr; repeat for debug detail")
    return common


def _add_kernel_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--bandwidth", type=float, default=None,
                       help="explicit Gaussian kernel bandwidth")
    group.add_argument("--median", action="store_true",
                       help="median-heuristic bandwidth (the default)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="divsat",
        description="Diversity metrics, saturation detection, and filter "
                    "evaluation for embedding-vector pipelines.",
    )
    parser.add_argument("--version", action="version", version=f"divsat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("diversity", parents=[common],
                       help="absolute diversity metrics of one embedding set")
    p.add_argument("set", help="embedding JSONL file")
    p.add_argument("--json", action="store_true",
                   help="force JSON output (the default format)")
    p.set_defaults(handler=cmd_diversity)

    p = sub.add_parser("mmd", parents=[common],
                       help="comparative diversity between two embedding sets")
    p.add_argument("x", help="first embedding JSONL file")
    p.add_argument("y", help="second embedding JSONL file")
    _add_kernel_flags(p)
    p.add_argument("--reps", type=int, default=None,
                   help="resampling repetitions; required when sizes differ")
    p.add_argument("--unnormalized", action="store_true",
                   help="report raw kernel sums instead of dividing by N^2")
    p.set_defaults(handler=cmd_mmd)

    p = sub.add_parser("saturate", parents=[common],
                       help="grow a set until comparative diversity saturates")
    init = p.add_mutually_exclusive_group(required=True)
    init.add_argument("--init", help="initial embedding JSONL file")
    init.add_argument("--init-count", type=int,
                      help="bootstrap this many items from the provider instead")
    p.add_argument("--provider", required=True,
                   help="command emitting {\"text\": ...} JSONL, given --count N")
    p.add_argument("--embedder", required=True,
                   help="command mapping {\"id\",\"text\"} JSONL on stdin to embedding JSONL")
    p.add_argument("--perc", type=float, default=0.05,
                   help="batch size as a fraction of the current set (default 0.05)")
    p.add_argument("--early-stop", type=int, default=5,
                   help="consecutive in-window scores beyond the first needed to stop (default 5)")
    p.add_argument("--reps", type=int, default=10,
                   help="MMD resampling repetitions per iteration (default 10)")
    p.add_argument("--max-iter", type=int, default=1000,
                   help="iteration cap (default 1000)")
    p.add_argument("--fixed-batch", action="store_true",
                   help="size batches from the initial set instead of the growing one")
    _add_kernel_flags(p)
    p.add_argument("--activity", default=None,
                   help="passed through to the provider as --activity")
    p.add_argument("--baseline", type=int, default=1000,
                   help="reference set size for the savings percentage (default 1000)")
    p.add_argument("--out", required=True, help="where to write the final set")
    p.add_argument("--trace", default=None, help="where to write the per-iteration trace")
    p.set_defaults(handler=cmd_saturate)

    p = sub.add_parser("synth", parents=[common],
                       help="write a seeded synthetic Gaussian embedding set")
    p.add_argument("--k", type=int, required=True, help="embedding dimension")
    p.add_argument("--n", type=int, required=True, help="number of records")
    p.add_argument("--sigma", type=float, default=1.0, help="per-axis stddev (default 1)")
    p.add_argument("--mean-shift", default=None,
                   help="mean vector: one float broadcast to all axes, or k comma-separated floats")
    p.add_argument("--out", required=True, help="where to write the set")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("synth-provider", parents=[common],
                       help="synthetic source speaking the provider/embedder wire contracts")
    p.add_argument("--role", choices=("provider", "embedder"), required=True)
    p.add_argument("--k", type=int, required=True, help="embedding dimension")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mean", default=None,
                   help="mean vector, same syntax as synth --mean-shift")
    p.add_argument("--drift", default=None,
                   help="per-call mean drift vector (needs --state to take effect)")
    p.add_argument("--state", default=None,
                   help="counter file persisting progress across invocations")
    p.add_argument("--limit", type=int, default=None,
                   help="total item budget; the provider exhausts past it")
    p.add_argument("--count", type=int, default=None,
                   help="(appended by the caller) batch size for the provider role")
    p.add_argument("--activity", default=None,
                   help="(appended by the caller) accepted and ignored")
    p.set_defaults(handler=cmd_synth_provider)

    p = sub.add_parser("filter", parents=[],
                       help="judge captions for relevance, or score past verdicts")
    filter_sub = p.add_subparsers(dest="filter_command", required=True, metavar="ACTION")

    pr = filter_sub.add_parser("run", parents=[common], help="judge captions")
    pr.add_argument("--activity", required=True, help="activity the captions must describe")
    pr.add_argument("--captions", required=True, help="caption JSONL file")
    pr.add_argument("--judge", required=True,
                    help="command receiving prompt JSON on stdin, answering yes/no lines")
    pr.add_argument("--retries", type=int, default=2,
                    help="re-queries allowed for an unparseable batch (default 2)")
    pr.add_argument("--out", required=True, help="where to write verdict JSONL")
    pr.set_defaults(handler=cmd_filter_run)

    pe = filter_sub.add_parser("eval", parents=[common],
                               help="confusion metrics for saved verdicts")
    pe.add_argument("--verdicts", required=True, help="verdict JSONL file")
    pe.add_argument("--truth", required=True, help="ground-truth JSONL file")
    pe.set_defaults(handler=cmd_filter_eval)

    p = sub.add_parser("correlate", parents=[common],
                       help="pairwise correlations between three aligned series")
    p.add_argument("--text", required=True, help="JSON array (or array of arrays) of numbers")
    p.add_argument("--motion", required=True, help="JSON array (or array of arrays) of numbers")
    p.add_argument("--f1", required=True, help="JSON array (or array of arrays) of numbers")
    p.add_argument("--fisher-z", action="store_true",
                   help="aggregate nested input with Fisher-z averaging instead of the raw mean")
    p.set_defaults(handler=cmd_correlate)

    p = sub.add_parser("impact", parents=[common],
                       help="diversity change between two embedding sets")
    p.add_argument("before", help="embedding JSONL file before filtering")
    p.add_argument("after", help="embedding JSONL file after filtering")
    p.set_defaults(handler=cmd_impact)

    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    raw = os.environ.get("DIVSAT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DIVSAT_SEED must be an integer, got {raw!r}") from None


def _kernel_from_args(args: argparse.Namespace) -> KernelConfig:
    if getattr(args, "bandwidth", None) is not None:
        return KernelConfig(bandwidth=args.bandwidth)
    return KernelConfig()


def _parse_vector(raw: str | None, k: int, flag: str) -> list[float] | None:
    if raw is None:
        return None
    try:
        parts = [float(p) for p in raw.split(",")]
    except ValueError:
        raise UsageError(f"{flag} must be a float or comma-separated floats") from None
    if len(parts) == 1:
        return parts * k
    if len(parts) != k:
        raise UsageError(f"{flag} needs 1 or {k} values, got {len(parts)}")
    return parts


def _score_dict(score: DiversityScore) -> dict:
    return {
        "std_metric": score.std_metric,
        "centroid_metric": score.centroid_metric,
        "centroid": [float(v) for v in score.centroid],
        "n": score.n,
        "k": score.k,
        "axis_means": [float(v) for v in score.axis.means],
        "axis_stddevs": [float(v) for v in score.axis.stddevs],
    }


def _estimate_dict(est: MmdEstimate, normalized: bool) -> dict:
    return {
        "mean": est.mean,
        "stddev": est.stddev,
        "repetitions": est.repetitions,
        "bandwidth_used": est.bandwidth_used,
        "sizes": list(est.sizes),
        "normalized": normalized,
    }


# subcommand handlers; each returns the deterministic result payload


def cmd_diversity(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    return _score_dict(diversity_report(load_set(args.set)))


def cmd_mmd(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    x = load_set(args.x)
    y = load_set(args.y)
    if x.size != y.size and args.reps is None:
        raise SizeMismatch(
            f"sets have sizes {x.size} and {y.size}; pass --reps R to use the "
            "mmd_calculator resampling estimator on unequal sizes"
        )
    est = mmd_calculator(
        x, y, _kernel_from_args(args),
        repetitions=args.reps if args.reps is not None else 1,
        seed=cfg.seed,
        normalized=not args.unnormalized,
    )
    return _estimate_dict(est, normalized=not args.unnormalized)


def cmd_saturate(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    sat_cfg = SaturationConfig(
        perc=args.perc,
        early_stop=args.early_stop,
        mmd_repetitions=args.reps,
        kernel=_kernel_from_args(args),
        seed=cfg.seed,
        max_iterations=args.max_iter,
        fixed_batch=args.fixed_batch,
    )
    provider = external_provider(args.provider, timeout=cfg.timeout)
    embedder = external_embedder(args.embedder, timeout=cfg.timeout)
    if args.init is not None:
        initial: EmbeddingSet | int = load_set(args.init)
        initial_size = initial.size
    else:
        if args.init_count < 1:
            raise UsageError("--init-count must be >= 1")
        initial = args.init_count
        initial_size = args.init_count
    context = {"activity": args.activity} if args.activity else None
    final, trace = run_saturation(
        initial, provider, embedder, sat_cfg, context=context
    )
    write_set(final, args.out)
    if args.trace:
        write_trace(trace, args.trace)
    if args.baseline < 1:
        raise UsageError("--baseline must be >= 1")
    savings = 100.0 * (1.0 - final.size / args.baseline)
    return {
        "reason": trace.reason.value,
        "iterations": trace.iterations,
        "initial_size": initial_size,
        "final_size": final.size,
        "baseline": args.baseline,
        "savings_pct": round(savings, 2),
        "out": args.out,
        "trace": args.trace,
    }


def cmd_synth(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    mean = _parse_vector(args.mean_shift, args.k, "--mean-shift")
    spec = GaussianSpec(k=args.k, sigma=args.sigma, mean=mean, seed=cfg.seed)
    embeddings = gaussian_set(spec, args.n)
    write_set(embeddings, args.out)
    return {
        "n": args.n,
        "k": args.k,
        "sigma": args.sigma,
        "mean": list(spec.mean),
        "seed": cfg.seed,
        "out": args.out,
    }


def _bump_state(path: str | None, amount: int) -> int:
    """Read the persisted counter, advance it by ``amount``, return the old value."""
    if path is None:
        return 0
    base = 0
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            content = fh.read().strip()
        if content:
            try:
                base = int(content)
            except ValueError:
                raise UsageError(f"state file {path!r} is corrupt: {content!r}") from None
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(str(base + amount))
    return base


def cmd_synth_provider(args: argparse.Namespace, cfg: GlobalConfig) -> RawOutput:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    mean = _parse_vector(args.mean, args.k, "--mean")
    drift = _parse_vector(args.drift, args.k, "--drift")
    spec = GaussianSpec(k=args.k, sigma=args.sigma, mean=mean, seed=cfg.seed)
    if args.role == "provider":
        if args.count is None:
            raise UsageError("the provider role needs --count")
        if args.count < 0:
            raise UsageError("--count must be >= 0")
        base = _bump_state(args.state, args.count)
        count = args.count
        if args.limit is not None:
            count = max(0, min(count, args.limit - base))
        lines = [json.dumps({"text": f"tok{base + i}"}) for i in range(count)]
        return RawOutput("\n".join(lines) + ("\n" if lines else ""))
    # embedder role: one call embeds one batch; the persisted counter says
    # how many batches came before, which positions the drifting mean
    calls_before = _bump_state(args.state, 1)
    offset = None
    if drift is not None:
        offset = np.asarray(drift) * float(calls_before)
    out_lines = []
    for i, line in enumerate(sys.stdin.read().splitlines()):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError:
            raise MalformedLine(f"stdin line {i + 1}: not valid JSON") from None
        if not isinstance(obj, dict) or "text" not in obj:
            raise MalformedLine(f"stdin line {i + 1}: expected an object with \"text\"")
        vec = token_vector(str(obj["text"]), spec, offset=offset)
        record_id = obj.get("id", i)
        out_lines.append(
            json.dumps({"id": str(record_id), "vector": [float(v) for v in vec]})
        )
    return RawOutput("\n".join(out_lines) + ("\n" if out_lines else ""))


def cmd_filter_run(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    if args.retries < 0:
        raise UsageError("--retries must be >= 0")
    items = [c for c in load_captions(args.captions) if c.activity == args.activity]
    judge = external_judge(args.judge, timeout=cfg.timeout)
    verdicts = run_filter(args.activity, items, judge, retries=args.retries)
    write_verdicts(verdicts, args.out)
    kept = sum(1 for v in verdicts if v.keep)
    return {
        "activity": args.activity,
        "total": len(verdicts),
        "kept": kept,
        "rejected": len(verdicts) - kept,
        "out": args.out,
    }


def cmd_filter_eval(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    metrics = evaluate_filter(load_verdicts(args.verdicts), load_truth(args.truth))

    def pct(value: float | None) -> float | None:
        return None if value is None else round(value, 2)

    return {
        "tp": metrics.tp,
        "fp": metrics.fp,
        "fn": metrics.fn,
        "tn": metrics.tn,
        "total": metrics.total,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "accuracy": metrics.accuracy,
        "f1": metrics.f1,
        "pct_before": pct(metrics.pct_before),
        "pct_after": pct(metrics.pct_after),
        "undefined": dict(metrics.undefined),
    }


def _load_series_file(path) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            value = json.load(fh)
    except OSError as exc:
        raise IoError(str(exc)) from None
    except ValueError as exc:
        raise MalformedLine(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(value, list) or not value:
        raise MalformedLine(f"{path}: expected a non-empty JSON array")
    return value


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _series_shape(value: list, path) -> str:
    if all(_is_number(v) for v in value):
        return "flat"
    if all(isinstance(v, list) for v in value):
        return "nested"
    raise MalformedLine(f"{path}: mix of numbers and arrays")


def _result_dict(report) -> dict:
    return {
        name: {"r": res.r, "p": res.p, "n": res.n}
        for name, res in (
            ("text_vs_motion", report.text_vs_motion),
            ("text_vs_f1", report.text_vs_f1),
            ("motion_vs_f1", report.motion_vs_f1),
        )
    }


def cmd_correlate(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    series = {
        "text": _load_series_file(args.text),
        "motion": _load_series_file(args.motion),
        "f1": _load_series_file(args.f1),
    }
    shapes = {name: _series_shape(v, name) for name, v in series.items()}
    if len(set(shapes.values())) != 1:
        raise MalformedLine(
            "all three inputs must have the same shape (all flat or all nested)"
        )
    if shapes["text"] == "flat":
        return _result_dict(
            correlation_report(series["text"], series["motion"], series["f1"])
        )
    lengths = {name: len(v) for name, v in series.items()}
    if len(set(lengths.values())) != 1:
        raise MalformedLine(f"inputs list different numbers of series: {lengths}")
    per_activity = [
        _result_dict(correlation_report(t, m, f))
        for t, m, f in zip(series["text"], series["motion"], series["f1"])
    ]
    method = "fisher-z" if args.fisher_z else "raw"
    aggregate = {"method": method}
    for key in ("text_vs_motion", "text_vs_f1", "motion_vs_f1"):
        aggregate[key] = aggregate_r([entry[key]["r"] for entry in per_activity], method)
    return {"per_activity": per_activity, "aggregate": aggregate}


def cmd_impact(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    report = diversity_impact(load_set(args.before), load_set(args.after))
    return {
        "before": _score_dict(report.before),
        "after": _score_dict(report.after),
        "delta_std": report.delta_std,
        "delta_centroid": report.delta_centroid,
    }


def _config_echo(args: argparse.Namespace, cfg: GlobalConfig) -> dict:
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in ("handler",) or callable(value):
            continue
        echo[key] = value
    echo["seed"] = cfg.seed
    return echo


def _flatten(prefix: str, value, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else key, value[key], rows)
    elif isinstance(value, list):
        rows.append((prefix, json.dumps(value)))
    else:
        rows.append((prefix, json.dumps(value)))


def emit_report(command: str, config: dict, result: dict, duration_s: float,
                fmt: str = "json") -> str:
    if fmt == "pretty":
        rows: list[tuple[str, str]] = []
        _flatten("", result, rows)
        width = max(len(name) for name, _ in rows) if rows else 0
        lines = [f"divsat {command} (v{__version__}, {duration_s:.3f}s)"]
        lines += [f"  {name.ljust(width)}  {value}" for name, value in rows]
        return "\n".join(lines)
    payload = {
        "command": command,
        "config": config,
        "duration_s": round(duration_s, 6),
        "result": result,
        "version": __version__,
    }
    return json.dumps(payload, sort_keys=True, allow_nan=False)


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = GlobalConfig(
            seed=_resolve_seed(args),
            fmt=getattr(args, "format", "json"),
            timeout=getattr(args, "timeout", 300.0),
            verbose=getattr(args, "verbose", 0),
        )
        if getattr(args, "json", False):
            cfg.fmt = "json"
        if cfg.verbose:
            logging.basicConfig(
                stream=sys.stderr,
                level=logging.DEBUG if cfg.verbose > 1 else logging.INFO,
                format="%(name)s: %(message)s",
            )
        command = args.command
        if command == "filter":
            command = f"filter {args.filter_command}"
        start = time.perf_counter()
        result = args.handler(args, cfg)
        duration = time.perf_counter() - start
    except UsageError as exc:
        print(f"divsat: {exc}", file=sys.stderr)
        return 2
    except DivsatError as exc:
        error = {"error": {"code": exc.code, "message": str(exc)}}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 1
    if isinstance(result, RawOutput):
        sys.stdout.write(result.text)
        return 0
    print(emit_report(command, _config_echo(args, cfg), result, duration, cfg.fmt))
    return 0


def main() -> None:
    sys.exit(dispatch())
