"""Command-line pipeline: sample -> stable -> analyze -> export / compare.

All artifacts live in a workspace directory::

    space.txt   option definitions
    config      optional key=value defaults for any flag
    runs/       one JSON-lines trace per sampling repeat
    lons/       LON JSON files
    reports/    metrics, funnels, CSV tables, embeddings, figures

Exit status is 0 on success, 1 when a run or an analysis fails and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .embedding import EmbeddingConfig, embed, similarity_matrix
from .errors import LonError, ValidationError
from .evaluators import EvaluationCache, ExternalCommandEvaluator, NKLandscape, NKLandscapeSpec, TableEvaluator
from .export import FORMATS, export
from .io import FormatError, read_lon, read_trace, write_csv, write_json, write_lon, write_text, write_trace
from .lon import funnels, prune_with_report
from .metrics import metric_report
from .sampler import STOP_ERROR, SamplerParams, sample_repeats
from .space import ConfigurationSpace, load_space
from .stability import StabilityConfig, detect_stable

log = logging.getLogger("lonscape")

DEFAULTS = {
    "seed": 0,
    "parallelism": 1,
    "runs": 300,
    "target": 100,
    "tau": 10,
    "kappa": 3,
    "restart_prob": 0.05,
    "budget": 10_000,
    "repeats": 1,
    "aggregation": "median",
    "timeout": None,
    "max_in_flight": 1,
    "step": 10,
    "resamples": 20,
    "alpha": 0.05,
    "wl_iterations": 3,
    "dimension": 128,
    "hash_seed": 0,
}

_TYPES = {k: type(v) for k, v in DEFAULTS.items() if v is not None}
_TYPES["timeout"] = float


class UsageError(Exception):
    pass


def read_config(workspace: Path) -> dict[str, str]:
    path = workspace / "config"
    if not path.exists():
        return {}
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(args: argparse.Namespace) -> None:
    """Fill unset flags from the workspace config, then from DEFAULTS."""
    config = read_config(args.workspace)
    for key, default in DEFAULTS.items():
        if getattr(args, key, "absent") is not None:
            continue
        if key in config:
            try:
                setattr(args, key, _TYPES[key](config[key]))
            except ValueError:
                raise UsageError(f"config: bad value for {key}: {config[key]!r}") from None
        else:
            setattr(args, key, default)


def _meta(command: str, **params) -> dict:
    return {"command": command, "params": params, "version": __version__}


def _sig(x: float | None) -> str:
    return "undefined" if x is None else f"{x:.4g}"


# -- sample --------------------------------------------------------------------


def _space_for(args: argparse.Namespace) -> ConfigurationSpace:
    ws_space = args.workspace / "space.txt"
    if args.space:
        return load_space(args.space)
    if args.nk:
        return None  # derived from n below
    if ws_space.exists():
        return load_space(ws_space)
    raise UsageError("no configuration space: pass --space or create space.txt in the workspace")


def _evaluator(args: argparse.Namespace):
    chosen = [flag for flag in ("table", "nk", "exec") if getattr(args, flag)]
    if len(chosen) != 1:
        raise UsageError("choose exactly one evaluator: --table, --nk or --exec")
    space = _space_for(args)
    if args.nk:
        try:
            n, k, seed = (int(p) for p in args.nk.split(","))
        except ValueError:
            raise UsageError(f"--nk expects n,k,seed; got {args.nk!r}") from None
        backend = NKLandscape(NKLandscapeSpec(n, k, seed))
        if space is None:
            space = backend.space
        elif space.sizes != (2,) * n:
            raise UsageError(f"--nk {args.nk} needs a space of {n} binary options")
        return space, backend, {"nk": args.nk}
    if args.table:
        return space, TableEvaluator.from_csv(space, args.table, maximize=args.maximize), {
            "table": Path(args.table).name,
            "maximize": args.maximize,
        }
    backend = ExternalCommandEvaluator(
        space,
        args.exec,
        timeout=args.timeout,
        repeats=args.repeats,
        aggregation=args.aggregation,
        max_in_flight=args.max_in_flight,
        maximize=args.maximize,
    )
    return space, backend, {
        "exec": args.exec,
        "repeats": args.repeats,
        "aggregation": args.aggregation,
        "timeout": args.timeout,
        "maximize": args.maximize,
    }


def cmd_sample(args: argparse.Namespace) -> int:
    try:
        space, backend, evaluator_info = _evaluator(args)
        params = SamplerParams(
            tau=args.tau,
            kappa=args.kappa,
            restart_prob=args.restart_prob,
            target_optima=args.target,
            eval_budget=args.budget,
            seed=args.seed,
        )
    except (ValidationError, OSError) as exc:
        raise UsageError(str(exc)) from None
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")

    ws = args.workspace
    write_text(ws / "space.txt", space.to_text())
    runs_dir = ws / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    for stale in runs_dir.glob("run-*.jsonl"):
        stale.unlink()

    cache = EvaluationCache(backend)
    started = time.perf_counter()
    traces = sample_repeats(space, lambda j: cache, params, r_max=args.runs, parallelism=args.parallelism)
    elapsed = time.perf_counter() - started

    meta = _meta("sample", runs=args.runs, evaluator=evaluator_info)
    failed = 0
    for j, trace in enumerate(traces):
        status = trace.stop_reason
        if trace.stop_reason == STOP_ERROR:
            failed += 1
            status = f"FAILED ({trace.error})"
        else:
            write_trace(trace, runs_dir / f"run-{j:04d}.jsonl", meta)
        print(
            f"run {j:04d} seed={trace.seed} vertices={len(trace.vertices)} "
            f"edges={len(trace.edges)} evaluations={trace.evaluations} stop={status}"
        )
    print(
        f"{len(traces) - failed}/{len(traces)} runs written to {runs_dir} "
        f"({len(cache)} unique configurations measured, {elapsed:.2f}s)"
    )
    return 1 if failed else 0


# -- stable --------------------------------------------------------------------


def cmd_stable(args: argparse.Namespace) -> int:
    ws = args.workspace
    runs_dir = Path(args.runs_dir) if args.runs_dir else ws / "runs"
    paths = sorted(runs_dir.glob("*.jsonl"))
    if len(paths) < 3 * args.step:
        raise UsageError(f"{len(paths)} traces in {runs_dir}; need at least 3*step = {3 * args.step}")
    pool = [read_trace(p) for p in paths]
    try:
        config = StabilityConfig(
            pool, step=args.step, resamples=args.resamples, alpha=args.alpha, seed=args.seed,
            parallelism=args.parallelism,
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    result = detect_stable(config)

    params = dict(step=args.step, resamples=args.resamples, alpha=args.alpha, seed=args.seed, pool=len(pool))
    meta = _meta("stable", **params)
    write_lon(result.stable_lon, ws / "lons" / "stable.json", meta)
    rows = [
        (lv.i, s, lv.ac[s], lv.acc[s]) for lv in result.trajectory for s in range(len(lv.acc))
    ]
    write_csv(ws / "reports" / "stability.csv", ("i", "sample_index", "ac", "acc"), rows,
              comment=f"lonscape stable {params}")
    write_json(ws / "reports" / "stability.json", {
        "meta": meta,
        "decision_i": result.decision_i,
        "n_stable": result.n_stable,
        "converged": result.converged,
        "levels": [
            {"i": lv.i, "p_ac_prev": lv.p_ac_prev, "p_acc_prev": lv.p_acc_prev} for lv in result.trajectory
        ],
    })
    if args.figures:
        from .plotting import plot_stability

        plot_stability([(lv.i, lv.valid_ac(), lv.acc) for lv in result.trajectory],
                       ws / "reports" / "stability.png")
    state = "stable" if result.converged else "NOT converged (pool exhausted)"
    print(f"n_stable={result.n_stable} decision_i={result.decision_i} {state}")
    print(f"stable LON: {result.stable_lon.vn} vertices, {result.stable_lon.en} edges -> {ws / 'lons' / 'stable.json'}")
    return 0


# -- analyze -------------------------------------------------------------------


def cmd_analyze(args: argparse.Namespace) -> int:
    ws = args.workspace
    lon_path = Path(args.lon)
    lon = read_lon(lon_path)
    name = args.name or lon_path.stem
    reports = ws / "reports"
    meta = _meta("analyze", lon=lon_path.name, prune=not args.no_prune)

    full = lon
    if args.no_prune:
        report_prune = None
    else:
        lon, report_prune = prune_with_report(lon)
        write_lon(lon, ws / "lons" / f"{name}.pruned.json", meta)
        write_json(reports / f"{name}.prune.json", {
            "meta": meta,
            "passes": report_prune.passes,
            "removed": [{"k": k, "m": m, "pass": p} for k, m, p in report_prune.removed],
            "removed_multiplicity": report_prune.removed_multiplicity,
            "escape_attempts": report_prune.escape_attempts,
        })

    deco = funnels(lon)
    rep = metric_report(lon, deco, full)
    write_json(reports / f"{name}.metrics.json", {"meta": meta, **rep.to_dict()})
    key = lambda i: lon.vertices[i].key  # noqa: E731
    write_json(reports / f"{name}.funnels.json", {
        "meta": meta,
        "funnels": [
            {"base": key(b), "fitness": lon.fitness(b), "members": sorted(key(v) for v in deco.funnels[b])}
            for b in deco.bases
        ],
        "overlapping": sorted(key(v) for v, flag in deco.overlapping.items() if flag),
    })
    comment = f"lonscape analyze {lon_path.name}"
    write_csv(reports / f"{name}.base_rank.csv", ("rank", "out_degree"), rep.base_rank_table, comment)
    write_csv(reports / f"{name}.rcc.csv", ("k", "rcc"), rep.rcc_curve, comment)
    if args.figures:
        from .plotting import plot_base_rank, plot_rcc

        plot_base_rank(rep.base_rank_table, reports / f"{name}.base_rank.png", title=name)
        plot_rcc(rep.rcc_curve, reports / f"{name}.rcc.png", title=name)

    if report_prune is not None:
        print(f"pruned {len(report_prune.removed)} vertices in {report_prune.passes} passes")
    print(
        f"VN={rep.vn} EN={rep.en} SPL={_sig(rep.spl)} (reachable {_sig(rep.spl_reachable_fraction)}) "
        f"AC={_sig(rep.ac)} ACC={_sig(rep.acc)} ND={_sig(rep.nd)}"
    )
    print(f"funnels={rep.n_funnels} go_neighborhood_radius={rep.go_neighborhood_radius} "
          f"global_optimum={rep.global_optimum}")
    return 0


# -- export / compare ---------------------------------------------------------------


def cmd_export(args: argparse.Namespace) -> int:
    lon_path = Path(args.lon)
    lon = read_lon(lon_path)
    ext = {"dot": "dot", "graphml": "graphml", "json": "export.json"}[args.format]
    out = Path(args.output) if args.output else args.workspace / "reports" / f"{lon_path.stem}.{ext}"
    write_text(out, export(lon, args.format, comment=f"lonscape export {lon_path.name}"))
    print(f"wrote {out}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    if len(args.lons) < 2:
        raise UsageError("compare needs at least two LON files")
    try:
        config = EmbeddingConfig(args.wl_iterations, args.dimension, args.hash_seed)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    ids: list[str] = []
    for p in args.lons:
        stem = Path(p).stem
        ids.append(stem if stem not in ids else f"{stem}#{ids.count(stem) + 1}")
    vectors = [embed(read_lon(p), config, source=i) for p, i in zip(args.lons, ids)]
    matrix = similarity_matrix(vectors)

    reports = args.workspace / "reports"
    name = args.name
    comment = (f"lonscape compare wl_iterations={config.wl_iterations} dimension={config.dimension} "
               f"hash_seed={config.hash_seed}")
    write_csv(reports / f"{name}.vectors.csv", ["lon_id"] + [f"v{d + 1}" for d in range(config.dimension)],
              ([v.source, *map(float, v.values)] for v in vectors), comment)
    write_csv(reports / f"{name}.csv", ["lon_id", *ids],
              ([ids[i], *map(float, matrix[i])] for i in range(len(ids))), comment)
    if args.figures:
        from .plotting import plot_similarity

        plot_similarity(matrix, ids, reports / f"{name}.png")
    print(f"{len(ids)}x{len(ids)} similarity matrix -> {reports / (name + '.csv')}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workspace", "-w", type=Path, default=argparse.SUPPRESS, help="workspace directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--parallelism", type=int, default=argparse.SUPPRESS)
    common.add_argument("--figures", action="store_true", default=argparse.SUPPRESS,
                        help="also render PNG figures next to the CSV reports")

    parser = argparse.ArgumentParser(prog="lonscape", parents=[common],
                                     description="Local optima network analysis of configurable systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="sample local optima with iterated local search")
    p.add_argument("--space", help="space definition file (name=v1,v2,...)")
    p.add_argument("--table", help="measurement CSV")
    p.add_argument("--nk", help="synthetic NK landscape n,k,seed")
    p.add_argument("--exec", help="command template with {option} placeholders")
    p.add_argument("--maximize", action="store_true", help="fitness values are to be maximized")
    p.add_argument("--timeout", type=float)
    p.add_argument("--repeats", type=int, help="executions per external measurement")
    p.add_argument("--aggregation", choices=("mean", "median", "min"))
    p.add_argument("--max-in-flight", type=int)
    p.add_argument("--runs", type=int, help="independent repeats (default 300)")
    p.add_argument("--target", type=int, help="distinct local optima per run (default 100)")
    p.add_argument("--tau", type=int)
    p.add_argument("--kappa", type=int)
    p.add_argument("--restart-prob", type=float)
    p.add_argument("--budget", type=int, help="fitness requests allowed per run")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stable", parents=[common], help="synthesize a structurally stable LON")
    p.add_argument("--runs-dir")
    p.add_argument("--step", type=int)
    p.add_argument("--resamples", type=int)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_stable)

    p = sub.add_parser("analyze", parents=[common], help="prune a LON and compute its metrics")
    p.add_argument("lon")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--name", help="report file prefix (default: LON file stem)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export", parents=[common], help="write DOT, GraphML or JSON")
    p.add_argument("lon")
    p.add_argument("--format", "-f", choices=FORMATS, default="dot")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("compare", parents=[common], help="embed LONs and correlate them")
    p.add_argument("lons", nargs="+")
    p.add_argument("--wl-iterations", type=int)
    p.add_argument("--dimension", type=int)
    p.add_argument("--hash-seed", type=int)
    p.add_argument("--name", default="similarity", help="report file prefix")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.workspace = getattr(args, "workspace", Path("."))
    args.figures = getattr(args, "figures", False)
    for flag in ("seed", "parallelism"):
        if not hasattr(args, flag):
            setattr(args, flag, None)
    try:
        _resolve(args)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (LonError, FormatError, OSError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
