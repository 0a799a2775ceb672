"""Command-line entry point.

Subcommands: detect, baseline, eval, synth, sweep, rerun. Every run writes a
JSON manifest next to its outputs with the resolved parameters and seeds;
`smsl rerun MANIFEST` replays the recorded command and reproduces the
outputs bitwise.

Exit codes: 0 success, 1 runtime/data failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import baselines, cube, evaluate, solver
from .detector import DetectorConfig, detect_with_result
from .evaluate import SynthSpec, apply_params, roc, synth_scene, sweep, \
    write_roc_csv, write_sweep_csv
from .sketch import SketchConfig
from .solver import SolverConfig

_INT_PARAMS = {"sketch_size", "seed", "repeats", "max_iter"}


class UsageError(ValueError):
    """Invalid arguments or configuration (exit code 2)."""


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=10.0)
    p.add_argument("--lambda3", type=float, default=10.0)
    p.add_argument("--max-iter", type=int, default=60)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--mu0", type=float, default=1e-5)
    p.add_argument("--mu-max", type=float, default=1e5)
    p.add_argument("--rho", type=float, default=1.1)


def _add_sketch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sketch-size", type=int, default=500)
    p.add_argument("--sketch-repeats", type=int, default=10)
    p.add_argument("--sketch-average", choices=("dictionary", "scores"),
                   default="dictionary")
    p.add_argument("--seed", type=int, default=0)


def _detector_config(args) -> DetectorConfig:
    try:
        return DetectorConfig(
            sketch=SketchConfig(
                n_h=args.sketch_size,
                seed=args.seed,
                repeats=args.sketch_repeats,
                average_mode=args.sketch_average,
            ),
            solver=SolverConfig(
                lambda1=args.lambda1,
                lambda2=args.lambda2,
                lambda3=args.lambda3,
                mu0=args.mu0,
                mu_max=args.mu_max,
                rho=args.rho,
                max_iter=args.max_iter,
                epsilon=args.eps,
            ),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_views(paths) -> cube.ViewSet:
    return cube.ViewSet(tuple(cube.load_cube(p) for p in paths))


def _write_manifest(path: str, command: str, argv: list, params: dict,
                    inputs: list, outputs: list, wall_time: float,
                    convergence=None) -> None:
    manifest = {
        "command": command,
        "argv": list(argv),
        "params": params,
        "inputs": list(inputs),
        "outputs": list(outputs),
        "wall_time_s": wall_time,
    }
    if convergence is not None:
        manifest["convergence"] = convergence
    with open(path, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(out: str) -> str:
    return out + ".manifest.json"


def cmd_detect(args, argv) -> int:
    cfg = _detector_config(args)
    views = _load_views(args.cubes)
    start = time.monotonic()
    scores, result = detect_with_result(views, cfg)
    elapsed = time.monotonic() - start
    cube.save_scores(scores, args.out)
    outputs = [args.out]
    if args.trace:
        solver.write_trace_csv(result.trace, args.trace)
        outputs.append(args.trace)
    convergence = {
        "converged": result.converged,
        "iterations_run": result.iterations_run,
        "final_max_residual": result.residual_history[-1],
    }
    _write_manifest(_manifest_path(args.out), "detect", argv,
                    _params_dict(args, ("cubes", "out", "trace")),
                    args.cubes, outputs, elapsed, convergence)
    return 0


def cmd_baseline(args, argv) -> int:
    if args.ridge is not None and args.ridge < 0:
        raise UsageError("--ridge must be nonnegative")
    views = _load_views(args.cubes)
    start = time.monotonic()
    scores = baselines.run_baseline(args.method, views, args.ridge)
    elapsed = time.monotonic() - start
    cube.save_scores(scores, args.out)
    _write_manifest(_manifest_path(args.out), "baseline", argv,
                    _params_dict(args, ("cubes", "out")),
                    args.cubes, [args.out], elapsed)
    return 0


def cmd_eval(args, argv) -> int:
    scores = cube.load_scores(args.scores)
    mask = cube.load_mask(args.mask)
    try:
        curve = roc(scores, mask)
    except ValueError as exc:
        raise cube.FormatError(str(exc)) from exc
    outputs = []
    if args.roc_out:
        write_roc_csv(curve, args.roc_out)
        outputs.append(args.roc_out)
        _write_manifest(_manifest_path(args.roc_out), "eval", argv,
                        _params_dict(args, ()), [args.scores, args.mask],
                        outputs, 0.0)
    print(f"auc={curve.auc:.6f}")
    return 0


def cmd_synth(args, argv) -> int:
    try:
        spec = SynthSpec(
            height=args.height, width=args.width, bands=args.bands,
            views=args.views, n_endmembers=args.endmembers,
            n_anomalies=args.anomalies, anomaly_magnitude=args.magnitude,
            noise_sigma=args.noise, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    views, mask = synth_scene(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []
    for i, v in enumerate(views.views, start=1):
        path = os.path.join(args.out_dir, f"view_{i}.hdr")
        cube.save_cube(v, path)
        outputs.append(path)
    mask_path = os.path.join(args.out_dir, "mask.pgm")
    cube.save_mask(mask, mask_path)
    outputs.append(mask_path)
    _write_manifest(os.path.join(args.out_dir, "manifest.json"), "synth",
                    argv, _params_dict(args, ("out_dir",)), [], outputs, 0.0)
    return 0


def parse_grid(text: str) -> dict:
    """Parse "lambda2=0.1,1,10;lambda3=1,10" into {name: [values]}."""
    grid = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise UsageError(f"malformed grid entry {part!r}")
        name, values = part.split("=", 1)
        name = name.strip()
        caster = int if name in _INT_PARAMS else float
        try:
            grid[name] = [caster(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"malformed grid values for {name!r}") from None
        if not grid[name]:
            raise UsageError(f"grid parameter {name!r} has no values")
    if not grid:
        raise UsageError("empty sweep grid")
    return grid


def cmd_sweep(args, argv) -> int:
    grid = parse_grid(args.grid)
    base_cfg = _detector_config(args)
    try:
        for name in grid:
            apply_params(base_cfg, {name: grid[name][0]})
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    views = _load_views(args.cubes)
    mask = cube.load_mask(args.mask)
    start = time.monotonic()
    rows = sweep(views, mask, base_cfg, grid, jobs=args.jobs)
    elapsed = time.monotonic() - start
    write_sweep_csv(rows, args.out)
    _write_manifest(_manifest_path(args.out), "sweep", argv,
                    _params_dict(args, ("cubes", "out")),
                    list(args.cubes) + [args.mask], [args.out], elapsed)
    return 0


def cmd_rerun(args, _argv) -> int:
    with open(args.manifest, "r", encoding="ascii") as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


def _params_dict(args, exclude=()) -> dict:
    skip = set(exclude) | {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smsl",
        description="Sketched multi-view subspace learning for anomalous "
                    "change detection in multi-temporal hyperspectral cubes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the subspace-learning detector")
    p.add_argument("cubes", nargs="+", help="2+ cube header files, in time order")
    p.add_argument("--out", required=True, help="output scores header path")
    p.add_argument("--trace", default=None, help="per-iteration residual CSV")
    _add_sketch_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("baseline", help="run a classical detector")
    p.add_argument("cubes", nargs=2, help="exactly 2 cube header files")
    p.add_argument("--method", required=True, choices=baselines.METHODS)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score a detection map against a mask")
    p.add_argument("--scores", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--roc-out", default=None, help="ROC points CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic scene + mask")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--bands", type=int, default=16)
    p.add_argument("--views", type=int, default=2)
    p.add_argument("--endmembers", type=int, default=4)
    p.add_argument("--anomalies", type=int, default=20)
    p.add_argument("--magnitude", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="grid-evaluate detector parameters")
    p.add_argument("cubes", nargs="+")
    p.add_argument("--mask", required=True)
    p.add_argument("--grid", required=True,
                   help='e.g. "lambda2=0.1,1,10;lambda3=0.1,1,10"')
    p.add_argument("--out", required=True, help="sweep results CSV path")
    p.add_argument("--jobs", type=int, default=1)
    _add_sketch_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rerun", help="replay a command from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"smsl: {exc}", file=sys.stderr)
        return 2
    except (cube.FormatError, solver.SolverError, OSError) as exc:
        print(f"smsl: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"smsl: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
