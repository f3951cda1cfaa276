"""Command-line interface.

Exit codes: 0 success, 1 no path found, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .codec import LatticePath, Side, load_tuples, tuple_to_path
from .gridmap import MapError, MapRecipe, generate_map, save_map
from .optimizers import KINDS, OptimizerConfig, optimize
from .render import RenderSpec, render_svg
from .sampler import RandomStream, SamplerConfig, generate_path

EXIT_OK, EXIT_NO_PATH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_map(ref: str):
    try:
        return bench.resolve_map(ref)
    except FileNotFoundError:
        raise UsageError(f"map not found: {ref}") from None
    except (MapError, OSError) as exc:
        raise UsageError(f"cannot load map {ref}: {exc}") from None


def cmd_generate_map(args) -> int:
    try:
        recipe = MapRecipe.from_json(Path(args.recipe).read_text(encoding="utf-8"))
        grid = generate_map(recipe)
    except OSError as exc:
        raise UsageError(f"cannot read recipe: {exc}") from None
    except MapError as exc:
        raise UsageError(str(exc)) from None
    _emit(save_map(grid), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    grid = _load_map(args.map)
    try:
        cfg = SamplerConfig(args.alpha, Side(args.side), args.seed, args.strict_collision == "on")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = generate_path(grid, cfg, RandomStream(args.seed))
    if path is None:
        print(f"no collision-free path for alpha={args.alpha} seed={args.seed}", file=sys.stderr)
        return EXIT_NO_PATH
    _emit(path.to_json() + "\n", args.out)
    return EXIT_OK


def _optimizer_config(args) -> OptimizerConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read optimizer config: {exc}") from None
    base.update(kind=args.optimizer, seed=args.seed)
    try:
        return OptimizerConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_optimize(args) -> int:
    grid = _load_map(args.map)
    cfg = _optimizer_config(args)
    obj = bench.make_objective(grid, args.seed, args.evals, side=Side(args.side),
                               strict_collision=args.strict_collision == "on")
    res = optimize(cfg.kind, cfg, obj)
    inc = res.incumbent
    doc = {
        "map": grid.name,
        "optimizer": cfg.kind,
        "seed": args.seed,
        "evals": obj.budget.used,
        "success": inc is not None,
        "best_alpha": inc.alpha if inc else res.best_alpha,
        "best_length": inc.length if inc else obj.penalty,
        "best_tuple": list(inc.tuple) if inc else None,
        "path": [list(p) for p in inc.path.nodes] if inc else None,
        "config": json.loads(cfg.to_json()),
    }
    if args.out:
        trace_path = Path(args.trace_out or Path(args.out).with_suffix(".trace.csv"))
        doc["trace_file"] = trace_path.name
        trace_path.parent.mkdir(parents=True, exist_ok=True)
        trace_path.write_text(res.trace.to_csv(), encoding="utf-8")
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK if inc is not None else EXIT_NO_PATH


def cmd_bench(args) -> int:
    try:
        manifest = bench.SuiteManifest.load(args.manifest)
        base = Path(args.manifest).parent
        for m in manifest.maps:
            bench.resolve_map(m, base)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad manifest: {exc}") from None
    if args.runs is not None:
        manifest.runs = args.runs
    if args.evals is not None:
        manifest.evals = args.evals
    result = bench.run_suite(manifest, Path(args.out), threads=args.threads, base_dir=base)
    trend = result.trend_check()
    if "holds" in trend:
        verdict = "holds" if trend["holds"] else "REVERSED (investigate)"
        print(f"trend sade>=debest on narrow maps: sade={trend['sade']:.3f} "
              f"debest={trend['debest']:.3f} {verdict}", file=sys.stderr)
    print(f"wrote {len(result.scenarios)} scenarios to {args.out}", file=sys.stderr)
    return EXIT_OK


def _read_paths(files) -> list[LatticePath]:
    paths = []
    for f in files:
        text = Path(f).read_text(encoding="utf-8")
        if f.endswith(".json"):
            doc = json.loads(text)
            if isinstance(doc, dict):
                # an optimize result document
                if doc.get("path"):
                    paths.append(LatticePath.from_json(json.dumps(doc["path"])))
            else:
                paths.append(LatticePath.from_json(text))
        else:
            paths.extend(tuple_to_path(t) for t in load_tuples(text))
    return paths


def cmd_render(args) -> int:
    grid = _load_map(args.map)
    try:
        paths = _read_paths(args.paths)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read paths: {exc}") from None
    spec = RenderSpec(cell=args.cell, path_opacity=args.opacity)
    _emit(render_svg(grid, paths, spec, title=grid.name), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latticeplan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-map", help="rasterize a map recipe")
    g.add_argument("recipe")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate_map)

    def common(sp, seed=True):
        sp.add_argument("--map", required=True, help="shipped map name or map/recipe file")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--side", choices=[s.value for s in Side], default="above")
        sp.add_argument("--strict-collision", choices=["on", "off"], default="on")
        sp.add_argument("--out")

    s = sub.add_parser("sample", help="generate one path for a fixed alpha")
    common(s)
    s.add_argument("--alpha", type=float, required=True)
    s.set_defaults(func=cmd_sample)

    o = sub.add_parser("optimize", help="search alpha with one optimizer")
    common(o)
    o.add_argument("--optimizer", choices=KINDS, required=True)
    o.add_argument("--config", help="optimizer config JSON")
    o.add_argument("--evals", type=int, default=1000)
    o.add_argument("--trace-out")
    o.set_defaults(func=cmd_optimize)

    b = sub.add_parser("bench", help="run a benchmark suite manifest")
    b.add_argument("manifest")
    b.add_argument("--out", required=True, help="results directory")
    b.add_argument("--runs", type=int)
    b.add_argument("--evals", type=int)
    b.add_argument("--threads", type=int, help=f"worker processes (default ${bench.THREADS_ENV})")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("render", help="draw a map with paths as SVG")
    r.add_argument("--map", required=True)
    r.add_argument("paths", nargs="*", help="path JSON, optimize result JSON, or tuple files")
    r.add_argument("--cell", type=int, default=10)
    r.add_argument("--opacity", type=float, default=0.15)
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"latticeplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
