"""Run the shipped benchmark suite and render the best path per scenario.

Writes the bench outputs to ``--out`` (default ``results/``) plus one SVG per
map overlaying every successful run of every optimizer.
"""

import argparse
import sys
import time
from pathlib import Path

from latticeplan import bench
from latticeplan.codec import tuple_to_path
from latticeplan.render import RenderSpec, render_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--manifest", type=Path, help="defaults to the shipped suite manifest")
    ap.add_argument("--runs", type=int)
    ap.add_argument("--evals", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--no-render", action="store_true")
    args = ap.parse_args()

    manifest = bench.SuiteManifest.load(args.manifest) if args.manifest else bench.default_manifest()
    if args.runs:
        manifest.runs = args.runs
    if args.evals:
        manifest.evals = args.evals
    t0 = time.perf_counter()
    result = bench.run_suite(manifest, args.out, threads=args.threads,
                             base_dir=args.manifest.parent if args.manifest else None)
    print(f"{len(result.scenarios)} scenarios in {time.perf_counter() - t0:.0f} s", file=sys.stderr)

    kinds = result.kinds
    print("map      " + " ".join(f"{k:>7}" for k in kinds))
    for m, row in result.success_matrix().items():
        print(f"{m:8} " + " ".join(f"{row[k]:7.2f}" for k in kinds))
    trend = result.trend_check()
    if "holds" in trend:
        print(f"narrow-passage maps: sade {trend['sade']:.3f} vs debest {trend['debest']:.3f} "
              f"({'holds' if trend['holds'] else 'reversed'})")
    print("structural:", result.structural_checks())

    if not args.no_render:
        for m in manifest.maps:
            grid = bench.resolve_map(m, args.manifest.parent if args.manifest else None)
            paths = [tuple_to_path(r.best_tuple) for k in kinds for r in result.get(m, k).records
                     if r.success]
            svg = render_svg(grid, paths, RenderSpec(path_opacity=0.1), title=m)
            (args.out / "svg").mkdir(parents=True, exist_ok=True)
            (args.out / "svg" / f"{m}.svg").write_text(svg, encoding="utf-8")


if __name__ == "__main__":
    main()
