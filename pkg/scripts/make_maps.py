"""Regenerate the shipped map files from their committed recipes."""

import argparse
from importlib import resources
from pathlib import Path

from latticeplan.bench import suite_map_names, suite_recipe
from latticeplan.gridmap import generate_map, save_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path,
                    default=Path(str(resources.files("latticeplan").joinpath("data", "maps"))))
    ap.add_argument("--check", action="store_true", help="fail if any shipped map differs")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    stale = []
    for name in suite_map_names():
        text = save_map(generate_map(suite_recipe(name)))
        path = args.out / f"{name}.txt"
        if args.check:
            if not path.exists() or path.read_text(encoding="utf-8") != text:
                stale.append(name)
        else:
            path.write_text(text, encoding="utf-8")
    if stale:
        raise SystemExit(f"maps out of date: {', '.join(stale)}")
    print(f"{'checked' if args.check else 'wrote'} {len(suite_map_names())} maps in {args.out}")


if __name__ == "__main__":
    main()
