"""Experiment harness: independent runs per (map, optimizer) and suite reports.

A suite run writes, under its output directory::

    results.json                  every scenario with its run records
    scenarios/<map>__<opt>.json   one document per scenario
    convergence/<map>__<opt>.csv  mean and minimum best-so-far per evaluation
    success_ratio.csv             maps x optimizers
    significance/<map>.csv        pairwise rank-sum p-values per map
    significance.csv              the same in long form, with U statistics
    report.json                   trend check and structural checks
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .gridmap import MapRecipe, OccupancyGrid, generate_map, load_map, read_map
from .objective import EvaluationBudget, PathObjective
from .optimizers import KINDS, OptimizerConfig, optimize
from .sampler import RandomStream
from .stats import mean_convergence, min_convergence, rank_sum_test

OBJECTIVE_STREAM = 0
THREADS_ENV = "LATTICEPLAN_THREADS"


# --------------------------------------------------------------------------
# shipped maps


def suite_map_names() -> list[str]:
    files = resources.files("latticeplan").joinpath("data", "recipes").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def suite_recipe(name: str) -> MapRecipe:
    path = resources.files("latticeplan").joinpath("data", "recipes", f"{name}.json")
    return MapRecipe.from_json(path.read_text(encoding="utf-8"))


def suite_map_text(name: str) -> str:
    path = resources.files("latticeplan").joinpath("data", "maps", f"{name}.txt")
    return path.read_text(encoding="utf-8")


def suite_map(name: str) -> OccupancyGrid:
    return load_map(suite_map_text(name), name=name)


def resolve_map(ref: str, base: Path | None = None) -> OccupancyGrid:
    """A shipped map name, a ``.txt`` map file, or a ``.json`` recipe file."""
    if ref in suite_map_names():
        return suite_map(ref)
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    if path.suffix == ".json":
        recipe = MapRecipe.from_json(path.read_text(encoding="utf-8"))
        grid = generate_map(recipe)
        return OccupancyGrid(grid.cells, recipe.name or path.stem)
    return read_map(path)


def is_narrow_passage(name: str) -> bool:
    if name not in suite_map_names():
        return False
    recipe = suite_recipe(name)
    return recipe.kind == "narrow-passage"


# --------------------------------------------------------------------------
# runs


@dataclass
class RunRecord:
    map: str
    optimizer: str
    seed: int
    trace: list[float]
    success: bool
    best_length: float
    best_alpha: float | None
    best_tuple: list[int] | None
    final_fitness: float

    def summary(self) -> dict:
        d = asdict(self)
        del d["trace"]
        return d


def make_objective(grid: OccupancyGrid, seed: int, evals: int, **kw) -> PathObjective:
    return PathObjective(grid, RandomStream(seed, (OBJECTIVE_STREAM,)), EvaluationBudget(evals), **kw)


def run_once(grid: OccupancyGrid, kind: str, seed: int, evals: int = 1000,
             config: OptimizerConfig | None = None, strict_collision: bool = True) -> RunRecord:
    cfg = (config or OptimizerConfig(kind=kind)).replace(kind=kind, seed=seed)
    obj = make_objective(grid, seed, evals, strict_collision=strict_collision)
    res = optimize(kind, cfg, obj)
    inc = res.incumbent
    return RunRecord(
        map=grid.name, optimizer=kind, seed=seed, trace=list(res.trace.best),
        success=inc is not None,
        best_length=inc.length if inc else obj.penalty,
        best_alpha=inc.alpha if inc else res.best_alpha,
        best_tuple=list(inc.tuple) if inc else None,
        final_fitness=res.trace.best[-1] if res.trace else obj.penalty,
    )


@dataclass
class ScenarioResult:
    map: str
    optimizer: str
    evals: int
    records: list[RunRecord] = field(default_factory=list)

    @property
    def success_ratio(self) -> float:
        return sum(r.success for r in self.records) / len(self.records)

    @property
    def mean_trace(self) -> np.ndarray:
        return mean_convergence([r.trace for r in self.records], self.evals)

    @property
    def min_trace(self) -> np.ndarray:
        return min_convergence([r.trace for r in self.records], self.evals)

    @property
    def best_record(self) -> RunRecord:
        return min(self.records, key=lambda r: (r.best_length, r.seed))

    @property
    def final_fitnesses(self) -> list[float]:
        return [r.final_fitness for r in self.records]

    def to_dict(self) -> dict:
        best = self.best_record
        return {
            "map": self.map,
            "optimizer": self.optimizer,
            "evals": self.evals,
            "runs": len(self.records),
            "success_ratio": self.success_ratio,
            "best": best.summary(),
            "records": [r.summary() for r in self.records],
        }

    def convergence_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["evaluation_index", "mean_best_fitness", "min_best_fitness"])
        for i, (m, lo) in enumerate(zip(self.mean_trace, self.min_trace), start=1):
            w.writerow([i, repr(float(m)), repr(float(lo))])
        return buf.getvalue()


def run_scenario(grid: OccupancyGrid, kind: str, runs: int = 20, evals: int = 1000,
                 base_seed: int = 0, config: OptimizerConfig | None = None,
                 strict_collision: bool = True) -> ScenarioResult:
    result = ScenarioResult(grid.name, kind, evals)
    for k in range(runs):
        result.records.append(
            run_once(grid, kind, base_seed + k, evals, config, strict_collision))
    return result


# --------------------------------------------------------------------------
# suites


@dataclass
class SuiteManifest:
    maps: list[str]
    optimizers: list[OptimizerConfig]
    runs: int = 20
    evals: int = 1000
    base_seed: int = 0
    strict_collision: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteManifest":
        maps = d.get("maps", "suite")
        if maps == "suite":
            maps = suite_map_names()
        opts = []
        for o in d.get("optimizers", list(KINDS)):
            opts.append(OptimizerConfig(kind=o) if isinstance(o, str) else OptimizerConfig.from_dict(o))
        return cls(list(maps), opts, int(d.get("runs", 20)), int(d.get("evals", 1000)),
                   int(d.get("base_seed", 0)), bool(d.get("strict_collision", True)))

    @classmethod
    def load(cls, path) -> "SuiteManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {"maps": self.maps, "optimizers": [asdict(o) for o in self.optimizers],
                "runs": self.runs, "evals": self.evals, "base_seed": self.base_seed,
                "strict_collision": self.strict_collision}


def default_manifest() -> SuiteManifest:
    """The shipped suite manifest (20 maps, 5 optimizers, 20 runs x 1000 evals)."""
    text = resources.files("latticeplan").joinpath("data", "suite_manifest.json").read_text(
        encoding="utf-8")
    return SuiteManifest.from_dict(json.loads(text))


def _scenario_job(args) -> ScenarioResult:
    grid, cfg, runs, evals, seed, strict = args
    return run_scenario(grid, cfg.kind, runs, evals, seed, cfg, strict)


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _scenario_stem(s: ScenarioResult) -> str:
    return f"{s.map}__{s.optimizer}"


@dataclass
class SuiteResult:
    manifest: SuiteManifest
    scenarios: list[ScenarioResult]

    def get(self, map_name: str, kind: str) -> ScenarioResult:
        for s in self.scenarios:
            if s.map == map_name and s.optimizer == kind:
                return s
        raise KeyError((map_name, kind))

    @property
    def kinds(self) -> list[str]:
        return [o.kind for o in self.manifest.optimizers]

    def success_matrix(self) -> dict[str, dict[str, float]]:
        return {m: {k: self.get(m, k).success_ratio for k in self.kinds} for m in self.manifest.maps}

    def significance(self, map_name: str) -> list[dict]:
        rows = []
        kinds = self.kinds
        for i, a in enumerate(kinds):
            for b in kinds[i + 1:]:
                res = rank_sum_test(self.get(map_name, a).final_fitnesses,
                                    self.get(map_name, b).final_fitnesses)
                rows.append({"map": map_name, "a": a, "b": b, "U": res.U, "p": res.p})
        return rows

    def trend_check(self) -> dict:
        narrow = [m for m in self.manifest.maps if is_narrow_passage(m)]
        out: dict = {"narrow_maps": narrow}
        if narrow and {"sade", "debest"} <= set(self.kinds):
            sade = float(np.mean([self.get(m, "sade").success_ratio for m in narrow]))
            debest = float(np.mean([self.get(m, "debest").success_ratio for m in narrow]))
            out.update(sade=sade, debest=debest, holds=sade >= debest)
        return out

    def structural_checks(self) -> dict:
        monotone = all(np.all(np.diff(r.trace) <= 0) for s in self.scenarios for r in s.records)
        ratios = all(0.0 <= s.success_ratio <= 1.0 for s in self.scenarios)
        ps = [row["p"] for m in self.manifest.maps for row in self.significance(m)]
        return {"traces_monotone": bool(monotone), "success_ratios_in_unit_interval": ratios,
                "p_values_in_range": all(0.0 < p <= 1.0 for p in ps)}

    def results_document(self) -> dict:
        return {"manifest": self.manifest.to_dict(),
                "scenarios": [s.to_dict() for s in self.scenarios]}

    def write(self, out: Path) -> None:
        out = Path(out)
        for s in self.scenarios:
            stem = _scenario_stem(s)
            _write(out / "scenarios" / f"{stem}.json", json.dumps(s.to_dict(), indent=2) + "\n")
            _write(out / "convergence" / f"{stem}.csv", s.convergence_csv())
        _write(out / "results.json", json.dumps(self.results_document(), indent=2) + "\n")

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["map"] + self.kinds)
        for m, row in self.success_matrix().items():
            w.writerow([m] + [repr(row[k]) for k in self.kinds])
        _write(out / "success_ratio.csv", buf.getvalue())

        long = io.StringIO()
        lw = csv.writer(long, lineterminator="\n")
        lw.writerow(["map", "a", "b", "U", "p"])
        for m in self.manifest.maps:
            rows = self.significance(m)
            pmat = {(r["a"], r["b"]): r["p"] for r in rows}
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow([""] + self.kinds)
            for a in self.kinds:
                cells = []
                for b in self.kinds:
                    p = 1.0 if a == b else pmat.get((a, b), pmat.get((b, a)))
                    cells.append(repr(p))
                w.writerow([a] + cells)
            _write(out / "significance" / f"{m}.csv", buf.getvalue())
            for r in rows:
                lw.writerow([r["map"], r["a"], r["b"], repr(r["U"]), repr(r["p"])])
        _write(out / "significance.csv", long.getvalue())

        report = {"trend_check": self.trend_check(), "structural": self.structural_checks()}
        _write(out / "report.json", json.dumps(report, indent=2) + "\n")


def run_suite(manifest: SuiteManifest, out: Path | None = None, threads: int | None = None,
              base_dir: Path | None = None) -> SuiteResult:
    grids = {m: resolve_map(m, base_dir) for m in manifest.maps}
    jobs = [(grids[m], cfg, manifest.runs, manifest.evals, manifest.base_seed,
             manifest.strict_collision)
            for m in manifest.maps for cfg in manifest.optimizers]
    threads = min(threads or thread_cap(), len(jobs)) if jobs else 1
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            scenarios = list(pool.map(_scenario_job, jobs))
    else:
        scenarios = [_scenario_job(j) for j in jobs]
    # map names come from the manifest, not the grid label
    for s, (m, _) in zip(scenarios, ((m, c) for m in manifest.maps for c in manifest.optimizers)):
        s.map = m
        for r in s.records:
            r.map = m
    result = SuiteResult(manifest, scenarios)
    if out is not None:
        result.write(Path(out))
    return result

