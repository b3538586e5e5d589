"""Seeded, replicated Monte-Carlo experiments with CSV/JSON reports.

Every replica is a pure function of (config, replica_id): the replica
seed is derived from the master seed by an injective hash, so reports
are byte-identical across runs and across serial/parallel execution.
Reports persist as a rows CSV (columns replica,seed,flag,stat_name,value)
plus a JSON document with config echo, aggregates and version strings.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from .dimension import default_fit_range, estimate_dimension
from .errors import DomainError
from .grid import CantorSpec, GridSet, GridSpec, cantor_set, hausdorff_sum, scale_counts
from .rng import PRNG_VERSION, derive_replica_seed
from .walk import (
    PERKINS_NORMALIZER,
    image_depth,
    image_set,
    level_set,
    local_time,
    occupation_lambda,
    running_max,
    sample_walk,
)

try:
    TOOLKIT_VERSION = metadata.version("fractal-lab")
except metadata.PackageNotFoundError:  # pragma: no cover - dev tree without install
    TOOLKIT_VERSION = "0+unknown"

KINDS = ("zero_set_dim", "doubling", "perkins", "levy_identity", "cantor_exact")

CSV_HEADER = "replica,seed,flag,stat_name,value"

# Replicas whose derived set cannot support a meaningful two-parameter
# log-log fit are flagged with this token and excluded from aggregates.
SPARSE_FLAG = "sparse"
SPARSE_MIN_CELLS = 4
ZERO_LOCAL_TIME_FLAG = "zero_local_time"

# Image counts at finite scale are sigmoidal in the level: discreteness
# flattens the coarse end and level-set collisions flatten the fine end.
# The doubling runner therefore fits the steepest window of this width
# unless the config pins an explicit range.
IMAGE_FIT_WINDOW_MIN = 4

_SMOKE_STEPS_LOG2 = 10
_SMOKE_REPLICAS = 5
_SMOKE_DEPTH = 10

_PROFILE_BETAS = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    steps_log2: int | None = None
    replicas: int = 1
    master_seed: int = 0
    fit_lo: int | None = None
    fit_hi: int | None = None
    cantor_base: int | None = None
    cantor_kept: tuple[int, ...] | None = None
    cantor_depth: int | None = None
    beta: float | None = None
    deltas: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise DomainError("replicas must be >= 1")
        if self.cantor_kept is not None:
            object.__setattr__(self, "cantor_kept", tuple(int(d) for d in self.cantor_kept))
        if self.deltas is not None:
            ds = tuple(float(d) for d in self.deltas)
            if not ds or any(d <= 0 for d in ds):
                raise DomainError("deltas must be positive")
            if any(b >= a for a, b in zip(ds, ds[1:])):
                raise DomainError("deltas must be strictly decreasing")
            object.__setattr__(self, "deltas", ds)
        if (self.fit_lo is None) != (self.fit_hi is None):
            raise DomainError("fit_lo and fit_hi must be given together")
        needs_walk = self.kind in ("zero_set_dim", "doubling", "perkins", "levy_identity")
        if needs_walk and self.steps_log2 is None:
            raise DomainError(f"{self.kind} requires steps_log2")
        if self.kind == "doubling":
            if self.cantor_base is None or self.cantor_kept is None:
                raise DomainError("doubling requires cantor_base and cantor_kept")
            if self.cantor_depth is not None:
                raise DomainError("doubling derives the embedding depth; leave cantor_depth unset")
            alpha = self.alpha()
            if alpha >= 0.5:
                raise DomainError(
                    f"doubling requires a time set of dimension < 1/2, got {alpha:.4f}"
                )
        if self.kind == "perkins" and self.deltas is None:
            raise DomainError("perkins requires a decreasing list of deltas")
        if self.kind == "cantor_exact":
            if self.cantor_base is None or self.cantor_kept is None or self.cantor_depth is None:
                raise DomainError("cantor_exact requires cantor_base, cantor_kept, cantor_depth")
            if self.beta is not None and not 0.0 <= self.beta <= 1.0:
                raise DomainError("beta must lie in [0,1]")

    def alpha(self) -> float:
        """Similarity dimension of the configured digit set."""
        if self.cantor_base is None or self.cantor_kept is None:
            raise DomainError("no cantor digits configured")
        return math.log(len(set(self.cantor_kept))) / math.log(self.cantor_base)

    def smoke(self) -> "ExperimentConfig":
        """CI preset: clamp to steps_log2 <= 10, replicas <= 5, depth <= 10."""
        changes: dict = {"replicas": min(self.replicas, _SMOKE_REPLICAS)}
        if self.steps_log2 is not None:
            changes["steps_log2"] = min(self.steps_log2, _SMOKE_STEPS_LOG2)
        if self.kind == "cantor_exact" and self.cantor_depth is not None:
            changes["cantor_depth"] = min(self.cantor_depth, _SMOKE_DEPTH)
        if self.fit_lo is not None:
            changes["fit_lo"] = None
            changes["fit_hi"] = None
        return replace(self, **changes)

    def to_json_dict(self) -> dict:
        out: dict = {
            "kind": self.kind,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
        }
        if self.steps_log2 is not None:
            out["steps_log2"] = self.steps_log2
        if self.fit_lo is not None:
            out["fit_lo"] = self.fit_lo
            out["fit_hi"] = self.fit_hi
        if self.cantor_base is not None:
            cantor: dict = {"base": self.cantor_base, "kept": list(self.cantor_kept or ())}
            if self.cantor_depth is not None:
                cantor["depth"] = self.cantor_depth
            out["cantor"] = cantor
        if self.beta is not None:
            out["beta"] = self.beta
        if self.deltas is not None:
            out["deltas"] = list(self.deltas)
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {
            "kind", "steps_log2", "replicas", "master_seed",
            "fit_lo", "fit_hi", "cantor", "beta", "deltas",
        }
        unknown = set(obj) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        cantor = obj.get("cantor") or {}
        if set(cantor) - {"base", "kept", "depth"}:
            raise DomainError(f"unknown cantor keys: {sorted(set(cantor) - {'base', 'kept', 'depth'})}")
        return cls(
            kind=obj.get("kind", ""),
            steps_log2=obj.get("steps_log2"),
            replicas=int(obj.get("replicas", 1)),
            master_seed=int(obj.get("master_seed", 0)),
            fit_lo=obj.get("fit_lo"),
            fit_hi=obj.get("fit_hi"),
            cantor_base=cantor.get("base"),
            cantor_kept=tuple(cantor["kept"]) if "kept" in cantor else None,
            cantor_depth=cantor.get("depth"),
            beta=obj.get("beta"),
            deltas=tuple(obj["deltas"]) if "deltas" in obj else None,
        )

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    rows: tuple  # (replica, seed, flag, stat_name, value)
    aggregates: dict
    extras: dict
    rows_used: int
    rows_flagged: int
    toolkit_version: str = TOOLKIT_VERSION
    prng_version: str = PRNG_VERSION

    def csv_text(self) -> str:
        lines = [CSV_HEADER]
        for replica, seed, flag, stat, value in self.rows:
            lines.append(f"{replica},{seed},{flag},{stat},{float(value)!r}")
        return "\n".join(lines) + "\n"

    def json_dict(self, timestamp: str | None = None) -> dict:
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat()
        return {
            "schema": "fractal-lab/report-v1",
            "kind": self.config.kind,
            "config": self.config.to_json_dict(),
            "aggregates": self.aggregates,
            "extras": self.extras,
            "rows_used": self.rows_used,
            "rows_flagged": self.rows_flagged,
            "toolkit_version": self.toolkit_version,
            "prng_version": self.prng_version,
            "metadata": {"created_at": timestamp},
        }

    def json_text(self, timestamp: str | None = None) -> str:
        return json.dumps(self.json_dict(timestamp), sort_keys=True, indent=2) + "\n"

    def write(self, outdir) -> tuple[Path, Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / "rows.csv"
        json_path = outdir / "report.json"
        csv_path.write_text(self.csv_text(), encoding="utf-8")
        json_path.write_text(self.json_text(), encoding="utf-8")
        return csv_path, json_path


def embedded_cantor_times(base: int, kept, steps_log2: int) -> GridSet:
    """Digit-restricted time set embedded into the binary walk grid.

    The base-b construction runs to the deepest k with base**k <= 2**m;
    each selected base-b cell then claims every binary cell of depth m
    whose midpoint falls inside it, preserving the scaling law to within
    one binary level.
    """
    k = 0
    while base ** (k + 1) <= 2**steps_log2:
        k += 1
    if k < 1:
        raise DomainError(
            f"base {base} too coarse for a 2**{steps_log2}-step walk"
        )
    coarse = cantor_set(CantorSpec(base, tuple(kept), k))
    b_pow = base**k
    two_pow = 2 ** (steps_log2 + 1)
    c = coarse.cells
    # midpoint (2j+1)/2**(m+1) lies in [c/b**k, (c+1)/b**k)
    j_min = (c * two_pow - b_pow + (2 * b_pow - 1)) // (2 * b_pow)
    j_max = ((c + 1) * two_pow - b_pow + (2 * b_pow - 1)) // (2 * b_pow) - 1
    cells = np.concatenate(
        [np.arange(a, z + 1, dtype=np.int64) for a, z in zip(j_min, j_max)]
    )
    return GridSet(GridSpec(2, steps_log2), cells)


def steepest_fit_range(counts, base: int, depth: int, width: int) -> tuple[int, int]:
    """Contiguous window of the given width maximizing the fitted slope.

    Scaling-regime detection for image counts; level 0 is always skipped
    (a single root cell carries no scale information).
    """
    if depth - width + 1 < 1:
        lo = 1 if depth >= 2 else 0
        return lo, depth
    best = None
    best_slope = -math.inf
    for lo in range(1, depth - width + 2):
        est = estimate_dimension(counts, lo, lo + width - 1, base=base)
        if est.slope > best_slope:
            best_slope = est.slope
            best = (lo, lo + width - 1)
    return best


def _fit_window(config: ExperimentConfig, depth: int) -> tuple[int, int]:
    if config.fit_lo is not None:
        return config.fit_lo, config.fit_hi
    return default_fit_range(depth)


def _replica_stats(config: ExperimentConfig, replica: int):
    """Compute (flag, [(stat, value), ...]) for one replica; pure in its args."""
    seed = derive_replica_seed(config.master_seed, replica)
    kind = config.kind
    if kind == "zero_set_dim":
        path = sample_walk(config.steps_log2, seed)
        zero = level_set(path, 0)
        stats = [("zero_cells", float(zero.count))]
        if zero.count < SPARSE_MIN_CELLS:
            return seed, SPARSE_FLAG, stats
        lo, hi = _fit_window(config, zero.depth)
        est = estimate_dimension(scale_counts(zero), lo, hi, base=2)
        stats.append(("dim_slope", est.slope))
        return seed, "", stats
    if kind == "doubling":
        times = embedded_cantor_times(config.cantor_base, config.cantor_kept, config.steps_log2)
        path = sample_walk(config.steps_log2, seed)
        image = image_set(path, times)
        stats = [("image_cells", float(image.count))]
        if image.count < SPARSE_MIN_CELLS:
            return seed, SPARSE_FLAG, stats
        counts = scale_counts(image)
        if config.fit_lo is not None:
            lo, hi = config.fit_lo, config.fit_hi
        else:
            width = max(IMAGE_FIT_WINDOW_MIN, -(-image.depth // 3))
            lo, hi = steepest_fit_range(counts, 2, image.depth, width)
        est = estimate_dimension(counts, lo, hi, base=2)
        stats.append(("dim_slope", est.slope))
        return seed, "", stats
    if kind == "perkins":
        path = sample_walk(config.steps_log2, seed)
        n = path.n_steps
        lt = local_time(path, n, 0)
        if lt == 0.0:
            return seed, ZERO_LOCAL_TIME_FLAG, []
        stats = []
        for delta in config.deltas:
            lam = occupation_lambda(path, n, 0, delta)
            ratio = lam / math.sqrt(delta) / (PERKINS_NORMALIZER * lt)
            stats.append((f"perkins_ratio_delta_{delta!r}", ratio))
        return seed, "", stats
    if kind == "levy_identity":
        path = sample_walk(config.steps_log2, seed)
        n = path.n_steps
        lt = local_time(path, n, 0)
        max_value = float(running_max(path)[-1]) * path.sqrt_dt
        return seed, "", [("local_time", lt), ("running_max", max_value)]
    if kind == "cantor_exact":
        spec = CantorSpec(config.cantor_base, config.cantor_kept, config.cantor_depth)
        gs = cantor_set(spec)
        beta = config.beta if config.beta is not None else spec.dimension
        counts = scale_counts(gs)
        stats = [(f"count_level_{level:02d}", float(c)) for level, c in enumerate(counts)]
        stats.append(("hausdorff_sum", hausdorff_sum(gs, beta, gs.depth)))
        if gs.depth >= 1:  # a depth-0 grid has no scales to fit across
            lo, hi = _fit_window(config, gs.depth)
            est = estimate_dimension(counts, lo, hi, base=gs.base)
            stats.append(("dim_slope", est.slope))
        return seed, "", stats
    raise DomainError(f"unknown experiment kind {kind!r}")


def _replica_task(args):
    config, replica = args
    seed, flag, stats = _replica_stats(config, replica)
    return replica, seed, flag, stats


def _aggregate(rows) -> dict:
    by_stat: dict[str, list[float]] = {}
    for _, _, flag, stat, value in rows:
        if flag == "":
            by_stat.setdefault(stat, []).append(float(value))
    out = {}
    for stat in sorted(by_stat):
        values = np.asarray(by_stat[stat], dtype=np.float64)
        out[stat] = {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if values.size > 1 else None,
            "count": int(values.size),
        }
    return out


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run all replicas (optionally in parallel) and assemble the report."""
    tasks = [(config, r) for r in range(config.replicas)]
    if jobs > 1 and config.replicas > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replica_task, tasks, chunksize=1))
    else:
        results = [_replica_task(t) for t in tasks]
    results.sort(key=lambda item: item[0])
    rows = []
    flagged = 0
    for replica, seed, flag, stats in results:
        if flag:
            flagged += 1
        for stat, value in stats:
            rows.append((replica, seed, flag, stat, float(value)))
    aggregates = _aggregate(rows)
    extras = _build_extras(config, rows, aggregates)
    return ExperimentReport(
        config=config,
        rows=tuple(rows),
        aggregates=aggregates,
        extras=extras,
        rows_used=config.replicas - flagged,
        rows_flagged=flagged,
    )


def _build_extras(config: ExperimentConfig, rows, aggregates: dict) -> dict:
    kind = config.kind
    if kind == "zero_set_dim":
        lo, hi = _fit_window(config, config.steps_log2)
        return {"theory_dimension": 0.5, "fit_lo": lo, "fit_hi": hi}
    if kind == "doubling":
        alpha = config.alpha()
        extras = {
            "alpha": alpha,
            "target_dimension": 2.0 * alpha,
            "image_depth": image_depth(config.steps_log2),
        }
        slope = aggregates.get("dim_slope")
        if slope is not None:
            extras["ratio_mean_to_alpha"] = slope["mean"] / alpha
        return extras
    if kind == "perkins":
        return {
            "deltas": list(config.deltas),
            "normalizer": PERKINS_NORMALIZER,
            "target_ratio": 1.0,
            "stat_names": [f"perkins_ratio_delta_{d!r}" for d in config.deltas],
        }
    if kind == "levy_identity":
        lt = [v for _, _, flag, stat, v in rows if flag == "" and stat == "local_time"]
        mx = [v for _, _, flag, stat, v in rows if flag == "" and stat == "running_max"]
        extras: dict = {"p_max_positive": float(np.mean(np.asarray(mx) > 0.0)) if mx else None}
        if len(lt) >= 2:
            extras["ks_statistic"] = float(scipy_stats.ks_2samp(lt, mx).statistic)
            extras["ks_degenerate"] = False
        else:
            extras["ks_statistic"] = None
            extras["ks_degenerate"] = True
        extras["ks_critical_1pct"] = 1.628 * math.sqrt(2.0 / config.replicas)
        return extras
    if kind == "cantor_exact":
        spec = CantorSpec(config.cantor_base, config.cantor_kept, config.cantor_depth)
        gs = cantor_set(spec)
        beta = config.beta if config.beta is not None else spec.dimension
        counts = scale_counts(gs)
        profile_betas = [b for b in _PROFILE_BETAS]
        sums = [hausdorff_sum(gs, b, gs.depth) for b in profile_betas]
        extras = {
            "base": spec.base,
            "kept": list(spec.kept_digits),
            "depth": spec.depth,
            "beta": beta,
            "similarity_dimension": spec.dimension,
            "hausdorff_sum": hausdorff_sum(gs, beta, gs.depth),
            "threshold_profile": {"betas": profile_betas, "sums": sums},
        }
        if gs.depth >= 1:
            lo, hi = _fit_window(config, gs.depth)
            extras["estimate"] = estimate_dimension(counts, lo, hi, base=gs.base).to_json_dict()
        return extras
    return {}


def run_zero_set_dim(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    if config.kind != "zero_set_dim":
        raise DomainError(f"expected kind zero_set_dim, got {config.kind}")
    return run_experiment(config, jobs=jobs)


def run_doubling(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    if config.kind != "doubling":
        raise DomainError(f"expected kind doubling, got {config.kind}")
    return run_experiment(config, jobs=jobs)


def run_perkins(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    if config.kind != "perkins":
        raise DomainError(f"expected kind perkins, got {config.kind}")
    return run_experiment(config, jobs=jobs)


def run_levy_identity(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    if config.kind != "levy_identity":
        raise DomainError(f"expected kind levy_identity, got {config.kind}")
    return run_experiment(config, jobs=jobs)


def run_cantor_exact(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    if config.kind != "cantor_exact":
        raise DomainError(f"expected kind cantor_exact, got {config.kind}")
    return run_experiment(config, jobs=jobs)
