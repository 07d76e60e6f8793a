"""Experiment orchestration: seeded streams, success rates, sweeps.

Every random object an experiment touches comes from a named substream of
one master seed.  A substream is addressed by a short label ("phi/7",
"u/7", ...) hashed into the seed material, so trial i of a run can be
reproduced, or a single component of it swapped, without replaying
anything else.

Success for a decimation trial means the returned assignment satisfies
the original formula, established by re-evaluating it.  The run trace's
violation counter is recorded as a diagnostic but is not trusted for the
verdict.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Sequence

import numpy as np

from .bp import bp_rule
from .decimation import LocalRule, draw_ordering, draw_seeds, run, unit_clause_rule
from .errors import InvalidParametersError
from .instance import evaluate, generate
from .sp import sp_rule

_ALGORITHMS = ("uc", "bp", "sp")


def stream(master_seed: int, label: str) -> np.random.Generator:
    """Generator for one named substream of a master seed."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "big") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(master_seed)] + words))


def rng_streams(master_seed: int, *labels: str) -> tuple[np.random.Generator, ...]:
    return tuple(stream(master_seed, lab) for lab in labels)


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """95% score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise InvalidParametersError(
            f"need 0 <= successes <= trials, got {successes}/{trials}"
        )
    z = 1.959963984540054
    ph = successes / trials
    z2 = z * z
    den = 1.0 + z2 / trials
    center = (ph + z2 / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z2 / (4 * trials * trials)) / den
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    n: int
    k: int = 3
    density: float | None = None
    grid: tuple[float, ...] = ()
    t: int = 1
    trials: int = 100
    seed: int = 0
    out: str | None = None
    sp_mode: str = "sample"
    sp_samples: int = 200

    def validate(self) -> None:
        if self.algorithm not in _ALGORITHMS:
            raise InvalidParametersError(
                f"algorithm must be one of {_ALGORITHMS}, got {self.algorithm!r}"
            )
        if self.n < self.k or self.k < 2:
            raise InvalidParametersError(f"need n >= K >= 2, got n={self.n}, K={self.k}")
        if self.t < 1:
            raise InvalidParametersError(f"rule rounds must be >= 1, got {self.t}")
        if self.trials < 1:
            raise InvalidParametersError(f"trials must be >= 1, got {self.trials}")
        if self.density is not None and self.density < 0:
            raise InvalidParametersError(f"density must be >= 0, got {self.density}")
        if any(d < 0 for d in self.grid):
            raise InvalidParametersError("grid densities must all be >= 0")
        if self.sp_mode not in ("sample", "estimate"):
            raise InvalidParametersError(f"unknown sp mode {self.sp_mode!r}")
        if self.sp_mode == "estimate" and self.sp_samples < 1:
            raise InvalidParametersError("estimate mode needs at least one sample")


def rule_from_config(config: ExperimentConfig) -> LocalRule:
    if config.algorithm == "uc":
        return unit_clause_rule()
    if config.algorithm == "bp":
        return bp_rule(r=2 * config.t)
    if config.sp_mode == "estimate":
        return sp_rule(config.t, mode="estimate", samples=config.sp_samples, seed=config.seed)
    return sp_rule(config.t, mode="sample", seed=config.seed)


@dataclass(frozen=True)
class ResultRecord:
    algorithm: str
    n: int
    k: int
    t: int
    seed: int
    density: float
    trials: int
    successes: int
    alpha: float
    ci_low: float
    ci_high: float
    mean_violations: float
    max_violations: int
    wall_clock: float


def _trial(config: ExperimentConfig, density: float, i: int) -> tuple[int, int, bool]:
    phi = generate(config.n, config.k, density, stream(config.seed, f"phi/{i}"))
    z = draw_ordering(config.n, stream(config.seed, f"z/{i}"))
    u = draw_seeds(config.n, stream(config.seed, f"u/{i}"))
    keys = stream(config.seed, f"spinit/{i}").integers(
        0, 1 << 31, size=config.n, dtype=np.int64
    )
    rule = rule_from_config(config)
    tr = run(phi, rule, z, u, init_keys=keys)
    ok = tr.violations == 0 and evaluate(phi, tr.assignment).sat
    return i, tr.violations, bool(ok)


def _trial_star(args) -> tuple[int, int, bool]:
    return _trial(*args)


def worker_count() -> int:
    cap = os.environ.get("NAESAT_THREADS")
    have = os.cpu_count() or 1
    if cap is None:
        return have
    try:
        return max(1, min(have, int(cap)))
    except ValueError:
        raise InvalidParametersError(f"NAESAT_THREADS must be an integer, got {cap!r}")


def estimate_alpha(
    config: ExperimentConfig,
    *,
    rule_factory=None,
    formula_factory=None,
) -> ResultRecord:
    """Success rate of `trials` independent runs at config.density.

    ``rule_factory``/``formula_factory`` are test hooks substituting the
    rule or the per-trial formula; providing either forces serial
    execution because hook closures do not cross process boundaries.
    """
    config.validate()
    if config.density is None:
        raise InvalidParametersError("estimate_alpha needs a density")
    density = config.density
    started = time.perf_counter()
    results: list[tuple[int, int, bool]] = []
    workers = worker_count()
    if rule_factory is None and formula_factory is None and workers > 1:
        args = [(config, density, i) for i in range(config.trials)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_star, args))
    else:
        for i in range(config.trials):
            if rule_factory is None and formula_factory is None:
                results.append(_trial(config, density, i))
                continue
            phi = (
                formula_factory(i, stream(config.seed, f"phi/{i}"))
                if formula_factory is not None
                else generate(config.n, config.k, density, stream(config.seed, f"phi/{i}"))
            )
            z = draw_ordering(config.n, stream(config.seed, f"z/{i}"))
            u = draw_seeds(config.n, stream(config.seed, f"u/{i}"))
            keys = stream(config.seed, f"spinit/{i}").integers(
                0, 1 << 31, size=config.n, dtype=np.int64
            )
            rule = rule_factory() if rule_factory is not None else rule_from_config(config)
            tr = run(phi, rule, z, u, init_keys=keys)
            ok = tr.violations == 0 and evaluate(phi, tr.assignment).sat
            results.append((i, tr.violations, bool(ok)))
    results.sort(key=lambda r: r[0])
    violations = np.array([v for _, v, _ in results], dtype=float)
    successes = sum(1 for _, _, ok in results if ok)
    lo, hi = wilson_interval(successes, config.trials)
    return ResultRecord(
        algorithm=config.algorithm,
        n=config.n,
        k=config.k,
        t=config.t,
        seed=config.seed,
        density=density,
        trials=config.trials,
        successes=successes,
        alpha=successes / config.trials,
        ci_low=lo,
        ci_high=hi,
        mean_violations=float(violations.mean()),
        max_violations=int(violations.max()),
        wall_clock=time.perf_counter() - started,
    )


def density_sweep(config: ExperimentConfig, **hooks) -> list[ResultRecord]:
    """One estimate_alpha per grid point, in grid order."""
    config.validate()
    grid = config.grid if config.grid else (
        (config.density,) if config.density is not None else ()
    )
    if not grid:
        raise InvalidParametersError("density_sweep needs a nonempty grid")
    return [
        estimate_alpha(replace(config, density=float(d), grid=()), **hooks) for d in grid
    ]


def isotonic_decreasing(values, weights=None) -> np.ndarray:
    """Best non-increasing fit under weighted least squares (pool adjacent
    violators)."""
    y = np.asarray(values, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    if y.shape != w.shape or y.ndim != 1:
        raise InvalidParametersError("values and weights must be equal-length vectors")
    if len(y) == 0:
        return y.copy()
    # fit non-decreasing on the negated series, then negate back
    blocks: list[list[float]] = []  # [weight, mean, count]
    for yi, wi in zip(-y, w):
        blocks.append([wi, yi, 1])
        while len(blocks) > 1 and blocks[-2][1] >= blocks[-1][1]:
            wb, mb, cb = blocks.pop()
            wa, ma, ca = blocks.pop()
            tot = wa + wb
            blocks.append([tot, (wa * ma + wb * mb) / tot, ca + cb])
    out = np.empty(len(y))
    pos = 0
    for wb, mb, cb in blocks:
        out[pos : pos + cb] = -mb
        pos += cb
    return out


def sweep_trend(records: Sequence[ResultRecord]) -> np.ndarray:
    """Non-increasing smoothing of the per-density success rates, weighted
    by trial counts.  Reported alongside sweeps, never asserted."""
    return isotonic_decreasing(
        [r.alpha for r in records], [float(r.trials) for r in records]
    )


_FIELDS = (
    "algorithm",
    "n",
    "k",
    "t",
    "seed",
    "density",
    "trials",
    "successes",
    "alpha",
    "ci_low",
    "ci_high",
    "mean_violations",
    "max_violations",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def record_to_dict(record: ResultRecord) -> dict:
    """Emission view of a record.  Wall-clock time is deliberately dropped
    so identical configs produce identical bytes."""
    return {name: getattr(record, name) for name in _FIELDS}


def write_records_csv(
    records: Sequence[ResultRecord], fh: IO[str], *, smooth: np.ndarray | None = None
) -> None:
    names = list(_FIELDS) + (["alpha_smooth"] if smooth is not None else [])
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(names)
    for idx, rec in enumerate(records):
        row = [_fmt(getattr(rec, name)) for name in _FIELDS]
        if smooth is not None:
            row.append(_fmt(float(smooth[idx])))
        writer.writerow(row)


def write_records_json(
    records: Sequence[ResultRecord], fh: IO[str], *, smooth: np.ndarray | None = None
) -> None:
    docs = [record_to_dict(rec) for rec in records]
    if smooth is not None:
        for idx, doc in enumerate(docs):
            doc["alpha_smooth"] = float(smooth[idx])
    json.dump(docs, fh, indent=1, sort_keys=True)
    fh.write("\n")
