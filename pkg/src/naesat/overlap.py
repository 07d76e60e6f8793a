"""Solution-space geometry: censuses, moment bounds, coupled runs.

Three instruments share this module.  The census enumerates every
satisfying assignment of a small instance and searches for m-tuples
whose pairwise Hamming distances sit inside a prescribed window.  The
first-moment bound gives a closed-form natural-log ceiling on the
expected number of such tuples over the random formula ensemble.  The
interpolation experiment produces m actual decimation runs whose seed
vectors agree on a calibrated prefix of the decision order, so their
pairwise distances land near a target inside the window.

Assignments are enumerated as integer bitmasks (bit i-1 holds variable
i) and compared with vectorized popcounts, which keeps the n <= 26
guard honest rather than aspirational.

Window convention: a distance d is inside the window when
(beta - eta) * n <= d <= beta * n, evaluated in ordinary float
arithmetic.  The binomial sum in the moment bound uses the integer
range [ceil(lo), floor(hi)] of the same float endpoints, so the two
never disagree about a boundary distance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .decimation import LocalRule, OrderingZ, run
from .errors import InvalidParametersError, TooLargeError, WindowUnreachableError
from .instance import MINUS, NEUTRAL, Formula, evaluate, hamming

_ENUM_GUARD = 26
_CHUNK = 1 << 16


@dataclass(frozen=True)
class OverlapParams:
    """Distance window [(beta-eta)n, beta*n] and tuple size m."""

    beta: float
    eta: float
    m: int

    def validate(self) -> None:
        if not 0.0 < self.eta < self.beta < 1.0:
            raise InvalidParametersError(
                f"need 0 < eta < beta < 1, got beta={self.beta}, eta={self.eta}"
            )
        if self.m < 1:
            raise InvalidParametersError(f"tuple size must be >= 1, got {self.m}")

    @property
    def window_in_lower_half(self) -> bool:
        """Whether [beta-eta, beta] sits inside [0, 1/2], as the coupled-run
        construction wants."""
        return 0.0 <= self.beta - self.eta and self.beta <= 0.5


def default_params(k: int, eps: float) -> OverlapParams:
    """beta = ln K / K, eta = beta^2, m = ceil(eps^2 K / ln K)."""
    if k < 2:
        raise InvalidParametersError(f"K must be >= 2, got {k}")
    if not 0.0 < eps < 1.0:
        raise InvalidParametersError(f"eps must be in (0, 1), got {eps}")
    beta = math.log(k) / k
    p = OverlapParams(beta=beta, eta=beta * beta, m=math.ceil(eps * eps * k / math.log(k)))
    p.validate()
    return p


def _clause_masks(formula: Formula) -> list[tuple[int, int, int, int]]:
    """(positive mask, negative mask, width, sign) per clause."""
    out = []
    for c in formula.clauses:
        pos = neg = 0
        for lit in c.literals:
            if lit.positive:
                pos |= 1 << (lit.var - 1)
            else:
                neg |= 1 << (lit.var - 1)
        out.append((pos, neg, c.width, c.sign))
    return out


def _satisfying_in(formula, block: np.ndarray) -> np.ndarray:
    ok = np.ones(len(block), dtype=bool)
    for pos, neg, width, sign in _clause_masks(formula):
        trues = np.bitwise_count(block & np.uint64(pos)) + np.bitwise_count(
            ~block & np.uint64(neg)
        )
        if sign == NEUTRAL:
            ok &= (trues > 0) & (trues < width)
        elif sign == MINUS:
            ok &= trues > 0
        else:
            ok &= trues < width
        if not ok.any():
            break
    return block[ok]


def enumerate_satisfying(formula: Formula) -> np.ndarray:
    """All satisfying assignments as uint64 bitmasks, ascending."""
    if formula.n > _ENUM_GUARD:
        raise TooLargeError(
            f"exhaustive enumeration capped at n={_ENUM_GUARD}, got n={formula.n}"
        )
    total = 1 << formula.n
    found = []
    for start in range(0, total, _CHUNK):
        block = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        hits = _satisfying_in(formula, block)
        if len(hits):
            found.append(hits)
    return np.concatenate(found) if found else np.empty(0, dtype=np.uint64)


def is_satisfiable(formula: Formula) -> bool:
    """Exhaustive check with an early exit on the first satisfying block."""
    if formula.n > _ENUM_GUARD:
        raise TooLargeError(
            f"exhaustive enumeration capped at n={_ENUM_GUARD}, got n={formula.n}"
        )
    total = 1 << formula.n
    for start in range(0, total, _CHUNK):
        block = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        if len(_satisfying_in(formula, block)):
            return True
    return False


def mask_to_assignment(mask: int, n: int) -> np.ndarray:
    bits = (int(mask) >> np.arange(n)) & 1
    return bits.astype(np.int8)


def assignment_to_mask(sigma) -> int:
    sigma = np.asarray(sigma)
    return int(sum(1 << i for i in range(len(sigma)) if sigma[i]))


@dataclass(frozen=True)
class CensusResult:
    """Outcome of the exhaustive tuple search.

    ``count`` is the number of ordered m-tuples of satisfying assignments
    (repeats allowed when distance zero lies inside the window) whose
    pairwise distances all fall in the window; ``witness`` holds one such
    tuple as assignment arrays when any exists.
    """

    empty: bool
    count: int
    witness: tuple[np.ndarray, ...] | None


def census(formula: Formula, p: OverlapParams) -> CensusResult:
    p.validate()
    n = formula.n
    sats = enumerate_satisfying(formula)
    if len(sats) == 0:
        return CensusResult(empty=True, count=0, witness=None)
    if p.m == 1:
        return CensusResult(
            empty=False, count=len(sats), witness=(mask_to_assignment(sats[0], n),)
        )
    lo = (p.beta - p.eta) * n
    hi = p.beta * n

    total = 0
    witness_masks: list[int] | None = None

    def grow(cand: np.ndarray, chosen: list[int]) -> None:
        nonlocal total, witness_masks
        if len(chosen) == p.m - 1:
            total += len(cand)
            if witness_masks is None and len(cand):
                witness_masks = chosen + [int(cand[0])]
            return
        for a in cand:
            d = np.bitwise_count(cand ^ a)
            nxt = cand[(d >= lo) & (d <= hi)]
            if len(nxt):
                grow(nxt, chosen + [int(a)])

    grow(sats, [])
    if witness_masks is None:
        return CensusResult(empty=True, count=0, witness=None)
    return CensusResult(
        empty=False,
        count=total,
        witness=tuple(mask_to_assignment(w, n) for w in witness_masks),
    )


def pair_unsat_prob(k: int, x: float) -> float:
    """Chance a random clause is violated by both of two assignments that
    disagree on an independent fraction x of literal positions."""
    if k < 2:
        raise InvalidParametersError(f"K must be >= 2, got {k}")
    if not 0.0 <= x <= 1.0:
        raise InvalidParametersError(f"fraction must lie in [0, 1], got {x}")
    return 2.0 ** (1 - k) * (x**k + (1.0 - x) ** k)


@dataclass(frozen=True)
class FirstMomentBound:
    """ln upper bound on the expected ordered-tuple count, with its pieces."""

    value: float
    valid: bool
    per_clause: float
    distance_sum: int

    def __float__(self) -> float:
        return self.value


def first_moment_bound(n: int, k: int, d: float, p: OverlapParams) -> FirstMomentBound:
    """Counting bound: free first assignment, distance-window choices for
    the rest, and a truncated inclusion-exclusion factor per clause.

    The per-clause factor must land in (0, 1] for the truncation to give
    a usable bound; otherwise ``valid`` is False and the value is NaN.
    """
    p.validate()
    if n < 1 or k < 2 or d < 0:
        raise InvalidParametersError(f"bad ensemble parameters n={n}, K={k}, d={d}")
    clauses = int(math.floor(d * n + 1e-9))
    lo = (p.beta - p.eta) * n
    hi = p.beta * n
    r_lo = max(math.ceil(lo), 0)
    r_hi = min(math.floor(hi), n)
    dist_sum = sum(math.comb(n, r) for r in range(r_lo, r_hi + 1)) if r_hi >= r_lo else 0

    # x^K + (1-x)^K decreases on [0, 1/2]; the left endpoint is the max
    # there, but probe the window numerically in case the caller strayed
    x0 = p.beta - p.eta
    peak = max(
        x**k + (1.0 - x) ** k for x in np.linspace(x0, p.beta, 17)
    )
    peak = max(peak, x0**k + (1.0 - x0) ** k)
    base = 2.0 ** (1 - k)
    per_clause = 1.0 - p.m * base + (p.m * (p.m - 1) / 2.0) * base * peak
    valid = 0.0 < per_clause <= 1.0

    if not valid:
        value = math.nan
    elif p.m >= 2 and dist_sum == 0:
        value = -math.inf
    else:
        value = n * math.log(2.0) + clauses * math.log(per_clause)
        if p.m >= 2:
            value += (p.m - 1) * math.log(dist_sum)
    return FirstMomentBound(
        value=value, valid=valid, per_clause=per_clause, distance_sum=dist_sum
    )


def blend(z: OrderingZ, t: int, first: np.ndarray, rest: np.ndarray) -> np.ndarray:
    """Coordinates of the first t decided variables from ``rest``, the
    remainder from ``first``."""
    a = np.asarray(first)
    b = np.asarray(rest)
    if a.shape != b.shape or len(a) != z.n:
        raise InvalidParametersError("vectors must both cover every variable")
    if not 0 <= t <= z.n:
        raise InvalidParametersError(f"prefix length {t} outside 0..{z.n}")
    return np.where(z.position < t, b, a)


@dataclass(frozen=True)
class TupleReport:
    """m coupled runs with their distance matrix and health flags."""

    params: OverlapParams
    t0: int
    assignments: np.ndarray  # shape (m, n), int8
    distances: np.ndarray  # shape (m, m), int64
    all_satisfying: bool
    window_respected: bool
    estimate_mean: float
    estimate_se: float
    slack: float


def interpolate(
    formula: Formula,
    rule: LocalRule,
    z: OrderingZ,
    p: OverlapParams,
    *,
    replicates: int,
    rng,
    coarse: int = 16,
    us=None,
    key_rows=None,
) -> TupleReport:
    """Calibrate a seed-prefix length t0, then emit m coupled runs.

    Runs j >= 1 use seed vectors whose first t0 coordinates, in decision
    order, come from an independent draw and the rest from run 0's draw.
    t0 is the smallest prefix whose estimated mean distance to run 0,
    over ``replicates`` fresh seed pairs shared across all candidate
    prefixes, reaches (beta - eta/2) * n; overshooting that target by
    more than max(n^(1/3), 2 SE) or never reaching it raises
    WindowUnreachableError.  ``us``/``key_rows`` inject the m master
    draws instead of drawing them from ``rng`` (shape (m, n)).
    """
    p.validate()
    n = formula.n
    rng = np.random.default_rng(rng)
    if us is None:
        us = rng.random((p.m, n))
    else:
        us = np.asarray(us, dtype=float)
        if us.shape != (p.m, n):
            raise InvalidParametersError(f"us must have shape {(p.m, n)}, got {us.shape}")
    if key_rows is None:
        key_rows = rng.integers(0, 1 << 31, size=(p.m, n), dtype=np.int64)
    else:
        key_rows = np.asarray(key_rows, dtype=np.int64)
        if key_rows.shape != (p.m, n):
            raise InvalidParametersError(
                f"key_rows must have shape {(p.m, n)}, got {key_rows.shape}"
            )

    def one_run(u_vec, k_vec):
        return run(formula, rule, z, u_vec, init_keys=k_vec)

    if p.m == 1:
        tr = one_run(us[0], key_rows[0])
        ok = tr.violations == 0 and evaluate(formula, tr.assignment).sat
        return TupleReport(
            params=p,
            t0=0,
            assignments=tr.assignment.reshape(1, n),
            distances=np.zeros((1, 1), dtype=np.int64),
            all_satisfying=bool(ok),
            window_respected=True,
            estimate_mean=0.0,
            estimate_se=0.0,
            slack=float(n ** (1.0 / 3.0)),
        )

    if replicates < 2:
        raise InvalidParametersError(f"need at least 2 replicates, got {replicates}")
    ru0 = rng.random((replicates, n))
    rk0 = rng.integers(0, 1 << 31, size=(replicates, n), dtype=np.int64)
    ru1 = rng.random((replicates, n))
    rk1 = rng.integers(0, 1 << 31, size=(replicates, n), dtype=np.int64)
    bases = [one_run(ru0[r], rk0[r]).assignment for r in range(replicates)]

    cache: dict[int, tuple[float, float]] = {}

    def estimate(t: int) -> tuple[float, float]:
        if t not in cache:
            dists = np.array(
                [
                    hamming(
                        bases[r],
                        one_run(
                            blend(z, t, ru0[r], ru1[r]), blend(z, t, rk0[r], rk1[r])
                        ).assignment,
                    )
                    for r in range(replicates)
                ],
                dtype=float,
            )
            cache[t] = (float(dists.mean()), float(dists.std(ddof=1) / math.sqrt(replicates)))
        return cache[t]

    target = (p.beta - p.eta / 2.0) * n
    step = max(1, math.ceil(n / coarse))
    grid = list(range(0, n + 1, step))
    if grid[-1] != n:
        grid.append(n)
    hit = None
    prev = 0
    for t in grid:
        mean, _ = estimate(t)
        if mean >= target:
            hit = t
            break
        prev = t
    if hit is None:
        raise WindowUnreachableError(
            f"mean distance never reached {target:.2f} (last estimate "
            f"{estimate(n)[0]:.2f} at t={n})"
        )
    t0 = hit
    for t in range(prev + 1, hit):
        mean, _ = estimate(t)
        if mean >= target:
            t0 = t
            break
    mean0, se0 = estimate(t0)
    slack = max(n ** (1.0 / 3.0), 2.0 * se0)
    if mean0 > target + slack:
        raise WindowUnreachableError(
            f"prefix {t0} overshoots the target: estimate {mean0:.2f} vs "
            f"{target:.2f} + slack {slack:.2f}"
        )

    traces = [one_run(us[0], key_rows[0])]
    for j in range(1, p.m):
        traces.append(one_run(blend(z, t0, us[0], us[j]), blend(z, t0, key_rows[0], key_rows[j])))
    assignments = np.stack([tr.assignment for tr in traces])
    distances = np.zeros((p.m, p.m), dtype=np.int64)
    for a in range(p.m):
        for b in range(a + 1, p.m):
            distances[a, b] = distances[b, a] = hamming(assignments[a], assignments[b])
    all_sat = all(
        tr.violations == 0 and evaluate(formula, tr.assignment).sat for tr in traces
    )
    lo = (p.beta - p.eta) * n
    hi = p.beta * n
    off = distances[~np.eye(p.m, dtype=bool)]
    window_ok = bool(np.all((off >= lo) & (off <= hi)))
    return TupleReport(
        params=p,
        t0=t0,
        assignments=assignments,
        distances=distances,
        all_satisfying=bool(all_sat),
        window_respected=window_ok,
        estimate_mean=mean0,
        estimate_se=se0,
        slack=float(slack),
    )


def write_tuple_report(report: TupleReport, fh: IO[str]) -> None:
    doc = {
        "params": {
            "beta": report.params.beta,
            "eta": report.params.eta,
            "m": report.params.m,
        },
        "t0": report.t0,
        "assignments": ["".join(str(int(b)) for b in row) for row in report.assignments],
        "distances": report.distances.tolist(),
        "all_satisfying": report.all_satisfying,
        "window_respected": report.window_respected,
        "estimate": {
            "mean": report.estimate_mean,
            "se": report.estimate_se,
            "slack": report.slack,
        },
    }
    json.dump(doc, fh, indent=1)
    fh.write("\n")
