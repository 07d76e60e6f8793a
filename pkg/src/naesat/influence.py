"""Influence ranges over the variable-to-variable graph.

Two variables are adjacent when some clause contains both.  A variable x
influences y when a chain of variables leads from x to y in which every
link spans at most r hops of that graph and the decision weight strictly
drops, so y is decided after its predecessor.  The influence range of x
collects everything reachable that way; changing the decision seed of x
alone can only move decisions inside that range, which is what the
containment check exercises.

Ranges are always computed on the original formula's graph, fixed for
the whole run, not on the shrinking reduced instances.  Ordering along
chains uses the engine's tie-broken decision order rather than raw
weight comparison, so the closure stays exact even if two weights
collide.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .decimation import LocalRule, OrderingZ, run
from .errors import InvalidParametersError
from .instance import Formula


@dataclass(frozen=True)
class InfluenceSet:
    """The source variable together with everything it can influence."""

    source: int
    members: frozenset[int]

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))


def variable_graph(formula: Formula) -> list[set[int]]:
    """Adjacency sets, indexed 1..n; entry 0 is a placeholder."""
    adj: list[set[int]] = [set() for _ in range(formula.n + 1)]
    for c in formula.clauses:
        vs = [lit.var for lit in c.literals]
        for i, v in enumerate(vs):
            for w in vs[i + 1 :]:
                adj[v].add(w)
                adj[w].add(v)
    return adj


def _within_hops(adj: list[set[int]], start: int, r: int) -> set[int]:
    """Variables within r hops of start, start included."""
    seen = {start}
    frontier = [start]
    for _ in range(r):
        nxt: list[int] = []
        for v in frontier:
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return seen


def influence_range(formula: Formula, z: OrderingZ, r: int, x: int) -> InfluenceSet:
    """Worklist closure of the one-step influence relation from x."""
    if r < 1:
        raise InvalidParametersError(f"hop radius must be >= 1, got {r}")
    if not 1 <= x <= formula.n:
        raise InvalidParametersError(f"variable {x} outside 1..{formula.n}")
    adj = variable_graph(formula)
    members = {x}
    work = deque([x])
    while work:
        w = work.popleft()
        for y in _within_hops(adj, w, r):
            if y not in members and z.decides_before(w, y):
                members.add(y)
                work.append(y)
    return InfluenceSet(source=x, members=frozenset(members))


def max_influence_stats(formula: Formula, z: OrderingZ, r: int) -> tuple[int, Counter]:
    """Largest influence range size and the full size histogram."""
    best = 0
    hist: Counter = Counter()
    for x in range(1, formula.n + 1):
        size = len(influence_range(formula, z, r, x))
        hist[size] += 1
        if size > best:
            best = size
    return best, hist


def diff_set(
    formula: Formula,
    rule: LocalRule,
    z: OrderingZ,
    u,
    u_prime,
    *,
    init_keys=None,
) -> set[int]:
    """Variables whose decision changes between the two seed vectors.

    The vectors may differ in at most one coordinate; identical vectors
    yield the empty set.  Any internal rule randomness is keyed per
    variable, so both runs draw it identically and only the one decision
    threshold moves.
    """
    u = np.asarray(u, dtype=float)
    u_prime = np.asarray(u_prime, dtype=float)
    if u.shape != u_prime.shape or len(u) != formula.n:
        raise InvalidParametersError("seed vectors must both cover every variable")
    differing = np.flatnonzero(u != u_prime)
    if len(differing) > 1:
        raise InvalidParametersError(
            f"seed vectors differ in {len(differing)} coordinates, want at most 1"
        )
    a = run(formula, rule, z, u, init_keys=init_keys)
    b = run(formula, rule, z, u_prime, init_keys=init_keys)
    return {int(i) + 1 for i in np.flatnonzero(a.assignment != b.assignment)}


@dataclass(frozen=True)
class GrowthReport:
    """Sizes of hop-distance balls, one row per sampled root."""

    t_max: int
    roots: np.ndarray
    sizes: np.ndarray  # shape (len(roots), t_max + 1)

    @property
    def mean_sizes(self) -> np.ndarray:
        return self.sizes.mean(axis=0)

    @property
    def max_sizes(self) -> np.ndarray:
        return self.sizes.max(axis=0)


def ball_growth(formula: Formula, t_max: int, roots: Sequence[int]) -> GrowthReport:
    """Measure |B(x, t)| in the variable graph for t = 0..t_max."""
    if t_max < 0:
        raise InvalidParametersError(f"t_max must be >= 0, got {t_max}")
    adj = variable_graph(formula)
    roots_arr = np.asarray(list(roots), dtype=np.int64)
    sizes = np.ones((len(roots_arr), t_max + 1), dtype=np.int64)
    for row, x in enumerate(roots_arr):
        x = int(x)
        if not 1 <= x <= formula.n:
            raise InvalidParametersError(f"root {x} outside 1..{formula.n}")
        seen = {x}
        frontier = [x]
        for t in range(1, t_max + 1):
            nxt: list[int] = []
            for v in frontier:
                for w in adj[v]:
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
            sizes[row, t] = len(seen)
        # no need to continue past exhaustion; later columns repeat
    return GrowthReport(t_max=t_max, roots=roots_arr, sizes=sizes)


def write_histogram_csv(hist: Counter, fh: IO[str], header: tuple[str, str] = ("size", "count")) -> None:
    fh.write(f"{header[0]},{header[1]}\n")
    for key in sorted(hist):
        fh.write(f"{key},{hist[key]}\n")


def write_growth_csv(report: GrowthReport, fh: IO[str]) -> None:
    fh.write("t,mean_size,max_size\n")
    means = report.mean_sizes
    maxes = report.max_sizes
    for t in range(report.t_max + 1):
        fh.write(f"{t},{means[t]:.6f},{maxes[t]}\n")
