"""Sequential local decimation.

The engine orders the variables by strictly decreasing random weights and
decides them one at a time from the radius-r factor-graph ball of the
current reduced instance, then reduces.  Rules come in two flavors:

* probability rules expose ``tau(ball) -> [0, 1]`` and the engine sets the
  variable to 1 iff its per-variable seed satisfies ``u <= tau``;
* sampling rules expose ``sample(ball, u, key) -> (bit, basis)`` and draw
  whatever internal randomness they need themselves, deterministically in
  ``(ball, root, u, key)``.

Violated clauses are deleted and counted, never fatal.  Per-variable seeds
are plain float arrays in ``[0, 1]`` (entry ``i`` belongs to variable
``i + 1``), the same convention as assignments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, IO, Iterable

import numpy as np

from .errors import InvalidParametersError
from .instance import (
    MINUS,
    NEUTRAL,
    PLUS,
    Formula,
    Neighborhood,
    extract_ball,
    serialize,
)


@dataclass(frozen=True)
class OrderingZ:
    """Random decision order: weights plus the induced permutation.

    Ties are broken by preferring the larger variable index, so the order
    is always strict; ``position[i]`` is the 0-based decision slot of
    variable ``i + 1`` and ``order[s]`` the variable decided at slot ``s``.
    """

    weights: np.ndarray
    order: np.ndarray
    position: np.ndarray

    @property
    def n(self) -> int:
        return len(self.weights)

    def decides_before(self, x: int, y: int) -> bool:
        """True when variable ``x`` is decided strictly before ``y``."""
        return self.position[x - 1] < self.position[y - 1]


def ordering_from_weights(weights) -> OrderingZ:
    w = np.asarray(weights, dtype=float)
    n = len(w)
    idx = np.arange(n)
    order = np.lexsort((-idx, -w)) + 1  # descending weight, ties to larger index
    position = np.empty(n, dtype=np.int64)
    position[order - 1] = idx
    return OrderingZ(weights=w, order=order.astype(np.int64), position=position)


def draw_ordering(n: int, rng) -> OrderingZ:
    """Draw i.i.d. uniform weights and return the induced ordering."""
    if n < 1:
        raise InvalidParametersError(f"n must be positive, got {n}")
    rng = np.random.default_rng(rng)
    return ordering_from_weights(rng.random(n))


def draw_seeds(n: int, rng) -> np.ndarray:
    """Per-variable decision seeds, uniform in [0, 1]."""
    return np.random.default_rng(rng).random(n)


@dataclass
class LocalRule:
    """A local decision rule of fixed even radius.

    Exactly one of ``tau`` and ``sample`` is set.  ``swap_coupled`` points,
    for sampling rules built from symmetric raw draws, at the twin rule
    whose internal draws are swap-transformed; the pair is what coupling
    checks exercise.
    """

    name: str
    radius: int
    tau: Callable[[Neighborhood], float] | None = None
    sample: Callable[[Neighborhood, float, int], tuple[int, float]] | None = None
    swap_coupled: "LocalRule | None" = None


@dataclass
class StepRecord:
    variable: int
    basis: float  # tau for probability rules, the rule's reported margin otherwise
    bit: int
    satisfied: int
    violated: int
    signed: int
    neighborhood: str | None = None


@dataclass
class RunTrace:
    order: np.ndarray
    steps: list[StepRecord]
    assignment: np.ndarray
    violations: int


class _State:
    """Mutable working copy of a formula used for one run."""

    __slots__ = ("n", "k", "ids", "sign", "lits", "alive", "occ", "violations", "fixed")

    def __init__(self, formula: Formula):
        self.n = formula.n
        self.k = formula.k
        self.ids: list[int] = []
        self.sign: list[int] = []
        self.lits: list[dict[int, bool]] = []
        self.alive: list[bool] = []
        self.occ: list[set[int]] = [set() for _ in range(formula.n + 1)]
        self.violations = formula.violations
        self.fixed: dict[int, int] = {}
        for idx, c in enumerate(formula.clauses):
            self.ids.append(c.id)
            self.sign.append(c.sign)
            self.lits.append({lit.var: lit.positive for lit in c.literals})
            self.alive.append(True)
            for lit in c.literals:
                self.occ[lit.var].add(idx)

    def ball(self, x: int, r: int) -> Neighborhood:
        def occ_of(var, default=()):
            return self.occ[var] if self.occ[var] else default

        def clause_at(ci):
            return self.ids[ci], self.sign[ci], list(self.lits[ci].items())

        return extract_ball(x, r, self.k, occ_of, clause_at)

    def apply(self, x: int, v: int) -> tuple[int, int, int]:
        """Reduce in place; returns (satisfied, violated, newly signed) counts."""
        sat = vio = signed = 0
        for ci in list(self.occ[x]):
            pol = self.lits[ci].pop(x)
            val = v if pol else 1 - v
            s = self.sign[ci]
            if s == NEUTRAL:
                self.sign[ci] = PLUS if val == 1 else MINUS
                signed += 1
            elif (s == PLUS and val == 0) or (s == MINUS and val == 1):
                sat += 1
                self._kill(ci)
            elif not self.lits[ci]:
                vio += 1
                self.alive[ci] = False
        self.occ[x] = set()
        self.fixed[x] = v
        self.violations += vio
        return sat, vio, signed

    def _kill(self, ci: int) -> None:
        self.alive[ci] = False
        for y in self.lits[ci]:
            self.occ[y].discard(ci)
        self.lits[ci] = {}

    def to_formula(self) -> Formula:
        from .instance import Clause, Literal

        clauses = tuple(
            Clause(
                tuple(Literal(v, p) for v, p in self.lits[ci].items()),
                self.sign[ci],
                id=self.ids[ci],
            )
            for ci in range(len(self.ids))
            if self.alive[ci]
        )
        return Formula(
            n=self.n,
            k=self.k,
            clauses=clauses,
            fixed=frozenset(self.fixed),
            violations=self.violations,
        )


def run(
    formula: Formula,
    rule: LocalRule,
    z: OrderingZ,
    u,
    *,
    init_keys=None,
    capture_neighborhoods: bool = False,
) -> RunTrace:
    """Decimate every variable of ``formula`` under ``rule``.

    ``u`` holds one decision seed per variable.  ``init_keys`` (optional,
    for sampling rules) selects which internal stream block each variable's
    rule draws use; unset means block 0 everywhere.  The run never halts on
    a violation: violated clauses are deleted and counted.
    """
    n = formula.n
    u = np.asarray(u, dtype=float)
    if len(u) != n or z.n != n:
        raise InvalidParametersError("ordering/seed length does not match formula")
    if rule.radius < 0 or rule.radius % 2:
        raise InvalidParametersError(f"rule radius must be even, got {rule.radius}")
    if (rule.tau is None) == (rule.sample is None):
        raise InvalidParametersError("rule must define exactly one of tau/sample")
    keys = None
    if init_keys is not None:
        keys = np.asarray(init_keys, dtype=np.int64)
        if len(keys) != n:
            raise InvalidParametersError("init_keys length does not match formula")
    st = _State(formula)
    assignment = np.full(n, -1, dtype=np.int8)
    steps: list[StepRecord] = []
    for x in z.order:
        x = int(x)
        nb = st.ball(x, rule.radius)
        if rule.tau is not None:
            t = rule.tau(nb)
            bit = 1 if u[x - 1] <= t else 0
            basis = float(t)
        else:
            bit, basis = rule.sample(nb, float(u[x - 1]), 0 if keys is None else int(keys[x - 1]))
        sat, vio, sgn = st.apply(x, bit)
        assignment[x - 1] = bit
        steps.append(
            StepRecord(
                variable=x,
                basis=basis,
                bit=bit,
                satisfied=sat,
                violated=vio,
                signed=sgn,
                neighborhood=serialize(nb.instance) if capture_neighborhoods else None,
            )
        )
    return RunTrace(
        order=np.array(z.order, copy=True),
        steps=steps,
        assignment=assignment,
        violations=st.violations,
    )


def unit_clause_rule() -> LocalRule:
    """Radius-2 rule: follow signed unit clauses on the root.

    A minus unit clause forces its literal to 1, a plus unit forces it to
    0.  tau is 1 when only force-to-1 is present, 0 when only force-to-0,
    and 1/2 when there is no forcing or a conflict.
    """

    def tau(nb: Neighborhood) -> float:
        forced = 0  # bitmask: 1 -> forced to 0 seen, 2 -> forced to 1 seen
        for c in nb.instance.clauses:
            if c.sign == NEUTRAL or c.width != 1:
                continue
            lit = c.literals[0]
            if lit.var != 1:  # local root index
                continue
            want = 1 if c.sign == MINUS else 0
            bit = want if lit.positive else 1 - want
            forced |= 2 if bit else 1
        if forced == 2:
            return 1.0
        if forced == 1:
            return 0.0
        return 0.5

    return LocalRule(name="uc", radius=2, tau=tau)


def constant_rule(value: float, radius: int = 2) -> LocalRule:
    """tau identically ``value``; handy as a deliberately unbalanced rule."""
    return LocalRule(name=f"const{value}", radius=radius, tau=lambda nb: value)


@dataclass
class BalanceReport:
    ok: bool
    max_deviation: float
    checked: int
    tolerance: float
    witness: Neighborhood | None = None


def check_balance(
    rule: LocalRule,
    sampler: Callable[[np.random.Generator], Neighborhood],
    count: int,
    *,
    rng=None,
    tol: float = 1e-12,
    coupling_trials: int = 8,
) -> BalanceReport:
    """Estimate how far a rule is from the mirror identity.

    For probability rules the deviation on a ball B is
    ``|tau(complement(B)) - (1 - tau(B))|``.  For sampling rules the check
    runs the swap-coupled twin on the complemented ball with mirrored seed
    and scores 1 whenever the sampled decisions fail to flip.  The report
    names a worst witness when the tolerance is exceeded.
    """
    rng = np.random.default_rng(rng)
    worst = 0.0
    witness = None
    for _ in range(count):
        nb = sampler(rng)
        if rule.tau is not None:
            dev = abs(rule.tau(nb.complement()) - (1.0 - rule.tau(nb)))
        else:
            if rule.swap_coupled is None:
                raise InvalidParametersError(
                    "sampling rule has no swap-coupled twin to check against"
                )
            dev = 0.0
            mirror = nb.complement()
            for _ in range(coupling_trials):
                u = float(rng.random())
                b, _ = rule.sample(nb, u, 0)
                b2, _ = rule.swap_coupled.sample(mirror, 1.0 - u, 0)
                dev = max(dev, float(b2 != 1 - b))
        if dev > worst:
            worst = dev
            witness = nb
    ok = worst <= tol
    return BalanceReport(
        ok=ok,
        max_deviation=worst,
        checked=count,
        tolerance=tol,
        witness=None if ok else witness,
    )


def write_trace_jsonl(trace: RunTrace, fh: IO[str]) -> None:
    """One JSON object per decision step, in decision order.

    Keys: step, variable, basis, bit, satisfied, violated, signed, and
    neighborhood (serialized ball text) when the run captured them.
    """
    for i, s in enumerate(trace.steps):
        rec = {
            "step": i,
            "variable": s.variable,
            "basis": s.basis,
            "bit": s.bit,
            "satisfied": s.satisfied,
            "violated": s.violated,
            "signed": s.signed,
        }
        if s.neighborhood is not None:
            rec["neighborhood"] = s.neighborhood
        fh.write(json.dumps(rec) + "\n")


def read_trace_jsonl(fh: IO[str]) -> list[dict]:
    return [json.loads(line) for line in fh if line.strip()]
