"""Reduced NAE-K-SAT instances.

A clause is a tuple of literals over pairwise-distinct variables together
with a sign.  Neutral clauses (sign ``0``, letter ``n``) have exactly K
literals and are satisfied when their literals are not all equal: at least
one true and at least one false.  Shortened clauses carry a sign recording
what they have already seen: a plus clause (``p``) contains a satisfied
literal and now needs some remaining literal to evaluate to 0, a minus
clause (``m``) contains a falsified literal and needs some literal to
evaluate to 1.  The sign is neutral exactly when the width equals K.

Variables are 1-based integers.  Assignments are numpy ``int8`` arrays of
length ``n`` with entries 0, 1, or -1 for unset; index ``i`` holds the value
of variable ``i + 1``.

The text format (one instance per file) is::

    c optional comments
    p naesat <n> <m> <K>
    n 1 -2 3 0
    p 4 -1 0
    m 2 0

One clause per line: a sign letter, then the literals as signed integers
(negative = negated variable), then a terminating 0.  Fresh instances are
exactly those whose clauses are all neutral.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import (
    CorruptInstanceError,
    FormulaParseError,
    InvalidParametersError,
)

NEUTRAL = 0
PLUS = 1
MINUS = -1

_SIGN_CHAR = {NEUTRAL: "n", PLUS: "p", MINUS: "m"}
_CHAR_SIGN = {c: s for s, c in _SIGN_CHAR.items()}


class Literal(NamedTuple):
    var: int
    positive: bool

    def value(self, bit: int) -> int:
        """Value of the literal when the variable holds ``bit``."""
        return bit if self.positive else 1 - bit

    def __str__(self) -> str:
        return str(self.var if self.positive else -self.var)


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]
    sign: int = NEUTRAL
    id: int = field(default=0, compare=False)

    @property
    def width(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)


@dataclass(frozen=True)
class Formula:
    """An (optionally reduced) instance over variables ``1..n``.

    ``fixed`` records which variables have been removed by reductions and
    ``violations`` counts clauses that were deleted as violated along the
    way; both are bookkeeping and do not take part in equality.
    """

    n: int
    k: int
    clauses: tuple[Clause, ...] = ()
    fixed: frozenset[int] = field(default_factory=frozenset, compare=False)
    violations: int = field(default=0, compare=False)

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def origin(self) -> str:
        """``"fresh"`` when every clause is neutral, else ``"reduced"``."""
        return "fresh" if all(c.sign == NEUTRAL for c in self.clauses) else "reduced"

    def validate(self) -> None:
        """Check structural invariants, raising ``CorruptInstanceError``."""
        if self.k < 2:
            raise CorruptInstanceError(f"K must be at least 2, got {self.k}")
        if self.n < 1:
            raise CorruptInstanceError(f"n must be positive, got {self.n}")
        for c in self.clauses:
            check_clause(c, self.n, self.k)


def check_clause(clause: Clause, n: int, k: int) -> None:
    """Validate one clause against the width law and variable range."""
    w = clause.width
    if w < 1 or w > k:
        raise CorruptInstanceError(f"clause {clause.id}: width {w} outside 1..{k}")
    if (clause.sign == NEUTRAL) != (w == k):
        raise CorruptInstanceError(
            f"clause {clause.id}: sign {clause.sign!r} inconsistent with width {w} (K={k})"
        )
    if clause.sign not in _SIGN_CHAR:
        raise CorruptInstanceError(f"clause {clause.id}: unknown sign {clause.sign!r}")
    seen = set()
    for lit in clause.literals:
        if not 1 <= lit.var <= n:
            raise CorruptInstanceError(
                f"clause {clause.id}: variable {lit.var} outside 1..{n}"
            )
        if lit.var in seen:
            raise CorruptInstanceError(f"clause {clause.id}: repeated variable {lit.var}")
        seen.add(lit.var)


def generate(n: int, k: int, d: float, seed) -> Formula:
    """Draw a fresh random instance with ``floor(d * n)`` neutral clauses.

    Draw order, for reproducibility against an external replay of the same
    uniform stream: for each clause in turn, candidate variables are drawn
    by rejection as ``min(floor(u * n), n - 1) + 1`` until K distinct ones
    are collected, then one uniform per accepted variable (in draw order)
    negates the literal iff ``u < 1/2``.

    ``seed`` is anything ``numpy.random.default_rng`` accepts, including an
    existing ``Generator``.
    """
    if k < 2:
        raise InvalidParametersError(f"K must be at least 2, got {k}")
    if n < k:
        raise InvalidParametersError(f"need n >= K, got n={n}, K={k}")
    if d < 0:
        raise InvalidParametersError(f"density must be nonnegative, got {d}")
    rng = np.random.default_rng(seed)
    m = int(np.floor(d * n + 1e-9))
    clauses = []
    for j in range(m):
        chosen: list[int] = []
        while len(chosen) < k:
            u = rng.random()
            cand = min(int(u * n), n - 1) + 1
            if cand not in chosen:
                chosen.append(cand)
        lits = tuple(Literal(v, rng.random() >= 0.5) for v in chosen)
        clauses.append(Clause(lits, NEUTRAL, id=j))
    return Formula(n=n, k=k, clauses=tuple(clauses))


def evaluate_clause(clause: Clause, sigma: np.ndarray) -> str:
    """Status of one clause under a possibly partial assignment.

    Returns ``"satisfied"``, ``"violated"``, or ``"undetermined"``.  A
    clause is violated only when no completion of the unset variables can
    satisfy it.
    """
    n = len(sigma)
    trues = falses = unset = 0
    for lit in clause.literals:
        if not 1 <= lit.var <= n:
            raise CorruptInstanceError(
                f"clause {clause.id}: variable {lit.var} outside assignment of length {n}"
            )
        v = int(sigma[lit.var - 1])
        if v < 0:
            unset += 1
        elif lit.value(v) == 1:
            trues += 1
        else:
            falses += 1
    if clause.sign == NEUTRAL:
        if trues and falses:
            return "satisfied"
        return "undetermined" if unset else "violated"
    if clause.sign == PLUS:
        if falses:
            return "satisfied"
        return "undetermined" if unset else "violated"
    if trues:
        return "satisfied"
    return "undetermined" if unset else "violated"


class EvalResult(NamedTuple):
    sat: bool
    violated: tuple[int, ...]


def evaluate(formula: Formula, sigma: np.ndarray) -> EvalResult:
    """Evaluate a total assignment; returns satisfaction and violated clause ids."""
    sigma = np.asarray(sigma)
    if len(sigma) != formula.n:
        raise InvalidParametersError(
            f"assignment length {len(sigma)} does not match n={formula.n}"
        )
    if np.any(sigma < 0):
        raise InvalidParametersError("assignment must be total (no unset entries)")
    bad = tuple(
        c.id for c in formula.clauses if evaluate_clause(c, sigma) == "violated"
    )
    return EvalResult(sat=not bad, violated=bad)


def complement(formula: Formula) -> Formula:
    """Swap plus and minus signs on every clause; neutral clauses are kept."""
    clauses = tuple(
        Clause(c.literals, -c.sign if c.sign else NEUTRAL, id=c.id)
        for c in formula.clauses
    )
    return Formula(
        n=formula.n,
        k=formula.k,
        clauses=clauses,
        fixed=formula.fixed,
        violations=formula.violations,
    )


def reduce(formula: Formula, x: int, v: int) -> Formula:
    """Set variable ``x`` to ``v`` and simplify.

    Every clause containing ``x`` loses that literal.  A neutral clause
    gains sign plus when the removed literal evaluated to 1 and minus when
    it evaluated to 0.  A signed clause whose requirement the literal meets
    is satisfied and deleted; one that loses its last literal unsatisfyingly
    is violated, deleted, and counted in ``violations``.
    """
    if not 1 <= x <= formula.n:
        raise InvalidParametersError(f"variable {x} outside 1..{formula.n}")
    if x in formula.fixed:
        raise InvalidParametersError(f"variable {x} was already reduced")
    if v not in (0, 1):
        raise InvalidParametersError(f"value must be 0 or 1, got {v}")
    out = []
    vio = 0
    for c in formula.clauses:
        pol = None
        for lit in c.literals:
            if lit.var == x:
                pol = lit.positive
                break
        if pol is None:
            out.append(c)
            continue
        val = v if pol else 1 - v
        rest = tuple(lit for lit in c.literals if lit.var != x)
        if c.sign == NEUTRAL:
            out.append(Clause(rest, PLUS if val == 1 else MINUS, id=c.id))
        elif (c.sign == PLUS and val == 0) or (c.sign == MINUS and val == 1):
            continue  # satisfied, drop
        elif rest:
            out.append(Clause(rest, c.sign, id=c.id))
        else:
            vio += 1
    return Formula(
        n=formula.n,
        k=formula.k,
        clauses=tuple(out),
        fixed=formula.fixed | {x},
        violations=formula.violations + vio,
    )


@dataclass(frozen=True)
class Neighborhood:
    """The depth-``radius`` factor-graph ball around one root variable.

    ``instance`` is the ball relabeled to local variables ``1..n`` with the
    root as local variable 1; ``varmap[i]`` is the parent index of local
    variable ``i + 1``.  Clause ids are inherited from the parent formula.
    """

    root: int
    radius: int
    instance: Formula
    varmap: tuple[int, ...]

    def complement(self) -> "Neighborhood":
        return Neighborhood(self.root, self.radius, complement(self.instance), self.varmap)


def neighborhood(formula: Formula, x: int, r: int) -> Neighborhood:
    """Extract B(x, r).  The radius must be even so clauses arrive whole."""
    if not 1 <= x <= formula.n:
        raise InvalidParametersError(f"variable {x} outside 1..{formula.n}")
    occ: dict[int, list[int]] = defaultdict(list)
    for idx, c in enumerate(formula.clauses):
        for lit in c.literals:
            occ[lit.var].append(idx)

    def clause_at(idx: int):
        c = formula.clauses[idx]
        return c.id, c.sign, [(lit.var, lit.positive) for lit in c.literals]

    return extract_ball(x, r, formula.k, occ.get, clause_at)


def extract_ball(
    x: int,
    r: int,
    k: int,
    occ_of: Callable[[int, tuple], Iterable[int]],
    clause_at: Callable[[int], tuple],
) -> Neighborhood:
    """Shared BFS ball extraction over an adjacency view.

    ``occ_of(var, default)`` yields indices of live clauses containing the
    variable; ``clause_at(idx)`` returns ``(id, sign, [(var, positive)..])``.
    Local variables are the root first, then ascending parent index; clauses
    are ordered by ascending id.
    """
    if r < 0 or r % 2:
        raise InvalidParametersError(f"radius must be even and nonnegative, got {r}")
    seen_v = {x}
    seen_c: set[int] = set()
    frontier = [x]
    for _ in range(r // 2):
        nxt: list[int] = []
        for v in frontier:
            for ci in occ_of(v, ()):
                if ci in seen_c:
                    continue
                seen_c.add(ci)
                for var, _pol in clause_at(ci)[2]:
                    if var not in seen_v:
                        seen_v.add(var)
                        nxt.append(var)
        frontier = nxt
        if not frontier:
            break
    varmap = (x, *sorted(seen_v - {x}))
    local = {pv: i + 1 for i, pv in enumerate(varmap)}
    picked = sorted((clause_at(ci) for ci in seen_c), key=lambda t: t[0])
    clauses = tuple(
        Clause(tuple(Literal(local[var], pol) for var, pol in lits), sign, id=cid)
        for cid, sign, lits in picked
    )
    inst = Formula(n=len(varmap), k=k, clauses=clauses)
    return Neighborhood(root=x, radius=r, instance=inst, varmap=varmap)


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    """Hamming distance between two total assignments of equal length."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidParametersError("assignments have different lengths")
    if np.any(a < 0) or np.any(b < 0):
        raise InvalidParametersError("assignments must be total")
    return int(np.count_nonzero(a != b))


def serialize(formula: Formula) -> str:
    """Render the instance in the text format (see module docstring)."""
    lines = [f"p naesat {formula.n} {formula.m} {formula.k}"]
    for c in formula.clauses:
        lits = " ".join(str(lit) for lit in c.literals)
        lines.append(f"{_SIGN_CHAR[c.sign]} {lits} 0")
    return "\n".join(lines) + "\n"


def parse(text: str) -> Formula:
    """Parse the text format back into a ``Formula``.

    Clause ids are assigned positionally.  Malformed lines raise
    ``FormulaParseError`` carrying the 1-based line number.
    """
    n = k = m = None
    clauses: list[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "p" or len(parts) != 5 or parts[1] != "naesat":
                raise FormulaParseError("expected header 'p naesat <n> <m> <K>'", lineno)
            try:
                n, m, k = int(parts[2]), int(parts[3]), int(parts[4])
            except ValueError:
                raise FormulaParseError("non-integer header fields", lineno) from None
            if n < 1 or m < 0 or k < 2:
                raise FormulaParseError(f"bad header values n={n} m={m} K={k}", lineno)
            continue
        sign = _CHAR_SIGN.get(parts[0])
        if sign is None:
            raise FormulaParseError(f"unknown clause sign {parts[0]!r}", lineno)
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise FormulaParseError("non-integer literal", lineno) from None
        if not nums or nums[-1] != 0:
            raise FormulaParseError("clause line must end with 0", lineno)
        if 0 in nums[:-1]:
            raise FormulaParseError("literal 0 inside clause body", lineno)
        lits = tuple(Literal(abs(t), t > 0) for t in nums[:-1])
        clause = Clause(lits, sign, id=len(clauses))
        try:
            check_clause(clause, n, k)
        except CorruptInstanceError as exc:
            raise FormulaParseError(str(exc), lineno) from None
        clauses.append(clause)
    if n is None:
        raise FormulaParseError("missing header")
    if len(clauses) != m:
        raise FormulaParseError(f"header declares {m} clauses, found {len(clauses)}")
    return Formula(n=n, k=k, clauses=tuple(clauses))


def save_formula(formula: Formula, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize(formula))


def load_formula(path) -> Formula:
    with open(path) as fh:
        return parse(fh.read())


def random_reduced_formula(
    rng: np.random.Generator,
    n: int = 40,
    k: int = 3,
    d: float = 2.0,
    reduce_frac: float = 0.4,
) -> Formula:
    """A random instance after decimating a random fraction of its variables."""
    f = generate(n, k, d, rng)
    todo = rng.permutation(n)[: int(reduce_frac * n)]
    for x in todo:
        f = reduce(f, int(x) + 1, int(rng.integers(2)))
    return f


def random_neighborhood(
    rng: np.random.Generator,
    n: int = 40,
    k: int = 3,
    d: float = 2.0,
    radius: int = 2,
    reduce_frac: float = 0.4,
) -> Neighborhood:
    """A radius-``radius`` ball around a random unset variable of a random
    partially decimated instance."""
    f = random_reduced_formula(rng, n, k, d, reduce_frac)
    free = [x for x in range(1, n + 1) if x not in f.fixed]
    root = free[int(rng.integers(len(free)))]
    return neighborhood(f, root, radius)
