"""Exact root marginals of neighborhood balls, and the rule they drive.

The marginal of a rooted ball is the pair of exact counts of satisfying
assignments with the root set to 1 and to 0; the rule's tau is
``count1 / (count1 + count0)``.  Counting is exact integer arithmetic
throughout: factor-tree dynamic programming on acyclic balls, conditioning
on a small feedback vertex set otherwise (each conditioned branch reduces
to a forest).  Balls whose cutset would be too large raise ``TooLargeError``.

``bp_messages`` is the synchronous sum-product view of the same
computation: one round updates all variable-to-clause messages and then all
clause-to-variable messages, so ``r/2`` rounds exhaust a depth-``r`` ball,
and on acyclic balls the result matches the counting marginal to float
accuracy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .decimation import LocalRule
from .errors import InvalidParametersError, TooLargeError
from .instance import MINUS, NEUTRAL, PLUS, Formula, Neighborhood, reduce

_CUTSET_CAP = 14


@dataclass(frozen=True)
class Marginal:
    count1: int
    count0: int

    @property
    def mu(self) -> float:
        """count1 / count0, with infinity when only root=1 is satisfiable."""
        if self.count0 == 0:
            return float("inf") if self.count1 else float("nan")
        return self.count1 / self.count0

    @property
    def prob_one(self) -> float:
        """tau: probability of root 1, with the unsatisfiable-ball convention 1/2."""
        s = self.count1 + self.count0
        return self.count1 / s if s else 0.5


def _adjacency(f: Formula):
    var_cl: dict[int, list[int]] = {}
    cl_lits: list[list[tuple[int, bool]]] = []
    for idx, c in enumerate(f.clauses):
        cl_lits.append([(lit.var, lit.positive) for lit in c.literals])
        for lit in c.literals:
            var_cl.setdefault(lit.var, []).append(idx)
    return var_cl, cl_lits


def _is_acyclic(f: Formula) -> bool:
    # a bipartite graph is a forest iff every connected component has
    # edges = nodes - 1; equivalently no component closes a cycle
    var_cl, cl_lits = _adjacency(f)
    free = [v for v in range(1, f.n + 1) if v not in f.fixed]
    seen_v: set[int] = set()
    for start in free:
        if start in seen_v:
            continue
        comp_v, comp_c = _component(start, var_cl, cl_lits)
        seen_v |= comp_v
        edges = sum(len(cl_lits[ci]) for ci in comp_c)
        if edges != len(comp_v) + len(comp_c) - 1:
            return False
    return True


def _component(start: int, var_cl, cl_lits):
    comp_v = {start}
    comp_c: set[int] = set()
    stack = [start]
    while stack:
        v = stack.pop()
        for ci in var_cl.get(v, ()):
            if ci in comp_c:
                continue
            comp_c.add(ci)
            for w, _pol in cl_lits[ci]:
                if w not in comp_v:
                    comp_v.add(w)
                    stack.append(w)
    return comp_v, comp_c


def _forest_counts(f: Formula, root: int | None):
    """(count1, count0) for ``root`` or the plain total when ``root`` is None.

    The factor graph must be a forest; free variables count a factor 2.
    """
    var_cl, cl_lits = _adjacency(f)
    signs = [c.sign for c in f.clauses]

    def var_count(v: int, parent: int | None) -> tuple[int, int]:
        n1 = n0 = 1
        for ci in var_cl.get(v, ()):
            if ci == parent:
                continue
            m1, m0 = clause_count(ci, v)
            n1 *= m1
            n0 *= m0
        return n1, n0

    def clause_count(ci: int, parent: int) -> tuple[int, int]:
        total = all_t = all_f = 1
        parent_pol = None
        for w, pol in cl_lits[ci]:
            if w == parent:
                parent_pol = pol
                continue
            n1, n0 = var_count(w, ci)
            at = n1 if pol else n0
            af = n0 if pol else n1
            total *= at + af
            all_t *= at
            all_f *= af
        s = signs[ci]
        if s == NEUTRAL:
            m_true, m_false = total - all_t, total - all_f
        elif s == PLUS:
            m_true, m_false = total - all_t, total
        else:
            m_true, m_false = total, total - all_f
        return (m_true, m_false) if parent_pol else (m_false, m_true)

    free = [v for v in range(1, f.n + 1) if v not in f.fixed]
    seen: set[int] = set()
    other = 1
    root_pair: tuple[int, int] | None = None
    for start in free:
        if start in seen:
            continue
        comp_v, _comp_c = _component(start, var_cl, cl_lits)
        seen |= comp_v
        anchor = root if root in comp_v else start
        n1, n0 = var_count(anchor, None)
        if root in comp_v:
            root_pair = (n1, n0)
        else:
            other *= n1 + n0
    if root is None:
        return other
    if root_pair is None:
        raise InvalidParametersError(f"root {root} is not a free variable")
    return root_pair[0] * other, root_pair[1] * other


def _greedy_cutset(f: Formula) -> list[int]:
    """Variables whose removal makes the factor graph acyclic (greedy)."""
    var_cl: dict[int, set[int]] = {}
    cl_vars: dict[int, set[int]] = {}
    for idx, c in enumerate(f.clauses):
        cl_vars[idx] = set(c.variables)
        for v in c.variables:
            var_cl.setdefault(v, set()).add(idx)

    def peel():
        queue = deque()
        for v, cis in var_cl.items():
            if len(cis) <= 1:
                queue.append(("v", v))
        for ci, vs in cl_vars.items():
            if len(vs) <= 1:
                queue.append(("c", ci))
        while queue:
            kind, node = queue.popleft()
            if kind == "v":
                cis = var_cl.pop(node, None)
                if cis is None:
                    continue
                for ci in cis:
                    if ci in cl_vars:
                        cl_vars[ci].discard(node)
                        if len(cl_vars[ci]) <= 1:
                            queue.append(("c", ci))
            else:
                vs = cl_vars.pop(node, None)
                if vs is None:
                    continue
                for v in vs:
                    if v in var_cl:
                        var_cl[v].discard(node)
                        if len(var_cl[v]) <= 1:
                            queue.append(("v", v))

    cutset: list[int] = []
    peel()
    while cl_vars:
        v = max(var_cl, key=lambda x: len(var_cl[x]))
        cutset.append(v)
        for ci in var_cl.pop(v):
            if ci in cl_vars:
                cl_vars[ci].discard(v)
        peel()
        if len(cutset) > _CUTSET_CAP:
            raise TooLargeError(
                f"neighborhood needs a cutset larger than {_CUTSET_CAP} for exact counting"
            )
    return cutset


def _conditioned_counts(f: Formula, root: int | None, cutset: list[int]):
    c1 = c0 = 0
    total = 0
    root_pos = cutset.index(root) if root in cutset else -1
    for mask in range(1 << len(cutset)):
        g = f
        for j, v in enumerate(cutset):
            g = reduce(g, v, (mask >> j) & 1)
        if g.violations > f.violations:
            continue
        if root is None:
            total += _forest_counts(g, None)
        elif root_pos >= 0:
            branch = _forest_counts(g, None)
            if (mask >> root_pos) & 1:
                c1 += branch
            else:
                c0 += branch
        else:
            a1, a0 = _forest_counts(g, root)
            c1 += a1
            c0 += a0
    return total if root is None else (c1, c0)


def count_satisfying(f: Formula) -> int:
    """Exact number of satisfying assignments over the free variables."""
    if _is_acyclic(f):
        return _forest_counts(f, None)
    return _conditioned_counts(f, None, _greedy_cutset(f))


def count_root_split(f: Formula, root: int) -> tuple[int, int]:
    """Exact (count with root=1, count with root=0)."""
    if root in f.fixed or not 1 <= root <= f.n:
        raise InvalidParametersError(f"root {root} is fixed or out of range")
    if _is_acyclic(f):
        return _forest_counts(f, root)
    return _conditioned_counts(f, root, _greedy_cutset(f))


def exact_marginal(nb: Neighborhood) -> Marginal:
    """Counting marginal of the ball's root (local variable 1)."""
    c1, c0 = count_root_split(nb.instance, 1)
    return Marginal(count1=c1, count0=c0)


def bp_rule(r: int = 2) -> LocalRule:
    """Probability rule: tau equals the ball's exact counting marginal."""
    if r < 2 or r % 2:
        raise InvalidParametersError(f"radius must be even and at least 2, got {r}")

    def tau(nb: Neighborhood) -> float:
        return exact_marginal(nb).prob_one

    return LocalRule(name="bp", radius=r, tau=tau)


def bp_messages(nb: Neighborhood, rounds: int) -> float:
    """Synchronous sum-product estimate of the root marginal.

    Messages live in variable-value space and start uniform.  On a ball
    whose factor graph is a tree, ``rounds >= radius/2`` reproduces
    ``exact_marginal`` up to float rounding; on loopy balls the fixed-point
    value is an uncontrolled approximation, reported as-is.
    """
    f = nb.instance
    var_cl, cl_lits = _adjacency(f)
    signs = [c.sign for c in f.clauses]
    edges = [(ci, w) for ci, lits in enumerate(cl_lits) for w, _pol in lits]
    cv = {e: (0.5, 0.5) for e in edges}
    vc = {e: (0.5, 0.5) for e in edges}
    for _ in range(rounds):
        new_vc = {}
        for (ci, w) in edges:
            p1 = p0 = 1.0
            for di in var_cl[w]:
                if di == ci:
                    continue
                m1, m0 = cv[(di, w)]
                p1 *= m1
                p0 *= m0
            s = p1 + p0
            # a genuine (0, 0) means no consistent value and must propagate
            new_vc[(ci, w)] = (p1 / s, p0 / s) if s > 0 else (0.0, 0.0)
        vc = new_vc
        new_cv = {}
        for (ci, w) in edges:
            total = all_t = all_f = 1.0
            w_pol = None
            for y, pol in cl_lits[ci]:
                if y == w:
                    w_pol = pol
                    continue
                m1, m0 = vc[(ci, y)]
                at = m1 if pol else m0
                af = m0 if pol else m1
                total *= at + af
                all_t *= at
                all_f *= af
            s = signs[ci]
            if s == NEUTRAL:
                mt, mf = total - all_t, total - all_f
            elif s == PLUS:
                mt, mf = total - all_t, total
            else:
                mt, mf = total, total - all_f
            m1, m0 = (mt, mf) if w_pol else (mf, mt)
            z = m1 + m0
            new_cv[(ci, w)] = (m1 / z, m0 / z) if z > 0 else (0.0, 0.0)
        cv = new_cv
    p1 = p0 = 1.0
    for ci in var_cl.get(1, ()):
        m1, m0 = cv[(ci, 1)]
        p1 *= m1
        p0 *= m0
    s = p1 + p0
    return p1 / s if s > 0 else 0.5
