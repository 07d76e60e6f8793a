"""Survey-style message passing on factor-graph balls.

Messages live on the directed edges of a ball's factor graph.  Every
variable-to-clause edge carries a triple (S, U, *) and every
clause-to-variable edge a pair (S, U): S is the weight of "forced to
satisfy the clause", U of "forced to violate it", * of "not forced".
One round recomputes all messages synchronously from the previous
round's values, and the W fields then turn the clause-to-variable
messages into a per-variable verdict that drives the decimation rule.

The load-bearing symmetry: complementing the ball while swapping the S
and U roles of every raw draw reproduces, round for round, exactly the
S/U-swapped messages.  Products and sums below are ordered so that this
mirror holds bit for bit in floating point, not merely up to rounding,
which is what lets coupled runs flip decisions without exception.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO

import numpy as np

from .decimation import LocalRule
from .errors import InvalidParametersError
from .instance import MINUS, NEUTRAL, PLUS, Formula, Neighborhood

Edge = tuple[int, int]


@dataclass(frozen=True)
class SPInit:
    """Raw uniform draws for every edge, before any normalization.

    ``vc[(x, cid)]`` holds the (S, U, *) triple for the variable-to-clause
    edge and ``cv[(cid, x)]`` the (S, U) pair for the reverse direction.
    """

    vc: dict[Edge, tuple[float, float, float]]
    cv: dict[Edge, tuple[float, float]]


@dataclass(frozen=True)
class SPState:
    """Normalized messages after ``t`` rounds."""

    vc: dict[Edge, tuple[float, float, float]]
    cv: dict[Edge, tuple[float, float]]
    t: int


@dataclass(frozen=True)
class WFields:
    """Per-variable (W(1), W(0), W(*)) verdicts, each triple normalized."""

    values: dict[int, tuple[float, float, float]]

    def __getitem__(self, x: int) -> tuple[float, float, float]:
        return self.values[x]


def _instance_of(b) -> Formula:
    return b.instance if isinstance(b, Neighborhood) else b


def _occurrences(f: Formula) -> dict[int, list[tuple[int, bool]]]:
    occ: dict[int, list[tuple[int, bool]]] = {v: [] for v in range(1, f.n + 1)}
    for c in f.clauses:
        for lit in c.literals:
            occ[lit.var].append((c.id, lit.positive))
    return occ


def draw_sp_init(b, rng) -> SPInit:
    """Draw the five uniforms of every edge from ``rng``.

    Consumption order is part of the contract: clauses in stored order,
    literals in stored order, and per edge the triple (S, U, *) followed
    by the pair (S, U).
    """
    f = _instance_of(b)
    rng = np.random.default_rng(rng)
    vc: dict[Edge, tuple[float, float, float]] = {}
    cv: dict[Edge, tuple[float, float]] = {}
    for c in f.clauses:
        for lit in c.literals:
            d = rng.random(5)
            vc[(lit.var, c.id)] = (float(d[0]), float(d[1]), float(d[2]))
            cv[(c.id, lit.var)] = (float(d[3]), float(d[4]))
    return SPInit(vc=vc, cv=cv)


def swap_init(init: SPInit) -> SPInit:
    """Swap the S and U roles of every raw draw; star draws stay put."""
    vc = {e: (u, s, w) for e, (s, u, w) in init.vc.items()}
    cv = {e: (u, s) for e, (s, u) in init.cv.items()}
    return SPInit(vc=vc, cv=cv)


def sp_init(b, init: SPInit) -> SPState:
    """Normalize the raw draws into the round-0 message state.

    Triples divide by their sum (all-zero falls back to (0, 0, 1)), pairs
    likewise (all-zero to (1/2, 1/2)); both conventions are S/U-symmetric.
    """
    f = _instance_of(b)
    vc: dict[Edge, tuple[float, float, float]] = {}
    cv: dict[Edge, tuple[float, float]] = {}
    for c in f.clauses:
        for lit in c.literals:
            try:
                s, u, w = init.vc[(lit.var, c.id)]
                ps, pu = init.cv[(c.id, lit.var)]
            except KeyError as exc:
                raise InvalidParametersError(
                    f"init is missing draws for edge {exc.args[0]}"
                ) from None
            den = (s + u) + w
            vc[(lit.var, c.id)] = (s / den, u / den, w / den) if den > 0.0 else (0.0, 0.0, 1.0)
            pden = ps + pu
            cv[(c.id, lit.var)] = (ps / pden, pu / pden) if pden > 0.0 else (0.5, 0.5)
    return SPState(vc=vc, cv=cv, t=0)


def sp_iterate(state: SPState, b) -> SPState:
    """One synchronous round: every new message reads only round-t values.

    Clause-to-variable: a neutral clause forces x to satisfy it when all
    other members were forced to violate it (product of their U weights),
    and symmetrically for the U message; a plus-signed clause can only
    force violation, a minus-signed one only satisfaction.
    Variable-to-clause: the truncated two-product differences over the
    same-polarity and opposite-polarity clause sets, with the shared
    not-forced product subtracted, clamped at zero and renormalized.
    """
    f = _instance_of(b)
    occ = _occurrences(f)

    cv: dict[Edge, tuple[float, float]] = {}
    for c in f.clauses:
        for lit in c.literals:
            prod_u = 1.0
            prod_s = 1.0
            for other in c.literals:
                if other.var == lit.var:
                    continue
                qs, qu, _ = state.vc[(other.var, c.id)]
                prod_u *= qu
                prod_s *= qs
            if c.sign == NEUTRAL:
                msg = (prod_u, prod_s)
            elif c.sign == PLUS:
                msg = (0.0, prod_s)
            else:
                msg = (prod_u, 0.0)
            cv[(c.id, lit.var)] = msg

    vc: dict[Edge, tuple[float, float, float]] = {}
    for c in f.clauses:
        for lit in c.literals:
            same: list[int] = []
            opp: list[int] = []
            for d, pol in occ[lit.var]:
                if d == c.id:
                    continue
                (same if pol == lit.positive else opp).append(d)
            opp_s = opp_u = 1.0
            for d in opp:
                qs, qu = state.cv[(d, lit.var)]
                opp_s *= 1.0 - qs
                opp_u *= 1.0 - qu
            same_s = same_u = 1.0
            for d in same:
                qs, qu = state.cv[(d, lit.var)]
                same_s *= 1.0 - qs
                same_u *= 1.0 - qu
            star = 1.0
            for d, _pol in occ[lit.var]:
                if d == c.id:
                    continue
                qs, qu = state.cv[(d, lit.var)]
                star *= 1.0 - (qs + qu)
            r_s = opp_s * same_u - star
            r_u = opp_u * same_s - star
            if r_s < 0.0:
                r_s = 0.0
            if r_u < 0.0:
                r_u = 0.0
            r_star = star if star > 0.0 else 0.0
            den = (r_s + r_u) + r_star
            vc[(lit.var, c.id)] = (
                (r_s / den, r_u / den, r_star / den) if den > 0.0 else (0.0, 0.0, 1.0)
            )

    return SPState(vc=vc, cv=cv, t=state.t + 1)


def sp_fields(state: SPState, b) -> WFields:
    """Fold the clause-to-variable messages into per-variable W fields.

    W(1) is the clamped probability that x is forced to 1 and not also
    forced to 0, W(0) the mirror image, W(*) the product of not-forced
    weights over every clause containing x; an isolated variable gets
    (0, 0, 1) outright, as does an all-zero triple.
    """
    f = _instance_of(b)
    occ = _occurrences(f)
    values: dict[int, tuple[float, float, float]] = {}
    for x in range(1, f.n + 1):
        pos = [d for d, pol in occ[x] if pol]
        neg = [d for d, pol in occ[x] if not pol]
        neg_s = neg_u = 1.0
        for d in neg:
            qs, qu = state.cv[(d, x)]
            neg_s *= 1.0 - qs
            neg_u *= 1.0 - qu
        pos_s = pos_u = 1.0
        for d in pos:
            qs, qu = state.cv[(d, x)]
            pos_s *= 1.0 - qs
            pos_u *= 1.0 - qu
        star = 1.0
        for d, _pol in occ[x]:
            qs, qu = state.cv[(d, x)]
            star *= 1.0 - (qs + qu)
        w1 = neg_s * pos_u - star
        w0 = pos_s * neg_u - star
        if w1 < 0.0:
            w1 = 0.0
        if w0 < 0.0:
            w0 = 0.0
        wstar = star if star > 0.0 else 0.0
        den = (w1 + w0) + wstar
        values[x] = (w1 / den, w0 / den, wstar / den) if den > 0.0 else (0.0, 0.0, 1.0)
    return WFields(values=values)


def run_surveys(b, init: SPInit, rounds: int) -> WFields:
    """Initialize from raw draws, iterate ``rounds`` times, read the fields."""
    if rounds < 1:
        raise InvalidParametersError(f"rounds must be >= 1, got {rounds}")
    state = sp_init(b, init)
    for _ in range(rounds):
        state = sp_iterate(state, b)
    return sp_fields(state, b)


def decide(fields: WFields, x: int, coin: float) -> int:
    """1 when W(1) beats W(0), 0 when it loses; exact ties fall to the coin."""
    w1, w0, _ = fields[x]
    if w1 > w0:
        return 1
    if w1 < w0:
        return 0
    return 1 if coin <= 0.5 else 0


def sp_rule(t: int, mode: str = "sample", *, samples: int = 0, seed: int = 0) -> LocalRule:
    """Survey-guided decision rule of radius 2t.

    Sample mode draws one fresh set of raw messages per decision,
    deterministically keyed by (seed, stream block, root index in the
    parent formula), and returns the root's W-field comparison as the
    bit; the reported basis is the margin W(1) - W(0).  The rule's
    ``swap_coupled`` twin draws the same raws and swaps their roles, which
    is what complement-coupled runs use.  Estimate mode repeats the
    experiment ``samples`` times and returns the win rate with ties worth
    half, making the rule a plain probability rule.
    """
    if t < 1:
        raise InvalidParametersError(f"rounds must be >= 1, got {t}")
    radius = 2 * t

    def raw_for(nb: Neighborhood, key: int) -> SPInit:
        rng = np.random.default_rng(np.random.SeedSequence([seed, key, nb.root]))
        return draw_sp_init(nb, rng)

    if mode == "sample":

        def sample(nb: Neighborhood, u: float, key: int) -> tuple[int, float]:
            fields = run_surveys(nb, raw_for(nb, key), t)
            w1, w0, _ = fields[1]
            return decide(fields, 1, u), w1 - w0

        def twin_sample(nb: Neighborhood, u: float, key: int) -> tuple[int, float]:
            fields = run_surveys(nb, swap_init(raw_for(nb, key)), t)
            w1, w0, _ = fields[1]
            return decide(fields, 1, u), w1 - w0

        rule = LocalRule(name=f"sp{t}", radius=radius, sample=sample)
        twin = LocalRule(name=f"sp{t}-swapped", radius=radius, sample=twin_sample)
        rule.swap_coupled = twin
        twin.swap_coupled = rule
        return rule

    if mode == "estimate":
        if samples < 1:
            raise InvalidParametersError(
                f"estimate mode needs a positive sample count, got {samples}"
            )

        def tau(nb: Neighborhood) -> float:
            rng = np.random.default_rng(np.random.SeedSequence([seed, nb.root]))
            score = 0.0
            for _ in range(samples):
                fields = run_surveys(nb, draw_sp_init(nb, rng), t)
                w1, w0, _ = fields[1]
                if w1 > w0:
                    score += 1.0
                elif w1 == w0:
                    score += 0.5
            return score / samples

        return LocalRule(name=f"sp{t}x{samples}", radius=radius, tau=tau)

    raise InvalidParametersError(f"unknown mode {mode!r}")


def dump_trajectory(b, init: SPInit, rounds: int, fh: IO[str]) -> None:
    """Write the full message trajectory for (ball, init) as one JSON doc.

    Frames are keyed "x->C" and "C->x" with the parent formula's clause
    ids, one frame per round including round 0; meant for diffing two
    implementations on a fixed input.
    """
    state = sp_init(b, init)

    def snap(st: SPState) -> dict:
        return {
            "t": st.t,
            "variable_to_clause": {f"{x}->{c}": list(v) for (x, c), v in sorted(st.vc.items())},
            "clause_to_variable": {f"{c}->{x}": list(v) for (c, x), v in sorted(st.cv.items())},
        }

    frames = [snap(state)]
    for _ in range(rounds):
        state = sp_iterate(state, b)
        frames.append(snap(state))
    json.dump({"rounds": rounds, "frames": frames}, fh, indent=1)
    fh.write("\n")
