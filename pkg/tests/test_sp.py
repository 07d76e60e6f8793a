import io
import json
import math

import numpy as np
import pytest

from naesat.decimation import check_balance, draw_ordering, draw_seeds, run
from naesat.errors import InvalidParametersError
from naesat.instance import (
    MINUS,
    NEUTRAL,
    PLUS,
    Clause,
    Formula,
    Literal,
    generate,
    neighborhood,
    random_neighborhood,
)
from naesat.sp import (
    SPInit,
    decide,
    draw_sp_init,
    dump_trajectory,
    run_surveys,
    sp_fields,
    sp_init,
    sp_iterate,
    sp_rule,
    swap_init,
)


def clause(sign, *lits, cid=0):
    return Clause(tuple(Literal(abs(v), v > 0) for v in lits), sign, id=cid)


def occurrences(f):
    occ = {v: [] for v in range(1, f.n + 1)}
    for c in f.clauses:
        for lit in c.literals:
            occ[lit.var].append((c.id, lit.positive))
    return occ


def oracle_round(f, state):
    """Straight-line recomputation of one round, written independently:
    generator-expression products and sequential 1 - s - u subtractions
    instead of the library's accumulator loops."""
    occ = occurrences(f)
    cv = {}
    for c in f.clauses:
        for lit in c.literals:
            us = math.prod(
                state.vc[(o.var, c.id)][1] for o in c.literals if o.var != lit.var
            )
            ss = math.prod(
                state.vc[(o.var, c.id)][0] for o in c.literals if o.var != lit.var
            )
            if c.sign == PLUS:
                cv[(c.id, lit.var)] = (0.0, ss)
            elif c.sign == MINUS:
                cv[(c.id, lit.var)] = (us, 0.0)
            else:
                cv[(c.id, lit.var)] = (us, ss)
    vc = {}
    for c in f.clauses:
        for lit in c.literals:
            others = [(d, p) for d, p in occ[lit.var] if d != c.id]
            not_forced = math.prod(
                1 - state.cv[(d, lit.var)][0] - state.cv[(d, lit.var)][1]
                for d, _ in others
            )
            rs = (
                math.prod(
                    1 - state.cv[(d, lit.var)][0] for d, p in others if p != lit.positive
                )
                * math.prod(
                    1 - state.cv[(d, lit.var)][1] for d, p in others if p == lit.positive
                )
                - not_forced
            )
            ru = (
                math.prod(
                    1 - state.cv[(d, lit.var)][1] for d, p in others if p != lit.positive
                )
                * math.prod(
                    1 - state.cv[(d, lit.var)][0] for d, p in others if p == lit.positive
                )
                - not_forced
            )
            rs, ru, rst = max(rs, 0.0), max(ru, 0.0), max(not_forced, 0.0)
            tot = rs + ru + rst
            vc[(lit.var, c.id)] = (rs / tot, ru / tot, rst / tot) if tot > 0 else (0.0, 0.0, 1.0)
    return vc, cv


def oracle_fields(f, cv):
    occ = occurrences(f)
    out = {}
    for x in range(1, f.n + 1):
        others = occ[x]
        not_forced = math.prod(1 - cv[(d, x)][0] - cv[(d, x)][1] for d, _ in others)
        w1 = (
            math.prod(1 - cv[(d, x)][0] for d, p in others if not p)
            * math.prod(1 - cv[(d, x)][1] for d, p in others if p)
            - not_forced
        )
        w0 = (
            math.prod(1 - cv[(d, x)][0] for d, p in others if p)
            * math.prod(1 - cv[(d, x)][1] for d, p in others if not p)
            - not_forced
        )
        w1, w0, ws = max(w1, 0.0), max(w0, 0.0), max(not_forced, 0.0)
        tot = w1 + w0 + ws
        out[x] = (w1 / tot, w0 / tot, ws / tot) if tot > 0 else (0.0, 0.0, 1.0)
    return out


def two_clause_ball():
    """Root in a minus unit and one neutral clause; covers every update kind."""
    f = Formula(
        n=3,
        k=3,
        clauses=(clause(MINUS, -1, cid=0), clause(NEUTRAL, 1, 2, -3, cid=1)),
    )
    return neighborhood(f, 1, 2)


def fixed_init():
    vc = {
        (1, 0): (0.2, 0.3, 0.5),
        (1, 1): (0.5, 0.25, 0.25),
        (2, 1): (0.1, 0.3, 0.6),
        (3, 1): (0.4, 0.4, 0.2),
    }
    cv = {
        (0, 1): (0.3, 0.1),
        (1, 1): (0.5, 0.5),
        (1, 2): (0.8, 0.2),
        (1, 3): (0.25, 0.75),
    }
    return SPInit(vc=vc, cv=cv)


class TestInit:
    def test_normalization_examples(self):
        nb = two_clause_ball()
        st = sp_init(nb, fixed_init())
        assert st.t == 0
        assert st.vc[(1, 0)] == (0.2 / 1.0, 0.3 / 1.0, 0.5 / 1.0)
        s, u = st.cv[(0, 1)]
        assert s == 0.3 / (0.3 + 0.1) and u == 0.1 / (0.3 + 0.1)
        assert abs(s - 0.75) < 1e-12 and abs(u - 0.25) < 1e-12
        for triple in st.vc.values():
            assert abs(sum(triple) - 1.0) < 1e-9
        for pair in st.cv.values():
            assert abs(sum(pair) - 1.0) < 1e-9

    def test_missing_edge_rejected(self):
        nb = two_clause_ball()
        init = fixed_init()
        broken = SPInit(vc={k: v for k, v in init.vc.items() if k != (2, 1)}, cv=init.cv)
        with pytest.raises(InvalidParametersError):
            sp_init(nb, broken)

    def test_draw_covers_all_edges_and_is_deterministic(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            nb = random_neighborhood(rng, n=30, k=3, d=2.0, radius=4)
            init = draw_sp_init(nb, np.random.default_rng(99))
            again = draw_sp_init(nb, np.random.default_rng(99))
            assert init == again
            st = sp_init(nb, init)  # would raise if an edge were missing
            assert st.t == 0
            assert all(0.0 <= x <= 1.0 for v in init.vc.values() for x in v)


class TestSwap:
    def test_involution_and_star_preserved(self):
        init = fixed_init()
        sw = swap_init(init)
        assert swap_init(sw) == init
        for e, (s, u, w) in init.vc.items():
            assert sw.vc[e] == (u, s, w)
        for e, (s, u) in init.cv.items():
            assert sw.cv[e] == (u, s)


class TestIterate:
    def test_hand_written_round(self):
        nb = two_clause_ball()
        st = sp_init(nb, fixed_init())
        st1 = sp_iterate(st, nb)
        assert st1.t == 1
        # minus unit: empty product forces the S side outright
        assert st1.cv[(0, 1)] == (1.0, 0.0)
        # neutral clause: plain products of the round-0 U and S components
        assert st1.cv[(1, 1)] == (0.3 * 0.4, 0.1 * 0.4)
        assert st1.cv[(1, 2)] == (0.25 * 0.4, 0.5 * 0.4)
        assert st1.cv[(1, 3)] == (0.25 * 0.3, 0.5 * 0.1)
        # root toward the unit: the only other clause holds the root with
        # opposite polarity; its round-0 pair sums to one exactly here, so
        # the star term dies and S/U split the mass
        assert st1.vc[(1, 0)] == (0.5, 0.5, 0.0)
        # root toward the neutral clause: same shape, but the normalized
        # pair misses one by an ulp, leaving a residual star weight
        ps = 0.3 / (0.3 + 0.1)
        pu = 0.1 / (0.3 + 0.1)
        star = 1.0 - (ps + pu)
        rs = (1.0 - ps) * 1.0 - star
        ru = (1.0 - pu) * 1.0 - star
        rst = star if star > 0.0 else 0.0
        den = (rs + ru) + rst
        assert st1.vc[(1, 1)] == (rs / den, ru / den, rst / den)
        # leaves sit in a single clause: nothing else forces them
        assert st1.vc[(2, 1)] == (0.0, 0.0, 1.0)
        assert st1.vc[(3, 1)] == (0.0, 0.0, 1.0)

    def test_hand_written_fields_and_decision(self):
        nb = two_clause_ball()
        fields = run_surveys(nb, fixed_init(), 1)
        w1, w0, ws = fields[1]
        # the unit clause pins the root to 0: its round-1 message is (1, 0),
        # so the not-forced product and the forced-to-1 side both vanish
        assert w1 == 0.0 and ws == 0.0 and w0 == 1.0
        assert decide(fields, 1, 0.9) == 0
        # leaves keep a positive star share
        for x in (2, 3):
            w1, w0, ws = fields[x]
            assert ws > 0.0 and abs((w1 + w0 + ws) - 1.0) < 1e-9

    def test_single_clause_variable_goes_star(self):
        f = Formula(n=4, k=3, clauses=(clause(NEUTRAL, 1, -2, 4, cid=0),))
        nb = neighborhood(f, 1, 2)
        st1 = sp_iterate(sp_init(nb, draw_sp_init(nb, np.random.default_rng(0))), nb)
        for x in (1, 2, 3):  # local ids; every member has no second clause
            assert st1.vc[(x, 0)] == (0.0, 0.0, 1.0)

    def test_matches_straight_line_oracle(self):
        rng = np.random.default_rng(31)
        for trial in range(60):
            nb = random_neighborhood(
                rng, n=40, k=3, d=2.5, radius=4, reduce_frac=0.4
            )
            f = nb.instance
            st = sp_init(nb, draw_sp_init(nb, rng))
            for _ in range(1 + trial % 3):
                ovc, ocv = oracle_round(f, st)
                st = sp_iterate(st, nb)
                for e, got in st.vc.items():
                    assert max(abs(a - b) for a, b in zip(got, ovc[e])) < 1e-12
                for e, got in st.cv.items():
                    assert max(abs(a - b) for a, b in zip(got, ocv[e])) < 1e-12
            want = oracle_fields(f, st.cv)
            have = sp_fields(st, nb)
            for x, triple in want.items():
                assert max(abs(a - b) for a, b in zip(have[x], triple)) < 1e-12

    def test_messages_stay_normalized(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            nb = random_neighborhood(rng, n=30, k=4, d=2.0, radius=4, reduce_frac=0.3)
            st = sp_init(nb, draw_sp_init(nb, rng))
            for _ in range(3):
                st = sp_iterate(st, nb)
                for s, u, w in st.vc.values():
                    assert -1e-15 <= s and -1e-15 <= u and -1e-15 <= w
                    assert abs((s + u + w) - 1.0) < 1e-9
                for s, u in st.cv.values():
                    assert 0.0 <= s <= 1.0 and 0.0 <= u <= 1.0


class TestMirror:
    def test_messages_mirror_bitwise(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            nb = random_neighborhood(rng, n=35, k=3, d=2.0, radius=4, reduce_frac=0.5)
            mirror = nb.complement()
            init = draw_sp_init(nb, rng)
            a = sp_init(nb, init)
            b = sp_init(mirror, swap_init(init))
            for _ in range(3):
                for e, (s, u, w) in a.vc.items():
                    assert b.vc[e] == (u, s, w)
                for e, (s, u) in a.cv.items():
                    assert b.cv[e] == (u, s)
                a = sp_iterate(a, nb)
                b = sp_iterate(b, mirror)
            fa = sp_fields(a, nb)
            fb = sp_fields(b, mirror)
            for x, (w1, w0, ws) in fa.values.items():
                assert fb[x] == (w0, w1, ws)

    def test_decisions_flip(self):
        rng = np.random.default_rng(13)
        flips = 0
        for _ in range(50):
            nb = random_neighborhood(rng, n=35, k=3, d=2.0, radius=2, reduce_frac=0.5)
            init = draw_sp_init(nb, rng)
            u = float(rng.random())
            a = decide(run_surveys(nb, init, 1), 1, u)
            b = decide(run_surveys(nb.complement(), swap_init(init), 1), 1, 1.0 - u)
            assert b == 1 - a
            flips += 1
        assert flips == 50

    def test_rule_balance_via_coupling(self):
        rng = np.random.default_rng(17)

        def sampler(r):
            return random_neighborhood(r, n=40, k=3, d=2.0, radius=2, reduce_frac=0.4)

        report = check_balance(sp_rule(1, seed=3), sampler, 40, rng=rng, coupling_trials=4)
        assert report.ok
        assert report.max_deviation == 0.0


class TestRule:
    def test_radius_and_validation(self):
        assert sp_rule(1).radius == 2
        assert sp_rule(3).radius == 6
        with pytest.raises(InvalidParametersError):
            sp_rule(0)
        with pytest.raises(InvalidParametersError):
            sp_rule(1, mode="estimate")
        with pytest.raises(InvalidParametersError):
            sp_rule(1, mode="anneal")

    def test_sample_mode_deterministic(self):
        rng = np.random.default_rng(23)
        rule = sp_rule(2, seed=41)
        nb = random_neighborhood(rng, n=40, k=3, d=2.0, radius=4, reduce_frac=0.3)
        first = rule.sample(nb, 0.37, 5)
        assert rule.sample(nb, 0.37, 5) == first

    def test_estimate_mode_near_half_on_fresh_ball(self):
        f = generate(n=40, k=3, d=1.8, seed=71)
        nb = neighborhood(f, 1, 2)
        s = 4000
        rule = sp_rule(1, mode="estimate", samples=s, seed=9)
        tau = rule.tau(nb)
        se = math.sqrt(0.25 / s)
        assert abs(tau - 0.5) <= 4 * se

    def test_estimate_mode_is_deterministic(self):
        rng = np.random.default_rng(29)
        nb = random_neighborhood(rng, n=30, k=3, d=2.0, radius=2, reduce_frac=0.4)
        rule = sp_rule(1, mode="estimate", samples=50, seed=12)
        assert rule.tau(nb) == rule.tau(nb)

    def test_full_run_flips_on_fresh_formula(self):
        # a fresh formula equals its own complement, so running the rule
        # and its swapped twin on mirrored seeds must invert every bit
        for seed in (101, 202):
            f = generate(n=24, k=3, d=1.5, seed=seed)
            z = draw_ordering(f.n, np.random.default_rng(seed + 1))
            u = draw_seeds(f.n, np.random.default_rng(seed + 2))
            rule = sp_rule(1, seed=7)
            a = run(f, rule, z, u)
            b = run(f, rule.swap_coupled, z, 1.0 - u)
            assert np.array_equal(b.assignment, 1 - a.assignment)
            assert b.violations == a.violations


class TestTrajectoryDump:
    def test_schema_and_frame_count(self):
        nb = two_clause_ball()
        buf = io.StringIO()
        dump_trajectory(nb, fixed_init(), 2, buf)
        doc = json.loads(buf.getvalue())
        assert doc["rounds"] == 2
        assert len(doc["frames"]) == 3
        f0 = doc["frames"][0]
        assert f0["t"] == 0
        assert set(f0["variable_to_clause"]) == {"1->0", "1->1", "2->1", "3->1"}
        assert set(f0["clause_to_variable"]) == {"0->1", "1->1", "1->2", "1->3"}
        for triple in f0["variable_to_clause"].values():
            assert abs(sum(triple) - 1.0) < 1e-9
