"""Census, moment-bound, and interpolation checks.

The census oracle here is a deliberately naive double (or triple) loop
over python ints with bin().count popcounts, sharing no code with the
vectorized implementation.
"""

import io
import json
import math

import numpy as np
import pytest

from naesat import (
    CensusResult,
    Clause,
    Formula,
    InvalidParametersError,
    Literal,
    OverlapParams,
    TooLargeError,
    WindowUnreachableError,
    assignment_to_mask,
    blend,
    census,
    default_params,
    enumerate_satisfying,
    evaluate,
    first_moment_bound,
    generate,
    hamming,
    interpolate,
    is_satisfiable,
    mask_to_assignment,
    ordering_from_weights,
    pair_unsat_prob,
    random_reduced_formula,
    run,
    unit_clause_rule,
    write_tuple_report,
)
from naesat.decimation import draw_ordering


def brute_satisfying(f):
    out = []
    for mask in range(1 << f.n):
        sigma = [(mask >> i) & 1 for i in range(f.n)]
        if evaluate(f, sigma).sat:
            out.append(mask)
    return out


def window_count_pairs(masks, lo, hi):
    total = 0
    for a in masks:
        for b in masks:
            d = bin(a ^ b).count("1")
            if lo <= d <= hi:
                total += 1
    return total


def window_count_triples(masks, lo, hi):
    total = 0
    for a in masks:
        for b in masks:
            if not lo <= bin(a ^ b).count("1") <= hi:
                continue
            for c in masks:
                if lo <= bin(a ^ c).count("1") <= hi and lo <= bin(b ^ c).count("1") <= hi:
                    total += 1
    return total


def contradiction(n=4):
    cl = (
        Clause((Literal(1, True),), sign=-1, id=0),
        Clause((Literal(1, False),), sign=-1, id=1),
    )
    return Formula(n=n, k=3, clauses=cl)


class TestParams:
    def test_default_params_k16(self):
        p = default_params(16, 0.5)
        assert abs(p.beta - math.log(16) / 16) < 1e-15
        assert abs(p.beta - 0.17329) < 5e-6
        assert abs(p.eta - 0.030028) < 5e-6
        assert p.m == 2
        assert p.window_in_lower_half

    def test_validate_rejects_bad_windows(self):
        with pytest.raises(InvalidParametersError):
            OverlapParams(beta=0.3, eta=0.3, m=2).validate()
        with pytest.raises(InvalidParametersError):
            OverlapParams(beta=1.2, eta=0.1, m=2).validate()
        with pytest.raises(InvalidParametersError):
            OverlapParams(beta=0.3, eta=0.1, m=0).validate()

    def test_default_params_rejects_bad_inputs(self):
        with pytest.raises(InvalidParametersError):
            default_params(1, 0.5)
        with pytest.raises(InvalidParametersError):
            default_params(8, 1.5)

    def test_upper_half_window_flagged(self):
        assert not OverlapParams(beta=0.9, eta=0.2, m=2).window_in_lower_half


class TestEnumerate:
    def test_two_variable_mixed_clause(self):
        f = Formula(n=2, k=2, clauses=(Clause((Literal(1, True), Literal(2, False)), 0, id=0),))
        assert list(enumerate_satisfying(f)) == [0, 3]

    def test_matches_na_evaluate(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            n = int(rng.integers(4, 11))
            f = random_reduced_formula(rng, n=n, k=3, d=float(rng.uniform(0.5, 2.0)))
            assert list(enumerate_satisfying(f)) == brute_satisfying(f)

    def test_empty_formula_all_satisfy(self):
        f = Formula(n=3, k=3, clauses=())
        assert len(enumerate_satisfying(f)) == 8

    def test_guard(self):
        f = Formula(n=27, k=3, clauses=())
        with pytest.raises(TooLargeError):
            enumerate_satisfying(f)
        with pytest.raises(TooLargeError):
            is_satisfiable(f)

    def test_satisfiable_flag_agrees(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            f = generate(10, 3, float(rng.uniform(1.0, 3.0)), rng)
            assert is_satisfiable(f) == (len(enumerate_satisfying(f)) > 0)
        assert not is_satisfiable(contradiction())

    def test_mask_roundtrip(self):
        arr = mask_to_assignment(0b1011, 6)
        assert list(arr) == [1, 1, 0, 1, 0, 0]
        assert assignment_to_mask(arr) == 0b1011


class TestCensus:
    def test_pairs_match_bruteforce(self):
        rng = np.random.default_rng(11)
        p = OverlapParams(beta=0.4, eta=0.2, m=2)
        for _ in range(40):
            n = int(rng.integers(8, 13))
            f = random_reduced_formula(rng, n=n, k=3, d=float(rng.uniform(0.8, 2.0)))
            res = census(f, p)
            masks = brute_satisfying(f)
            lo, hi = (p.beta - p.eta) * n, p.beta * n
            assert res.count == window_count_pairs(masks, lo, hi)

    def test_triples_match_bruteforce(self):
        rng = np.random.default_rng(23)
        p = OverlapParams(beta=0.45, eta=0.25, m=3)
        for _ in range(8):
            n = int(rng.integers(7, 11))
            f = random_reduced_formula(rng, n=n, k=3, d=float(rng.uniform(1.0, 1.8)))
            res = census(f, p)
            masks = brute_satisfying(f)
            lo, hi = (p.beta - p.eta) * n, p.beta * n
            assert res.count == window_count_triples(masks, lo, hi)

    def test_single_assignment_census_counts_solutions(self):
        f = generate(9, 3, 1.2, 5)
        res = census(f, OverlapParams(beta=0.3, eta=0.1, m=1))
        assert res.count == len(brute_satisfying(f))
        if res.count:
            assert evaluate(f, res.witness[0]).sat

    def test_unsat_instance_reports_empty(self):
        res = census(contradiction(), OverlapParams(beta=0.4, eta=0.2, m=2))
        assert res == CensusResult(empty=True, count=0, witness=None)

    def test_witness_is_coherent(self):
        rng = np.random.default_rng(31)
        p = OverlapParams(beta=0.45, eta=0.25, m=2)
        seen = 0
        for _ in range(25):
            n = int(rng.integers(8, 12))
            f = random_reduced_formula(rng, n=n, k=3, d=float(rng.uniform(0.8, 1.5)))
            res = census(f, p)
            assert (res.witness is not None) == (res.count > 0)
            assert res.empty == (res.count == 0)
            if res.witness is None:
                continue
            seen += 1
            lo, hi = (p.beta - p.eta) * n, p.beta * n
            for a in res.witness:
                assert evaluate(f, a).sat
            for i in range(p.m):
                for j in range(i + 1, p.m):
                    assert lo <= hamming(res.witness[i], res.witness[j]) <= hi
        assert seen >= 5


class TestPairUnsat:
    def test_endpoints_reduce_to_single_assignment_rate(self):
        for k in (2, 3, 5):
            assert pair_unsat_prob(k, 0.0) == pytest.approx(2.0 ** (1 - k), abs=1e-15)
            assert pair_unsat_prob(k, 1.0) == pytest.approx(2.0 ** (1 - k), abs=1e-15)

    def test_k3_third(self):
        assert pair_unsat_prob(3, 1.0 / 3.0) == pytest.approx(1.0 / 12.0, abs=1e-15)

    def test_symmetry(self):
        for x in (0.1, 0.25, 0.4):
            assert pair_unsat_prob(4, x) == pytest.approx(pair_unsat_prob(4, 1 - x), abs=1e-15)

    def test_monte_carlo(self):
        # two assignments whose literal values disagree independently with
        # probability x; both violate a fresh width-K clause iff each sees
        # all-equal values
        rng = np.random.default_rng(97)
        k, x, trials = 3, 1.0 / 3.0, 1_000_000
        v1 = rng.random((trials, k)) < 0.5
        v2 = v1 ^ (rng.random((trials, k)) < x)
        mono1 = np.all(v1, axis=1) | ~np.any(v1, axis=1)
        mono2 = np.all(v2, axis=1) | ~np.any(v2, axis=1)
        hit = float(np.mean(mono1 & mono2))
        p = pair_unsat_prob(k, x)
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(hit - p) < 3.5 * se

    def test_validation(self):
        with pytest.raises(InvalidParametersError):
            pair_unsat_prob(1, 0.2)
        with pytest.raises(InvalidParametersError):
            pair_unsat_prob(3, 1.2)


class TestFirstMoment:
    def test_single_assignment_closed_form(self):
        p = OverlapParams(beta=0.375, eta=0.125, m=1)
        b = first_moment_bound(20, 3, 1.5, p)
        assert b.valid
        assert b.value == pytest.approx(20 * math.log(2) + 30 * math.log(0.75), abs=1e-12)

    def test_no_clauses_gives_log_count(self):
        p = OverlapParams(beta=0.375, eta=0.125, m=1)
        assert first_moment_bound(12, 3, 0.0, p).value == pytest.approx(
            12 * math.log(2), abs=1e-12
        )

    def test_distance_sum_exact_binary_window(self):
        # beta and eta are dyadic so the window endpoints are exact floats:
        # lo = 2.5, hi = 3.75 over n = 10 keeps only distance 3
        p = OverlapParams(beta=0.375, eta=0.125, m=2)
        b = first_moment_bound(10, 3, 1.0, p)
        assert b.distance_sum == math.comb(10, 3)

    def test_pair_value_assembles_pieces(self):
        p = OverlapParams(beta=0.375, eta=0.125, m=2)
        b = first_moment_bound(10, 3, 1.5, p)
        x0 = 0.25
        peak = x0**3 + 0.75**3
        per = 1.0 - 2 * 0.25 + 0.25 * peak
        assert b.per_clause == pytest.approx(per, abs=1e-15)
        want = 10 * math.log(2) + math.log(120) + 15 * math.log(per)
        assert b.value == pytest.approx(want, abs=1e-12)

    def test_invalid_when_pair_term_dominates(self):
        p = OverlapParams(beta=0.9, eta=0.8, m=10)
        b = first_moment_bound(30, 3, 1.0, p)
        assert not b.valid
        assert math.isnan(b.value)

    def test_empty_window_collapses_bound(self):
        # window narrower than one integer distance: lo = 5.625, hi = 6.0
        # over n = 16 keeps distance 6 only; shrink n so nothing fits
        p = OverlapParams(beta=0.375, eta=0.015625, m=2)
        b = first_moment_bound(4, 3, 1.0, p)
        if b.distance_sum == 0:
            assert b.value == -math.inf
        else:
            assert b.value > -math.inf

    def test_monte_carlo_soundness(self):
        p = OverlapParams(beta=0.375, eta=0.125, m=2)
        n, d, trials = 10, 1.5, 400
        bound = first_moment_bound(n, 3, d, p)
        assert bound.valid
        counts = np.empty(trials)
        for i in range(trials):
            counts[i] = census(generate(n, 3, d, 9000 + i), p).count
        ucl = counts.mean() + 2.576 * counts.std(ddof=1) / math.sqrt(trials)
        assert ucl <= math.exp(bound.value)

    def test_validation(self):
        p = OverlapParams(beta=0.3, eta=0.1, m=2)
        with pytest.raises(InvalidParametersError):
            first_moment_bound(0, 3, 1.0, p)
        with pytest.raises(InvalidParametersError):
            first_moment_bound(10, 1, 1.0, p)
        with pytest.raises(InvalidParametersError):
            first_moment_bound(10, 3, -0.5, p)


class TestBlend:
    def test_prefix_semantics(self):
        z = ordering_from_weights([0.9, 0.5, 0.1])
        a = np.array([0.0, 0.0, 0.0])
        b = np.array([1.0, 1.0, 1.0])
        assert list(blend(z, 0, a, b)) == [0.0, 0.0, 0.0]
        assert list(blend(z, 3, a, b)) == [1.0, 1.0, 1.0]
        assert list(blend(z, 1, a, b)) == [1.0, 0.0, 0.0]
        assert list(blend(z, 2, a, b)) == [1.0, 1.0, 0.0]

    def test_prefix_follows_decision_order_not_index(self):
        z = ordering_from_weights([0.1, 0.9, 0.5])
        a = np.zeros(3)
        b = np.ones(3)
        assert list(blend(z, 1, a, b)) == [0.0, 1.0, 0.0]

    def test_validation(self):
        z = ordering_from_weights([0.9, 0.5, 0.1])
        with pytest.raises(InvalidParametersError):
            blend(z, 1, np.zeros(3), np.ones(4))
        with pytest.raises(InvalidParametersError):
            blend(z, 4, np.zeros(3), np.ones(3))


class TestInterpolate:
    def setup_method(self):
        self.f = generate(60, 3, 1.0, 314)
        self.rule = unit_clause_rule()
        self.z = draw_ordering(60, np.random.default_rng(1))

    def test_single_run_tuple(self):
        p = OverlapParams(beta=0.4, eta=0.2, m=1)
        rng = np.random.default_rng(2)
        us = rng.random((1, 60))
        rep = interpolate(
            self.f, self.rule, self.z, p, replicates=4, rng=np.random.default_rng(3), us=us
        )
        assert rep.t0 == 0
        assert rep.distances.tolist() == [[0]]
        assert rep.window_respected
        direct = run(self.f, self.rule, self.z, us[0])
        assert np.array_equal(rep.assignments[0], direct.assignment)
        assert rep.all_satisfying == (
            direct.violations == 0 and evaluate(self.f, direct.assignment).sat
        )

    def test_identical_draws_collapse(self):
        p = OverlapParams(beta=0.4, eta=0.2, m=3)
        base = np.random.default_rng(8).random(60)
        us = np.tile(base, (3, 1))
        keys = np.zeros((3, 60), dtype=np.int64)
        rep = interpolate(
            self.f, self.rule, self.z, p, replicates=5, rng=np.random.default_rng(9),
            us=us, key_rows=keys,
        )
        assert rep.distances.max() == 0
        assert not rep.window_respected
        assert np.array_equal(rep.assignments[0], rep.assignments[1])
        assert np.array_equal(rep.assignments[0], rep.assignments[2])

    def test_emitted_runs_are_blends_of_the_masters(self):
        p = OverlapParams(beta=0.4, eta=0.2, m=3)
        rng = np.random.default_rng(12)
        us = rng.random((3, 60))
        rep = interpolate(
            self.f, self.rule, self.z, p, replicates=6, rng=np.random.default_rng(13), us=us
        )
        assert 1 <= rep.t0 <= 60
        assert np.array_equal(
            rep.assignments[0], run(self.f, self.rule, self.z, us[0]).assignment
        )
        for j in (1, 2):
            blended = blend(self.z, rep.t0, us[0], us[j])
            assert np.array_equal(
                rep.assignments[j], run(self.f, self.rule, self.z, blended).assignment
            )
        assert np.array_equal(rep.distances, rep.distances.T)
        assert rep.distances.diagonal().max() == 0
        for a in range(3):
            for b in range(3):
                assert rep.distances[a, b] == hamming(rep.assignments[a], rep.assignments[b])

    def test_estimates_are_reported(self):
        p = OverlapParams(beta=0.4, eta=0.2, m=2)
        rep = interpolate(
            self.f, self.rule, self.z, p, replicates=6, rng=np.random.default_rng(21)
        )
        assert 0.0 <= rep.estimate_mean <= 60.0
        assert rep.estimate_se >= 0.0
        assert rep.slack >= 60 ** (1.0 / 3.0) - 1e-12
        assert rep.estimate_mean >= (p.beta - p.eta / 2) * 60

    def test_unreachable_target_raises(self):
        p = OverlapParams(beta=0.9, eta=0.1, m=2)
        with pytest.raises(WindowUnreachableError):
            interpolate(
                self.f, self.rule, self.z, p, replicates=5, rng=np.random.default_rng(4)
            )

    def test_validation(self):
        p = OverlapParams(beta=0.4, eta=0.2, m=2)
        with pytest.raises(InvalidParametersError):
            interpolate(
                self.f, self.rule, self.z, p, replicates=1, rng=np.random.default_rng(5)
            )
        with pytest.raises(InvalidParametersError):
            interpolate(
                self.f, self.rule, self.z, p, replicates=4,
                rng=np.random.default_rng(5), us=np.zeros((3, 60)),
            )

    def test_report_serialization(self):
        p = OverlapParams(beta=0.4, eta=0.2, m=2)
        rep = interpolate(
            self.f, self.rule, self.z, p, replicates=5, rng=np.random.default_rng(33)
        )
        buf = io.StringIO()
        write_tuple_report(rep, buf)
        doc = json.loads(buf.getvalue())
        assert doc["params"] == {"beta": 0.4, "eta": 0.2, "m": 2}
        assert doc["t0"] == rep.t0
        assert len(doc["assignments"]) == 2
        assert all(len(s) == 60 and set(s) <= {"0", "1"} for s in doc["assignments"])
        assert doc["distances"][0][1] == int(rep.distances[0, 1])
        assert isinstance(doc["all_satisfying"], bool)
        assert "mean" in doc["estimate"]
