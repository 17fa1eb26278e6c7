import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vosperstab import (ArithmeticProgression, DensityFunction, GrowthFunction, PreconditionError, ResidueSet,
                        TorusHom, ap_cover, ap_fourier_coefficient, bohr_set, build_set_C, final_arl,
                        parameter_ledger, popular_doubling, popularity_transfer_check, sine_identity_check, sumset,
                        verify_theorem)
from vosperstab.generators import ap_plus_noise, random_set
from vosperstab.vosper import (VerifyConfig, autocorrelation_counts, extend_progression, sine_identity,
                               transfer_sweep)


def pair_counts(A):
    p = A.p
    c = np.zeros(p, dtype=np.int64)
    for a in A:
        for b in A:
            c[(a + b) % p] += 1
    return c


def shortest_cover_length(S):
    p = S.p
    best = p
    for q in range(1, p):
        for a in range(p):
            pos = [((s - a) * pow(q, -1, p)) % p for s in S]
            best = min(best, max(pos) + 1)
    return best


def test_residue_set_normalizes():
    S = ResidueSet(7, (9, 2, 2, -1))
    assert S.members == (2, 6) and S.density == 2 / 7
    assert (S | ResidueSet(7, (0,))).members == (0, 2, 6)
    assert (S - ResidueSet(7, (2,))).members == (6,)


def test_progression_validation():
    with pytest.raises(PreconditionError):
        ArithmeticProgression(7, 0, 7, 3)
    with pytest.raises(PreconditionError):
        ArithmeticProgression(7, 0, 1, 8)
    P = ArithmeticProgression(13, 11, 4, 3)
    assert P.elements() == [11, 2, 6]
    assert P.contains_set(ResidueSet(13, (2, 11)))
    assert not P.contains_set(ResidueSet(13, (10,)))


def test_popular_doubling_examples():
    assert popular_doubling(ResidueSet(5, (0, 1)), 3 / 5) == pytest.approx(4 / 25, abs=1e-15)
    for t in (0.1, 0.5, 1.0):
        assert popular_doubling(ResidueSet.full(11), t) == pytest.approx(t, abs=1e-15)
    A = ResidueSet(101, range(10))
    direct = np.mean(np.minimum(pair_counts(A) / 101, 1 / 101))
    assert popular_doubling(A, 1 / 101) == pytest.approx(direct, abs=1e-15)
    # 19 sums are attained, each at least once: the value is 19/101^2
    assert popular_doubling(A, 1 / 101) == pytest.approx(19 / 101**2, abs=1e-15)
    with pytest.raises(PreconditionError):
        popular_doubling(A, 0)


def test_bohr_examples():
    assert len(bohr_set(TorusHom(31, (4,)), 0.5)) == 31
    B = bohr_set(TorusHom(101, (1,)), 0.1)
    assert B.members == tuple(sorted([*range(11), *range(91, 101)]))
    assert len(B) == 21 and 21 / 101 >= 0.1
    with pytest.raises(PreconditionError):
        bohr_set(TorusHom(101, (1,)), 0.0)


def test_build_set_C_examples():
    A = ResidueSet(401, range(100, 160))
    f = A.indicator()
    zero = DensityFunction.constant(401, 0.0)
    B = bohr_set(TorusHom(401, (1,)), 0.05)
    sc = build_set_C(f, zero, B, 0.5, 0.1)
    assert sc.C == A and all(q.holds for q in sc.bounds)
    rng = np.random.default_rng(0)
    sml = DensityFunction(401, rng.normal(scale=0.3, size=401))
    assert len(build_set_C(f, sml, B, 0.5, 1.0).C_dprime) == 0
    with pytest.raises(PreconditionError):
        build_set_C(f, zero, ResidueSet(401, ()), 0.5, 0.1)


def test_build_set_C_on_random_decomposition():
    A = random_set(401, 0.15, seed=3).residue_set()
    dec = final_arl(A.indicator(), 0.25, GrowthFunction.affine(1, 15))
    B = bohr_set(dec.phi, 0.05) if dec.d else ResidueSet.full(401)
    sc = build_set_C(dec.f_str, dec.f_sml, B, 0.1, 0.25)
    assert all(q.holds for q in sc.bounds), [q for q in sc.bounds if not q.holds]
    assert len(sc.C_prime) >= np.sum(dec.f_str.values) - 0.1 * 401


def test_ap_cover_examples():
    P = ap_cover(ResidueSet(13, (0, 2, 4, 6)))
    assert (P.diff, P.length) == (2, 4)
    P = ap_cover(ResidueSet(13, (1, 5, 9)))
    assert (P.start, P.diff, P.length) == (1, 4, 3)
    assert ap_cover(ResidueSet(13, (7,))).length == 1
    assert ap_cover(ResidueSet.full(13)).length == 13
    with pytest.raises(PreconditionError):
        ap_cover(ResidueSet(13, ()))


def test_sumset_examples():
    assert sumset(ResidueSet(11, (0, 1, 4))).members == (0, 1, 2, 4, 5, 8)
    P = ArithmeticProgression(101, 3, 7, 20)
    assert sumset(P.as_set()) == ArithmeticProgression(101, 6, 7, 39).as_set()
    assert len(sumset(ResidueSet(11, ()))) == 0


def test_ap_coefficient_examples():
    c = ap_fourier_coefficient(ArithmeticProgression(31, 5, 3, 1))
    assert c.dft == pytest.approx(1 / 31, abs=1e-15)
    full = ArithmeticProgression(31, 0, 1, 31)
    assert np.abs(np.fft.fft(full.as_set().mask()))[1:].max() < 1e-12
    assert ap_fourier_coefficient(full).dft < 1e-15
    c = ap_fourier_coefficient(ArithmeticProgression(101, 0, 1, 50))
    den = 101 * math.sin(math.pi / 101)
    assert c.dft == pytest.approx(math.sin(50 * math.pi / 101) / den, abs=1e-15)
    assert c.formula == pytest.approx(math.sin(49 * math.pi / 101) / den, abs=1e-15)
    assert c.geometric == pytest.approx(c.dft, abs=1e-15)
    assert c.discrepancy > 1e-4


def test_ap_coefficient_frequency_for_general_difference():
    P = ArithmeticProgression(101, 17, 37, 23)
    c = ap_fourier_coefficient(P)
    assert (c.frequency * 37) % 101 == 1
    assert c.dft == pytest.approx(c.geometric, abs=1e-14)


def test_sine_identity_examples():
    s = sine_identity(20, 20, 20, 53)
    assert abs(s.lhs) < 1e-15 and abs(s.main_term) < 1e-15 and abs(s.correction) < 1e-15
    assert sine_identity_check(30, 35, 28, 101) <= 1e-13
    with pytest.raises(PreconditionError):
        sine_identity_check(10, 10, 11, 53)
    with pytest.raises(PreconditionError):
        sine_identity_check(40, 40, 0, 53)


def test_sine_identity_holds_over_the_reals():
    import sympy as sp
    a, P, i, x = sp.symbols("a P i x", real=True)
    u = a + P - i
    lhs = 2 * sp.sin((P - 1) * x) - sp.sin((i - 1) * x) - sp.sin((u - 1) * x)
    rhs = (4 * sp.sin((P - i) * x / 2) * sp.sin((a - i) * x / 2) * sp.sin((a + P - 2) * x / 2)
           + 2 * sp.sin((P - a) * x / 2) * sp.cos((a + P - 2) * x / 2))
    # rewrite in exponentials: the difference is identically zero
    assert sp.simplify((lhs - rhs).rewrite(sp.exp).expand()) == 0
    rng = np.random.default_rng(0)
    for va, vp, vi, vx in rng.uniform(-10, 10, size=(20, 4)):
        assert abs((lhs - rhs).evalf(50, subs={a: va, P: vp, i: vi, x: vx})) < 1e-40


def test_ledger_example():
    L = parameter_ledger(0.1, 0.2, 0.01, 0.001, 10)
    assert L.lam == pytest.approx(2.5e-7, rel=1e-12)
    assert L.eps == pytest.approx(1.52587890625e-29, rel=1e-12)
    assert L.eps == pytest.approx(L.lam**4 / 256, rel=1e-15)
    assert L.checks["lam^2/4 - 2 sqrt eps - eps = lam^2/8 - eps"]
    assert L.checks["lam^2/4 - 2 sqrt eps - eps > lam^2/16"]
    # the gap is lam^2/8 - eps, strictly below lam^2/8
    gap = L.lam**2 / 4 - 2 * math.sqrt(L.eps) - L.eps
    assert gap < L.lam**2 / 8
    d = L.to_dict()
    assert d["t0"].startswith("log2:") and float(d["t0"][5:]) == L.log2_t0


def test_ledger_rejects_delta_beyond_boundary():
    L = parameter_ledger(0.1, 0.2, 0.5, 0.1, 3)
    assert (1 + 1.5 * L.delta0) * 0.2 == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(PreconditionError):
        parameter_ledger(0.1, 0.2, 0.5, L.delta0, 3)
    with pytest.raises(PreconditionError):
        parameter_ledger(0.1, 0.2, 0.5, L.delta0 * 1.01, 3)
    parameter_ledger(0.1, 0.2, 0.5, L.delta0 * 0.99, 3)
    with pytest.raises(PreconditionError):
        parameter_ledger(0.3, 0.2, 0.5, 0.1, 3)


def test_extend_progression_prefers_members_of_A():
    A = ResidueSet(101, (10, 11, 12, 13, 9))
    P = extend_progression(ArithmeticProgression(101, 10, 1, 4), 5, A)
    assert (P.start, P.length) == (9, 5)
    A2 = ResidueSet(101, (10, 11, 12, 13, 14))
    P2 = extend_progression(ArithmeticProgression(101, 10, 1, 4), 5, A2)
    assert (P2.start, P2.length) == (10, 5)


def test_verify_exact_progression():
    A = ArithmeticProgression(1009, 0, 1, 50).as_set()
    rep = verify_theorem(A, 0.005, 0.5, 0.1)
    assert rep.status == "covered" and rep.A_minus_P == 0 and rep.P.as_set() == A
    assert rep.C_emp == 0


def test_verify_progression_plus_outlier():
    A = ap_plus_noise(1009, 50, 1, seed=1).residue_set()
    rep = verify_theorem(A, 0.01, 0.5, 0.1)
    assert rep.hypothesis_holds
    assert rep.status == "covered" and rep.A_minus_P == 1 and rep.P.length == 51
    assert rep.C_emp == pytest.approx(1 / (math.sqrt(0.5 * rep.alpha) * 1009))
    names = [q.name for q in rep.inequalities]
    assert any("sine bound" in n for n in names)
    for q in rep.inequalities:
        assert q.holds == (q.lhs <= q.rhs + 1e-12 * max(1, abs(q.rhs)) if q.sense == "le"
                           else q.lhs >= q.rhs - 1e-12 * max(1, abs(q.rhs)))


def test_verify_random_set_fails_hypothesis():
    A = random_set(1009, 0.2, seed=1).residue_set()
    rep = verify_theorem(A, 0.02, 0.5, 0.1)
    assert rep.status == "hypothesis-not-met" and not rep.hypothesis_holds
    assert rep.hypothesis_value > rep.hypothesis_threshold


def test_verify_rejects_density_outside_window():
    with pytest.raises(PreconditionError):
        verify_theorem(ResidueSet(101, range(50)), 0.02, 0.5, 0.1)
    vc = VerifyConfig(alpha_window=(0.1, 0.6))
    rep = verify_theorem(ResidueSet(101, range(50)), 0.02, 0.5, 0.1, vc)
    assert rep.status in ("covered", "hypothesis-not-met", "no-structure")


def test_transfer_examples():
    full = popularity_transfer_check(ResidueSet.full(101), 0.1, 0.3, 0.6)
    assert full.value_t == pytest.approx(0.3) and full.value_t2 == pytest.approx(0.6)
    assert not full.violated
    r = popularity_transfer_check(ResidueSet(101, range(20)), 0.1, 0.005, 0.02)
    assert r.premise and r.conclusion
    with pytest.raises(PreconditionError):
        popularity_transfer_check(ResidueSet.full(11), 0.1, 0.5, 0.2)


def test_transfer_sweep_records_only_genuine_violations():
    rng = np.random.default_rng(0)
    sets = []
    for i in range(500):
        p = 101
        if i % 2:
            sets.append(ResidueSet(p, tuple(rng.choice(p, size=int(rng.integers(3, 25)), replace=False))))
        else:
            sets.append(ArithmeticProgression(p, int(rng.integers(p)), int(rng.integers(1, p)),
                                              int(rng.integers(3, 25))).as_set())
    hits = transfer_sweep(sets, 0.5, [0.005, 0.01, 0.02, 0.05])
    for _, h in hits:
        assert h.premise and not h.conclusion


small_sets = st.sampled_from([7, 11, 13, 31, 53]).flatmap(
    lambda p: st.tuples(st.just(p), st.sets(st.integers(0, p - 1), min_size=1, max_size=p - 1)))


@settings(max_examples=60, deadline=None)
@given(small_sets)
def test_ap_cover_is_shortest_cover(data):
    p, S = data
    S = ResidueSet(p, tuple(S))
    P = ap_cover(S)
    assert P.contains_set(S)
    assert P.length == shortest_cover_length(S)


@settings(max_examples=100, deadline=None)
@given(small_sets)
def test_sumset_and_cauchy_davenport(data):
    p, S = data
    S = ResidueSet(p, tuple(S))
    SS = sumset(S)
    assert SS.members == tuple(sorted({(a + b) % p for a in S for b in S}))
    assert len(SS) >= min(2 * len(S) - 1, p)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([5, 31, 101, 211]).flatmap(
    lambda p: st.tuples(st.just(p), st.sets(st.integers(0, p - 1)), st.floats(0.001, 1))))
def test_popular_doubling_matches_pair_counting(data):
    p, S, t = data
    A = ResidueSet(p, tuple(S))
    assert np.array_equal(autocorrelation_counts(A), pair_counts(A))
    v = popular_doubling(A, t)
    assert v == pytest.approx(np.mean(np.minimum(pair_counts(A) / p, t)), abs=1e-15)
    assert v <= min(t, A.density**2) + 1e-15
    assert popular_doubling(A, min(1.0, 2 * t)) >= v


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([31, 101]), st.lists(st.integers(0, 100), min_size=1, max_size=2),
       st.floats(0.01, 0.5))
def test_bohr_membership_and_size_bound(p, freqs, radius):
    phi = TorusHom(p, tuple(freqs))
    B = bohr_set(phi, radius)
    for x in range(p):
        inside = all(min((r * x) % p, p - (r * x) % p) / p <= radius for r in phi.freqs)
        assert (x in B) == inside
    assert len(B) / p >= radius ** phi.d
