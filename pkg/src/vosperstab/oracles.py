"""Brute-force oracle suites, runnable from the command line.

Each suite returns a list of checks comparing a library routine with a
deliberately naive recomputation.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np

from .checks import Check
from .fourier import DensityFunction, convolve, dft, inner, u2_norm
from .lattice import bounded_bezout, complete_matrix, find_relation, gcd_all, reduce_dimension, reference_relation_scan
from .partition import CellPartition, coefficient_bound_check, conditional_expectation, uniformize
from .torus import (TorusHom, TrigPolynomial, fejer_box_mass, fejer_concentration_bound, fejer_eval, fejer_kernel,
                    fejer_lipschitz_formula, fejer_lipschitz_sum, midpoint_grid, torus_dist)
from .vosper import (ArithmeticProgression, ResidueSet, ap_cover, ap_fourier_coefficient, bohr_set, popular_doubling,
                     sine_identity_check, sumset)


def _rand_fn(rng, p, complex_=True):
    v = rng.standard_normal(p)
    if complex_:
        v = v + 1j * rng.standard_normal(p)
    return DensityFunction(p, v)


def fourier_suite(seed: int = 0, trials: int = 50) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = {"parseval": 0.0, "convolution": 0.0, "u2": -np.inf, "fast_vs_direct": 0.0}
    for p in (101, 211):
        for _ in range(trials):
            f, g = _rand_fn(rng, p), _rand_fn(rng, p)
            F, G = dft(f), dft(g)
            worst["parseval"] = max(worst["parseval"], abs(F.energy() - float(np.mean(np.abs(f.values) ** 2))))
            # naive convolution E_y f(y) g(x-y)
            x = np.arange(p)
            naive = np.array([np.mean(f.values * g.values[(k - x) % p]) for k in range(p)])
            worst["convolution"] = max(worst["convolution"], float(np.max(np.abs(convolve(f, g).values - naive))))
            cf = dft(convolve(f, g)).coeffs
            worst["convolution"] = max(worst["convolution"], float(np.max(np.abs(cf - F.coeffs * G.coeffs))))
            lhs = float(np.sqrt(np.mean(np.abs(convolve(f, g).values) ** 2)))
            worst["u2"] = max(worst["u2"], lhs - u2_norm(f) * u2_norm(g))
            worst["fast_vs_direct"] = max(worst["fast_vs_direct"],
                                          float(np.max(np.abs(F.coeffs - dft(f, method="direct").coeffs))))
    return [
        Check("Parseval", worst["parseval"] <= 1e-10, f"max error {worst['parseval']:.2e}"),
        Check("convolution theorem", worst["convolution"] <= 1e-10, f"max error {worst['convolution']:.2e}"),
        Check("||g*h||_2 <= ||g||_U2 ||h||_U2", worst["u2"] <= 1e-10, f"max excess {worst['u2']:.2e}"),
        Check("FFT agrees with direct sum", worst["fast_vs_direct"] <= 1e-9,
              f"max error {worst['fast_vs_direct']:.2e}"),
    ]


def partition_suite(seed: int = 0, trials: int = 30) -> list[Check]:
    rng = np.random.default_rng(seed)
    p = 101
    worst_cond, worst_bound = 0.0, -np.inf
    for _ in range(trials):
        d = int(rng.integers(1, 4))
        gamma = tuple(int(r) for r in rng.integers(1, p, size=d))
        n = int(rng.integers(2, 30))
        f = DensityFunction(p, rng.random(p))
        B = CellPartition(p, gamma, n)
        E = conditional_expectation(f, B).values
        cells = {}
        for xx in range(p):
            cells.setdefault(tuple(n * ((r * xx) % p) // p for r in gamma), []).append(xx)
        naive = np.empty(p)
        for xs in cells.values():
            naive[xs] = f.values[xs].mean()
        worst_cond = max(worst_cond, float(np.max(np.abs(E - naive))))
        c = coefficient_bound_check(f, B, gamma[0])
        worst_bound = max(worst_bound, c - 2 * math.pi / n)
    f = DensityFunction(p, rng.random(p))
    U = uniformize(f, 0.2)
    resid = f - conditional_expectation(f, U.partition)
    top = float(np.max(np.abs(dft(resid).coeffs)))
    return [
        Check("E(f|B) matches cell averaging", worst_cond <= 1e-12, f"max error {worst_cond:.2e}"),
        Check("|<f - E(f|B), chi_r>| <= 2 pi/n", worst_bound <= 1e-12, f"max excess {worst_bound:.2e}"),
        Check("uniformize leaves no coefficient above delta", top <= 0.2 + 1e-12, f"max |coef| {top:.4f}"),
        Check("uniformize adds at most 4/delta^2 characters", len(U.added) <= 4 / 0.2**2, f"|added| = {len(U.added)}"),
    ]


def fejer_suite(seed: int = 0) -> list[Check]:
    out = []
    for d in (1, 2, 3):
        for K in (1, 2, 5, 16):
            if (2 * K - 1) ** d > 10**6:
                continue
            Phi = fejer_kernel(d, K)
            mass = Phi.coefficient((0,) * d)
            out.append(Check(f"unit mass d={d} K={K}", mass == 1.0, f"coefficient at 0 = {mass!r}"))
    worst = -np.inf
    for d in (1, 2):
        for K in (2, 4, 8, 16, 32, 64):
            N = 4096 if d == 1 else 256
            s = midpoint_grid(d, N)
            vals = fejer_eval(s, K)
            tail = float(np.mean(torus_dist(s).max(axis=1) * vals))
            worst = max(worst, tail - 1 / math.sqrt(K))
            for lam in (0.1, 0.25):
                mass = fejer_box_mass(d, K, lam)
                out_ok = mass >= fejer_concentration_bound(d, K, lam) - 1e-12
                if not out_ok:
                    out.append(Check(f"concentration d={d} K={K} lam={lam}", False, f"mass {mass:.6f}"))
    out.append(Check("int ||s|| Phi_K <= 1/sqrt K (quadrature)", worst <= 0, f"max excess {worst:.3e}"))
    t = np.linspace(0, 1, 200001)
    deriv = float(np.max(np.abs(2 * math.pi * np.sin(2 * math.pi * t))))
    out.append(Check("L_1 = (2pi/3)(K^2-1) at K=2 vs derivative sup",
                     abs(deriv - fejer_lipschitz_formula(1, 2)) <= 1e-9,
                     f"{deriv:.12f} vs {fejer_lipschitz_formula(1, 2):.12f}"))
    for d in (1, 2, 3):
        for K in (2, 3, 7):
            a, b = fejer_lipschitz_formula(d, K), fejer_lipschitz_sum(d, K)
            out.append(Check(f"Lipschitz formula vs coefficient sum d={d} K={K}", abs(a - b) <= 1e-9 * max(1, a),
                             f"{a:.6g} vs {b:.6g}"))
    return out


def lattice_suite(seed: int = 0, box: int = 5, bez: int = 6) -> list[Check]:
    bad = []
    count = 0
    for d in (1, 2, 3):
        for a in itertools.product(range(-box, box + 1), repeat=d):
            if not any(a):
                continue
            count += 1
            A = complete_matrix(a)
            rows = A.rows
            D = A.det()
            g = gcd_all(a)
            want = sum(x * x for x in a) // g
            det_ok = D == want if (d >= 2 or a[0] > 0) else D == a[0]
            orth = all(sum(x * y for x, y in zip(a, r)) == 0 for r in rows[1:])
            if not (det_ok and orth and tuple(rows[0]) == tuple(a) and A.max_entry() <= max(abs(x) for x in a)):
                bad.append(a)
    out = [Check(f"complete_matrix exhaustive, |a_j| <= {box}, d <= 3", not bad,
                 f"{count} vectors, failures: {bad[:5]}")]
    bad = []
    count = 0
    for m in (1, 2, 3):
        for b in itertools.product(range(-bez, bez + 1), repeat=m):
            if gcd_all(b) != 1:
                continue
            for target in range(-bez, bez + 1):
                count += 1
                c = bounded_bezout(b, target, bez)
                if sum(x * y for x, y in zip(b, c)) != target or max(abs(x) for x in c) > bez:
                    bad.append((b, target, c))
    out.append(Check(f"bounded_bezout exhaustive, |b_j|, |target| <= {bez}, m <= 3", not bad,
                     f"{count} cases, failures: {bad[:5]}"))
    return out


def trig_suite(seed: int = 0, p: int = 53) -> list[Check]:
    worst = 0.0
    for a in range(1, p):
        for P in range(1, p):
            for both in range(max(0, a + P - p), min(a, P) + 1):
                worst = max(worst, sine_identity_check(a, P, both, p))
    out = [Check(f"sine rearrangement exhaustive at p={p}", worst <= 1e-12, f"max residual {worst:.2e}")]
    worst_dft = 0.0
    for L in range(1, p + 1):
        c = ap_fourier_coefficient(ArithmeticProgression(p, 3, 5, L))
        worst_dft = max(worst_dft, abs(c.dft - c.geometric))
    out.append(Check("AP coefficient: DFT = sin(L pi/p)/(p sin(pi/p))", worst_dft <= 1e-12,
                     f"max error {worst_dft:.2e}"))
    rng = np.random.default_rng(seed)
    worst_h = 0.0
    for _ in range(20):
        k = rng.integers(-3, 4, size=(9, 2))
        c = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        F = TrigPolynomial(2, np.vstack([k, -k]), np.concatenate([c, np.conj(c)]) / 2)
        t = rng.random((50, 2))
        direct = np.array([np.sum(F.coeffs * np.exp(2j * np.pi * (F.freqs @ s))) for s in t])
        worst_h = max(worst_h, float(np.max(np.abs(direct.imag))), float(np.max(np.abs(direct.real - F(t)))))
    out.append(Check("Hermitian polynomials evaluate to reals", worst_h <= 1e-10, f"max error {worst_h:.2e}"))
    return out


def relation_suite(seed: int = 0, trials: int = 200) -> list[Check]:
    rng = np.random.default_rng(seed)
    primes = [7, 11, 13, 17, 31, 53, 101]
    disagree, reduce_err = [], 0.0
    for _ in range(trials):
        p = int(rng.choice(primes))
        d = int(rng.integers(1, 4))
        K = int(rng.integers(1, 6))
        phi = TorusHom(p, tuple(int(r) for r in rng.integers(0, p, size=d)))
        ref = reference_relation_scan(phi, K)
        box = find_relation(phi, K, method="box")
        mitm = find_relation(phi, K, method="mitm")
        if (ref is None) != (box is None) or (box is None) != (mitm is None):
            disagree.append((p, phi.freqs, K))
            continue
        for rel in (box, mitm):
            if rel is not None and not rel.holds_for(phi):
                disagree.append((p, phi.freqs, K, rel.k))
        if box is not None and d >= 2 and p > max(abs(x) for x in box.k):
            k = rng.integers(-2, 3, size=(5, d))
            c = rng.standard_normal(5)
            F = TrigPolynomial(d, np.vstack([k, -k]), np.concatenate([c, c]) / 2)
            try:
                red = reduce_dimension(phi, F, box)
            except ValueError:
                continue
            a = F.at_residues(phi.residues(), p)
            b = red.F.at_residues(red.phi.residues(), p)
            reduce_err = max(reduce_err, float(np.max(np.abs(a - b))))
    return [
        Check("box scan, meet-in-the-middle and reference scan agree", not disagree,
              f"{trials} instances, disagreements: {disagree[:5]}"),
        Check("F'(phi') = F(phi) after reduction", reduce_err <= 1e-10, f"max error {reduce_err:.2e}"),
    ]


def _brute_cover_length(S: ResidueSet) -> int:
    p = S.p
    best = p
    for q in range(1, p):
        for s in range(p):
            inv = pow(q, -1, p)
            L = max(((a - s) * inv) % p for a in S) + 1
            best = min(best, L)
    return best


def vosper_suite(seed: int = 0, trials: int = 30) -> list[Check]:
    rng = np.random.default_rng(seed)
    bad_sum, bad_cd, bad_cover, bad_pd = [], [], [], []
    for _ in range(trials):
        p = int(rng.choice([11, 13, 17, 23, 29, 53]))
        k = int(rng.integers(1, p))
        S = ResidueSet(p, tuple(rng.choice(p, size=k, replace=False).tolist()))
        naive = {(a + b) % p for a in S for b in S}
        SS = sumset(S)
        if set(SS.members) != naive:
            bad_sum.append(S.members)
        if len(SS) < min(2 * len(S) - 1, p):
            bad_cd.append(S.members)
        P = ap_cover(S)
        if not P.contains_set(S) or P.length != _brute_cover_length(S):
            bad_cover.append(S.members)
        t = float(rng.choice([1 / p, 0.05, 0.3]))
        counts = np.zeros(p, dtype=int)
        for a in S:
            for b in S:
                counts[(a + b) % p] += 1
        ref = float(np.mean(np.minimum(counts / p, t)))
        if abs(popular_doubling(S, t) - ref) > 1e-12:
            bad_pd.append(S.members)
    B = bohr_set(TorusHom(101, (1,)), 0.1)
    return [
        Check("sumset matches pair enumeration", not bad_sum, f"failures: {bad_sum[:3]}"),
        Check("Cauchy-Davenport", not bad_cd, f"failures: {bad_cd[:3]}"),
        Check("ap_cover is a shortest cover", not bad_cover, f"failures: {bad_cover[:3]}"),
        Check("popular doubling matches pair counting", not bad_pd, f"failures: {bad_pd[:3]}"),
        Check("Bohr set d=1 r=1 radius 0.1 at p=101 has 21 elements", len(B) == 21, f"|B| = {len(B)}"),
    ]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "fourier": fourier_suite,
    "partition": partition_suite,
    "fejer": fejer_suite,
    "lattice": lattice_suite,
    "trig": trig_suite,
    "relation": relation_suite,
    "vosper": vosper_suite,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    return SUITES[name](seed=seed)
