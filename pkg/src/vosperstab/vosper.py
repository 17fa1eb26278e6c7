"""Popular doubling, Bohr sets, AP covers and the end-to-end stability verifier."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .arl import final_arl, intermediate_arl
from .partition import baby_arl
from .config import DEFAULT, Config
from .decomposition import Decomposition
from .errors import CapExceeded, GrowthOverflow, ModulusTooSmall, PreconditionError
from .fourier import DensityFunction, check_modulus, convolve, dft, u2_norm
from .growth import GrowthFunction
from .torus import TorusHom

log = logging.getLogger(__name__)

FLAG_SLACK = 1e-12


@dataclass(frozen=True)
class ResidueSet:
    p: int
    members: tuple

    def __post_init__(self):
        check_modulus(self.p)
        object.__setattr__(self, "members", tuple(sorted({int(a) % self.p for a in self.members})))

    @classmethod
    def from_mask(cls, p: int, mask) -> "ResidueSet":
        return cls(p, tuple(np.flatnonzero(mask).tolist()))

    @classmethod
    def full(cls, p: int) -> "ResidueSet":
        return cls(p, tuple(range(p)))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, x):
        return self.mask()[int(x) % self.p]

    @property
    def density(self) -> float:
        return len(self.members) / self.p

    def mask(self) -> np.ndarray:
        m = np.zeros(self.p, dtype=bool)
        m[list(self.members)] = True
        return m

    def indicator(self) -> DensityFunction:
        return DensityFunction(self.p, self.mask().astype(float))

    def __and__(self, other: "ResidueSet") -> "ResidueSet":
        return ResidueSet(self.p, tuple(set(self.members) & set(other.members)))

    def __or__(self, other: "ResidueSet") -> "ResidueSet":
        return ResidueSet(self.p, self.members + other.members)

    def __sub__(self, other: "ResidueSet") -> "ResidueSet":
        return ResidueSet(self.p, tuple(set(self.members) - set(other.members)))


@dataclass(frozen=True)
class ArithmeticProgression:
    p: int
    start: int
    diff: int
    length: int

    def __post_init__(self):
        check_modulus(self.p)
        object.__setattr__(self, "start", self.start % self.p)
        object.__setattr__(self, "diff", self.diff % self.p)
        if self.diff == 0:
            raise PreconditionError("progression difference must be nonzero mod p")
        if not 1 <= self.length <= self.p:
            raise PreconditionError(f"length must lie in [1, p], got {self.length}")

    def elements(self) -> list[int]:
        return [(self.start + i * self.diff) % self.p for i in range(self.length)]

    def as_set(self) -> ResidueSet:
        return ResidueSet(self.p, tuple(self.elements()))

    def contains_set(self, S: ResidueSet) -> bool:
        # position of s along the progression must be < length
        inv = pow(self.diff, -1, self.p)
        return all(((s - self.start) * inv) % self.p < self.length for s in S)

    def __len__(self):
        return self.length


def autocorrelation_counts(A: ResidueSet) -> np.ndarray:
    """Exact integer counts #{(a, b) in A^2 : a + b = x}, so that 1_A*1_A = counts/p."""
    m = A.mask().astype(float)
    c = np.fft.ifft(np.fft.fft(m) ** 2).real
    return np.rint(c).astype(np.int64)


def popular_doubling(A: ResidueSet, t: float) -> float:
    """E_x min(1_A*1_A(x), t)."""
    if not 0 < t <= 1:
        raise PreconditionError(f"threshold t must lie in (0, 1], got {t}")
    counts = autocorrelation_counts(A)
    return float(np.minimum(counts / A.p, t).mean())


def bohr_set(phi: TorusHom, radius: float) -> ResidueSet:
    """{x : ||r_j x / p|| <= radius for all j}."""
    if not 0 < radius <= 0.5:
        raise PreconditionError(f"radius must lie in (0, 1/2], got {radius}")
    p = phi.p
    if phi.d == 0:
        return ResidueSet.full(p)
    res = phi.residues()
    near = np.minimum(res, p - res)
    return ResidueSet.from_mask(p, np.all(near <= radius * p, axis=1))


def bohr_size_ratio(B: ResidueSet, radius: float, d: int) -> tuple[float, float]:
    """(|B|/p, radius**d): the lower bound every Bohr set satisfies."""
    return len(B) / B.p, radius**d


def sumset(S: ResidueSet) -> ResidueSet:
    """S + S via a Python-int bitset."""
    p = S.p
    if not S.members:
        return ResidueSet(p, ())
    bits = 0
    for a in S.members:
        bits |= 1 << a
    acc = 0
    for a in S.members:
        acc |= bits << a
    acc = (acc & ((1 << p) - 1)) | (acc >> p)
    return ResidueSet(p, tuple(i for i, b in enumerate(bin(acc)[:1:-1]) if b == "1"))


def ap_cover(S: ResidueSet, chunk: int = 1 << 22) -> ArithmeticProgression:
    """Shortest progression containing S; ties go to the smaller difference, then the smaller start."""
    p = S.p
    m = len(S)
    if m == 0:
        raise PreconditionError("cannot cover the empty set")
    if m == p:
        return ArithmeticProgression(p, 0, 1, p)
    if m == 1:
        return ArithmeticProgression(p, S.members[0], 1, 1)
    s = np.asarray(S.members, dtype=np.int64)
    qs = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    best = None
    rows = max(1, chunk // m)
    for lo in range(0, len(qs), rows):
        q = qs[lo:lo + rows]
        inv = np.array([pow(int(v), -1, p) for v in q], dtype=np.int64)
        y = np.sort((np.outer(inv, s)) % p, axis=1)
        gaps = np.empty_like(y)
        gaps[:, :-1] = y[:, 1:] - y[:, :-1]
        gaps[:, -1] = y[:, 0] + p - y[:, -1]
        g = gaps.max(axis=1)
        length = p - g + 1
        L = int(length.min())
        if best is not None and L > best[0]:
            continue
        for i in np.flatnonzero(length == L):
            qi = int(q[i])
            # every maximal gap gives a cover; its start is the element right after the gap
            idx = np.flatnonzero(gaps[i] == g[i])
            starts = sorted(int((y[i][(j + 1) % m] * qi) % p) for j in idx)
            cand = (L, qi, starts[0])
            if best is None or cand < best:
                best = cand
    L, q, st = best
    return ArithmeticProgression(p, st, q, L)


def extend_progression(P: ArithmeticProgression, size: int, A: ResidueSet) -> ArithmeticProgression:
    """Grow P one element at a time until |P| >= size.

    Each step adds the end whose new element lies in A; when both or neither do,
    the step yielding the smaller start wins (appending keeps the start).
    """
    p = P.p
    start, diff, L = P.start, P.diff, P.length
    mask = A.mask()
    while L < min(size, p):
        after = (start + L * diff) % p
        before = (start - diff) % p
        a_in, b_in = bool(mask[after]), bool(mask[before])
        if a_in != b_in:
            prepend = b_in
        else:
            prepend = before < start
        if prepend:
            start = before
        L += 1
    return ArithmeticProgression(p, start, diff, L)


@dataclass(frozen=True)
class APCoefficient:
    formula: float    # sin((L-1) pi/p) / (p sin(pi/p))
    geometric: float  # sin(L pi/p) / (p sin(pi/p)), closed form of the geometric sum
    dft: float        # |1_P^(r)| at the frequency dual to the difference
    frequency: int

    @property
    def discrepancy(self) -> float:
        return abs(self.formula - self.dft)


def ap_fourier_coefficient(P: ArithmeticProgression) -> APCoefficient:
    p, L = P.p, P.length
    den = p * math.sin(math.pi / p)
    r = pow(P.diff, -1, p)
    c = abs(dft(P.as_set().indicator()).coeffs[r])
    return APCoefficient(math.sin((L - 1) * math.pi / p) / den, abs(math.sin(L * math.pi / p)) / den, float(c), r)


@dataclass(frozen=True)
class SineIdentity:
    lhs: float
    main_term: float
    correction: float
    residual: float


def sine_identity(a: int, P: int, both: int, p: int) -> SineIdentity:
    """Both sides of the rearrangement of 2 sin((|P|-1)x) - sin((|A&P|-1)x) - sin((|A|P|-1)x), x = pi/p."""
    if not (0 <= both <= min(a, P) and a + P - both <= p and min(a, P) >= 0):
        raise PreconditionError(f"inconsistent sizes |A|={a}, |P|={P}, |A&P|={both}, p={p}")
    union = a + P - both
    x = math.pi / p
    lhs = 2 * math.sin((P - 1) * x) - math.sin((both - 1) * x) - math.sin((union - 1) * x)
    main = 4 * math.sin((P - both) * x / 2) * math.sin((a - both) * x / 2) * math.sin((a + P - 2) * x / 2)
    corr = 2 * math.sin((P - a) * x / 2) * math.cos((a + P - 2) * x / 2)
    return SineIdentity(lhs, main, corr, abs(lhs - main - corr))


def sine_identity_check(a: int, P: int, both: int, p: int) -> float:
    return sine_identity(a, P, both, p).residual


@dataclass(frozen=True)
class ParameterLedger:
    alpha1: float
    alpha2: float
    eta: float
    delta: float
    delta0: float
    lam: float
    eps: float
    M0: float
    log2_t0: float
    log2_growth_M0: float
    growth: dict
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("alpha1", "alpha2", "eta", "delta", "delta0", "lam", "eps", "M0")}
        out["t0"] = f"log2:{self.log2_t0!r}"
        out["growth_M0"] = f"log2:{self.log2_growth_M0!r}"
        out["growth"] = self.growth
        out["checks"] = self.checks
        return out


def parameter_ledger(alpha1: float, alpha2: float, eta: float, delta: float, M0: float) -> ParameterLedger:
    """Worst-case parameter choices, evaluated in log2 where they underflow."""
    if not 0 < alpha1 < alpha2 < 0.25:
        raise PreconditionError("need 0 < alpha1 < alpha2 < 1/4")
    if eta <= 0 or delta <= 0 or M0 <= 0:
        raise PreconditionError("eta, delta and M0 must be positive")
    delta0 = (1 / (2 * alpha2) - 1) / (1 + eta)
    if (1 + (1 + eta) * delta) * alpha2 >= 0.5:
        raise PreconditionError(f"delta = {delta} exceeds the admissible delta0 = {delta0}")
    lam = eta * delta * alpha1 / 4
    eps = lam**4 / 256
    g = GrowthFunction("ledger", {"eta": eta, "delta": delta, "alpha1": alpha1})
    lgF = g.log2(M0)
    lgt0 = math.log2(lam**2 / 16) + M0 * math.log2(lam / (2 * M0))
    target = eta * delta * alpha1 / 4
    # 4 / (eta delta alpha1 F^(1/2)) should equal t0 exactly
    lg_alt = 2 - math.log2(eta * delta * alpha1) - lgF / 2
    gap = lam**2 / 4 - 2 * math.sqrt(eps) - eps
    checks = {
        "t0 = 4/(eta delta alpha1 sqrt F(M0))": {"lhs": lgt0, "rhs": lg_alt,
                                                 "rel_err": abs(lgt0 - lg_alt) / max(1.0, abs(lgt0))},
        "lambda <= eta delta alpha/4": lam <= target * (1 + FLAG_SLACK),
        "eps <= eta delta alpha/4": eps <= target,
        "1/(t0 sqrt F) <= eta delta alpha/4": -(lgt0 + lgF / 2) <= math.log2(target) + 1e-9,
        "t0 <= (lam/2M)^M (lam^2/4 - 2 sqrt eps - eps)":
            lgt0 <= M0 * math.log2(lam / (2 * M0)) + math.log2(gap) + 1e-12,
        "lam^2/4 - 2 sqrt eps - eps = lam^2/8 - eps": abs(gap - (lam**2 / 8 - eps)) <= 1e-12 * lam**2,
        "lam^2/4 - 2 sqrt eps - eps > lam^2/16": gap > lam**2 / 16,
        "(1+(1+eta)delta) alpha2 < 1/2": (1 + (1 + eta) * delta) * alpha2 < 0.5,
    }
    return ParameterLedger(alpha1, alpha2, eta, delta, delta0, lam, eps, float(M0), lgt0, lgF,
                           g.describe(), checks)


@dataclass(frozen=True)
class Inequality:
    """lhs <= rhs (sense "le") or lhs >= rhs (sense "ge").

    kind "consequence" marks steps the argument derives; "condition" marks
    parameter requirements the worst-case proof imposes, which desk-scale runs
    are not expected to meet.
    """

    name: str
    lhs: float
    rhs: float
    sense: str = "le"
    kind: str = "consequence"

    @property
    def holds(self) -> bool:
        slack = FLAG_SLACK * max(1.0, abs(self.rhs))
        if self.sense == "le":
            return self.lhs <= self.rhs + slack
        return self.lhs >= self.rhs - slack

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "sense": self.sense,
                "kind": self.kind, "holds": self.holds}


@dataclass
class SetC:
    C: ResidueSet
    C_prime: ResidueSet
    C_dprime: ResidueSet
    local_sml: np.ndarray
    bounds: list


def build_set_C(f_str: DensityFunction, f_sml: DensityFunction, B: ResidueSet, lam: float, eps: float) -> SetC:
    """C = {f_str >= lam} minus {x : E_{y in B} |f_sml(x+y)|^2 > eps}."""
    if not len(B):
        raise PreconditionError("Bohr set is empty")
    p = f_str.p
    s = np.abs(f_sml.values) ** 2
    b = B.mask().astype(float)
    # local[x] = (1/|B|) sum_y 1_B(y) s(x+y)
    local = np.fft.ifft(np.fft.fft(s) * np.conj(np.fft.fft(b))).real / len(B)
    Cp = ResidueSet.from_mask(p, f_str.values >= lam)
    Cpp = ResidueSet.from_mask(p, local > eps)
    C = Cp - Cpp
    total = float(np.sum(f_str.values))
    bounds = [
        Inequality("|C'| >= sum f_str - lam p", len(Cp), total - lam * p, "ge"),
        Inequality("|C''| <= eps p", len(Cpp), eps * p),
        Inequality("|C| >= |C'| - |C''|", len(C), len(Cp) - len(Cpp), "ge"),
    ]
    return SetC(C, Cp, Cpp, local, bounds)


@dataclass
class VerifyConfig:
    """Desk-scale parameters standing in for the worst-case ledger."""

    epsilon: float = 0.25
    lam: float = 0.6
    growth: GrowthFunction | None = None
    alpha_window: tuple = (0.02, 0.24)
    run: Config = DEFAULT

    def growth_for(self, alpha: float) -> GrowthFunction:
        """The configured growth, or M + max(15, ceil(1.25/alpha)) so that 1/growth(1) sits below
        the top coefficient of a progression of density alpha."""
        if self.growth is not None:
            return self.growth
        return GrowthFunction.affine(1, max(15, math.ceil(1.25 / alpha)))

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "lambda": self.lam,
                "growth": None if self.growth is None else self.growth.describe(),
                "alpha_window": list(self.alpha_window), "run": self.run.to_dict()}


@dataclass
class VerificationReport:
    p: int
    size: int
    alpha: float
    t: float
    delta: float
    eta: float
    hypothesis_value: float
    hypothesis_threshold: float
    status: str
    P: ArithmeticProgression | None = None
    cover: ArithmeticProgression | None = None
    A_minus_P: int = 0
    P_minus_A: int = 0
    C_emp: float = 0.0
    M: float = 0.0
    d: int = 0
    sizes: dict = field(default_factory=dict)
    inequalities: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    coefficient: APCoefficient | None = None

    @property
    def hypothesis_holds(self) -> bool:
        return self.hypothesis_value <= self.hypothesis_threshold + FLAG_SLACK

    def failed(self, kind: str | None = None) -> list:
        return [q for q in self.inequalities if not q.holds and (kind is None or q.kind == kind)]

    def table(self) -> str:
        rows = [f"{'inequality':<58} {'lhs':>14} {'':2} {'rhs':>14}  holds  kind"]
        for q in self.inequalities:
            op = "<=" if q.sense == "le" else ">="
            rows.append(f"{q.name:<58} {q.lhs:>14.6g} {op:2} {q.rhs:>14.6g}  {'yes' if q.holds else 'NO':5}  {q.kind}")
        return "\n".join(rows)

    def to_dict(self) -> dict:
        ap = lambda P: None if P is None else {"start": P.start, "diff": P.diff, "length": P.length}
        return {
            "p": self.p, "size": self.size, "alpha": self.alpha, "t": self.t, "delta": self.delta, "eta": self.eta,
            "hypothesis": {"value": self.hypothesis_value, "threshold": self.hypothesis_threshold,
                           "holds": self.hypothesis_holds},
            "status": self.status, "P": ap(self.P), "cover_of_C": ap(self.cover),
            "A_minus_P": self.A_minus_P, "P_minus_A": self.P_minus_A, "C_emp": self.C_emp,
            "M": self.M, "d": self.d, "sizes": self.sizes,
            "inequalities": [q.to_dict() for q in self.inequalities], "flags": list(self.flags),
            "ap_coefficient": None if self.coefficient is None else {
                "formula": self.coefficient.formula, "geometric": self.coefficient.geometric,
                "dft": self.coefficient.dft, "frequency": self.coefficient.frequency},
        }


def decompose_for_verification(A: ResidueSet, vc: VerifyConfig | None = None) -> tuple[Decomposition, list]:
    flags = []
    vc = vc or VerifyConfig()
    return _decompose(A.indicator(), vc, vc.growth_for(A.density), flags), flags


def _decompose(f: DensityFunction, vc: VerifyConfig, growth: GrowthFunction, flags: list) -> Decomposition:
    """Final decomposition, degrading to the intermediate and then the baby one when p is too small
    or a cap is hit; every downgrade is flagged."""
    fallbacks = (ModulusTooSmall, CapExceeded, GrowthOverflow)
    try:
        return final_arl(f, vc.epsilon, growth, vc.run)
    except fallbacks as e:
        flags.append(f"final decomposition unavailable ({type(e).__name__}: {e}); using intermediate")
    try:
        return intermediate_arl(f, vc.epsilon, growth, vc.run)
    except fallbacks as e:
        flags.append(f"intermediate decomposition unavailable ({type(e).__name__}: {e}); using baby")
    return baby_arl(f, vc.epsilon, growth, vc.run)


def verify_theorem(A: ResidueSet, t: float, delta: float, eta: float,
                   vc: VerifyConfig | None = None, decomposition: Decomposition | None = None) -> VerificationReport:
    """Run the stability argument on A and record every step it relies on.

    ``decomposition`` lets a threshold sweep reuse one regularity decomposition of 1_A.
    """
    vc = vc or VerifyConfig()
    p = A.p
    alpha = A.density
    lo, hi = vc.alpha_window
    if not lo < alpha < hi:
        raise PreconditionError(f"density {alpha:.4g} outside the configured window ({lo}, {hi})")
    if delta <= 0 or eta <= 0:
        raise PreconditionError("delta and eta must be positive")
    eps, lam = vc.epsilon, vc.lam
    hyp = popular_doubling(A, t)
    rep = VerificationReport(p, len(A), alpha, t, delta, eta, hyp, (2 + delta) * alpha * t, status="")
    flags = rep.flags
    f = A.indicator()
    growth = vc.growth_for(alpha)
    dec = decomposition if decomposition is not None else _decompose(f, vc, growth, flags)
    M = dec.M
    G = growth(M)
    rep.M, rep.d = M, dec.d
    ineq = rep.inequalities

    # removing f_unf
    g = dec.f_str + dec.f_sml
    gg = convolve(g, g)
    pd_g = float(np.minimum(gg.values, t).mean())
    ineq.append(Inequality("|E min(1A*1A,t) - E min(g*g,t)| <= 2/sqrt F(M)", abs(hyp - pd_g), 2 / math.sqrt(G)))
    ineq.append(Inequality("E min(g*g,t) <= (2+delta) alpha t + 2/sqrt F(M)", pd_g,
                           (2 + delta) * alpha * t + 2 / math.sqrt(G)))
    unf2 = float(np.mean(np.abs(dec.f_unf.values) ** 2))
    ineq.append(Inequality("||f_unf||_U2^4 <= ||f_unf||_2^2 / F(M)^2", u2_norm(dec.f_unf) ** 4, unf2 / G**2))

    radius = min(0.5, lam / (2 * M))
    phi = dec.phi if dec.phi is not None else TorusHom(p, dec.gamma)
    B = bohr_set(phi, radius)
    ratio, lower = bohr_size_ratio(B, radius, dec.d)
    ineq.append(Inequality("|B|/p >= (lam/2M)^dim", ratio, lower, "ge"))
    sc = build_set_C(dec.f_str, dec.f_sml, B, lam, eps)
    ineq.extend(sc.bounds)
    C = sc.C
    mean_str = float(dec.f_str.values.mean())
    ineq.append(Inequality("E f_str >= alpha - eps", mean_str, alpha - eps, "ge"))
    ineq.append(Inequality("|C| >= (alpha - 2 eps - lam) p", len(C), (alpha - 2 * eps - lam) * p, "ge"))
    rep.sizes = {"B": len(B), "C": len(C), "C_prime": len(sc.C_prime), "C_dprime": len(sc.C_dprime)}

    gap = lam**2 / 4 - 2 * math.sqrt(eps) - eps
    ineq.append(Inequality("t <= (lam/2M)^M (lam^2/4 - 2 sqrt eps - eps)", t,
                           (lam / (2 * M)) ** M * gap, kind="condition"))
    ineq.append(Inequality("4 eps + 2 lam + 1/F(M) <= (1-eta) delta alpha", 4 * eps + 2 * lam + 1 / G,
                           (1 - eta) * delta * alpha, kind="condition"))

    if not rep.hypothesis_holds:
        rep.status = "hypothesis-not-met"
    elif not len(C):
        rep.status = "no-structure"
    else:
        rep.status = "covered"
    if not len(C):
        flags.append("C is empty: no progression to extract")
        return rep

    CC = sumset(C)
    rep.sizes["C+C"] = len(CC)
    ineq.append(Inequality("|C+C| <= ((2+delta) alpha + 2/(t sqrt F(M))) p", len(CC),
                           ((2 + delta) * alpha + 2 / (t * math.sqrt(G))) * p))
    if len(C) < p:
        cover = ap_cover(C)
    else:
        cover = ArithmeticProgression(p, 0, 1, p)
    rep.cover = cover
    if len(CC) < (2 + 1e-4) * len(C):
        ineq.append(Inequality("|cover(C)| <= |C+C| - |C| + 1 (small doubling)", cover.length,
                               len(CC) - len(C) + 1))
    P = extend_progression(cover, len(A), A)
    rep.P = P
    Pset = P.as_set()
    Pm = Pset.mask()
    Am = A.mask()
    rep.A_minus_P = int(np.sum(Am & ~Pm))
    rep.P_minus_A = int(np.sum(Pm & ~Am))
    rep.sizes["P"] = P.length
    rep.C_emp = rep.A_minus_P / (math.sqrt(delta * alpha) * p)

    ineq.append(Inequality("|P| <= (1+(1+eta) delta) alpha p", P.length, (1 + (1 + eta) * delta) * alpha * p))
    excess = float(np.maximum(dec.f_str.values - Pm, 0).mean())
    ineq.append(Inequality("E max(f_str - 1_P, 0) <= eps + lam", excess, eps + lam))

    diff = Pset.indicator() - f
    mags = np.abs(dft(diff).coeffs)
    mean_diff = float(diff.values.mean())
    ineq.append(Inequality("max |<1_P - 1_A, chi>| <= E(1_P - 1_A) + 4 eps + 2 lam + 1/F(M)", float(mags.max()),
                           mean_diff + 4 * eps + 2 * lam + 1 / G))
    coef = ap_fourier_coefficient(P)
    rep.coefficient = coef
    inter = int(np.sum(Am & Pm))
    union = int(np.sum(Am | Pm))
    den = p * math.sin(math.pi / p)
    x = math.pi / p
    sine_form = (2 * math.sin((P.length - 1) * x) - math.sin((inter - 1) * x) - math.sin((union - 1) * x)) / den
    geo_form = (2 * math.sin(P.length * x) - math.sin(inter * x) - math.sin(union * x)) / den
    at_chi1 = float(mags[coef.frequency])
    ineq.append(Inequality("|<1_P - 1_A, chi_1>| >= sine bound, (|S|-1) form", at_chi1, sine_form, "ge"))
    ineq.append(Inequality("|<1_P - 1_A, chi_1>| >= sine bound, |S| form", at_chi1, geo_form, "ge"))
    if union <= p and P.length >= len(A):
        si = sine_identity(len(A), P.length, inter, p)
        ineq.append(Inequality("E(1_P - 1_A) + 4 eps + 2 lam + 1/F(M) >= 4 sin sin sin / (p sin(pi/p))",
                               mean_diff + 4 * eps + 2 * lam + 1 / G, si.main_term / den, "ge"))
    return rep


@dataclass(frozen=True)
class TransferCheck:
    t: float
    t2: float
    value_t: float
    bound_t: float
    value_t2: float
    bound_t2: float

    @property
    def premise(self) -> bool:
        return self.value_t <= self.bound_t + FLAG_SLACK

    @property
    def conclusion(self) -> bool:
        return self.value_t2 <= self.bound_t2 + FLAG_SLACK

    @property
    def violated(self) -> bool:
        return self.premise and not self.conclusion


def popularity_transfer_check(A: ResidueSet, delta: float, t: float, t2: float) -> TransferCheck:
    """Does E min(1A*1A, t) <= (2+delta) alpha t carry over to the larger threshold t2?"""
    if not 0 < t <= t2 <= 1:
        raise PreconditionError("need 0 < t <= t' <= 1")
    counts = autocorrelation_counts(A) / A.p
    a = A.density
    v1 = float(np.minimum(counts, t).mean())
    v2 = float(np.minimum(counts, t2).mean())
    res = TransferCheck(t, t2, v1, (2 + delta) * a * t, v2, (2 + delta) * a * t2)
    if res.violated:
        log.warning("popularity transfer fails for |A|=%d at t=%g -> t'=%g", len(A), t, t2)
    return res


def transfer_sweep(sets, delta: float, thresholds) -> list[tuple[int, TransferCheck]]:
    """All (set index, check) pairs where the premise holds at t but fails at some t' > t."""
    ts = sorted(thresholds)
    hits = []
    for i, A in enumerate(sets):
        for j, t in enumerate(ts):
            for t2 in ts[j + 1:]:
                r = popularity_transfer_check(A, delta, t, t2)
                if r.violated:
                    hits.append((i, r))
    return hits
