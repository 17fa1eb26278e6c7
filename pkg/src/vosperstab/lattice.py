"""Integer lattice constructions: matrix completion, bounded Bezout, relations, dimension reduction.

Everything here is exact integer arithmetic (Python ints); numpy only drives
the vectorized box scans, whose values stay far below 2**63.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .config import DEFAULT, Config
from .errors import CapExceeded, ModulusTooSmall, PreconditionError
from .torus import TorusHom, TrigPolynomial


def gcd_all(v) -> int:
    return reduce(math.gcd, (abs(int(x)) for x in v), 0)


def det(rows) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    a = [[int(x) for x in r] for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _bezout2(b1: int, b2: int, target: int, K: int) -> tuple[int, int]:
    """c1*b1 + c2*b2 = target with |c_i| <= K, for coprime b1, b2."""
    if abs(b1) == 1:
        return target * b1, 0
    if abs(b2) == 1:
        return 0, target * b2
    swap = abs(b2) > abs(b1)
    if swap:
        b1, b2 = b2, b1
    big, small = abs(b1), abs(b2)
    # scan k by increasing |k|; some k in [-K, K] has big | target - k*small
    for k in itertools.chain([0], *(((j, -j) for j in range(1, K + 1)))):
        rest = target - k * small
        if rest % big == 0:
            c_big, c_small = rest // big, k
            break
    else:
        raise PreconditionError(f"no bounded representation of {target} by ({b1}, {b2}) with K={K}")
    c1 = c_big if b1 > 0 else -c_big
    c2 = c_small if b2 > 0 else -c_small
    return (c2, c1) if swap else (c1, c2)


def bounded_bezout(b, target: int, K: int) -> tuple[int, ...]:
    """c with sum b_j c_j = target and |c_j| <= K, for coprime b with |b_j|, |target| <= K."""
    b = [int(x) for x in b]
    target = int(target)
    if not b:
        raise PreconditionError("empty coefficient vector")
    if gcd_all(b) != 1:
        raise PreconditionError(f"coefficients {b} are not coprime")
    if max(abs(x) for x in b) > K or abs(target) > K:
        raise PreconditionError(f"entries exceed the bound K={K}")
    m = len(b)
    if m == 1:
        return (target * b[0],)
    if m == 2:
        return _bezout2(b[0], b[1], target, K)
    g = gcd_all(b[:-1])
    if g == 0:
        return (0,) * (m - 1) + (target * b[-1],)
    b_prime, c_m = _bezout2(g, b[-1], target, K)
    head = bounded_bezout([x // g for x in b[:-1]], b_prime, K)
    return tuple(head) + (c_m,)


@dataclass(frozen=True)
class IntegerMatrix:
    rows: tuple

    @property
    def d(self) -> int:
        return len(self.rows)

    def det(self) -> int:
        return det(self.rows)

    def max_entry(self) -> int:
        return max(abs(x) for r in self.rows for x in r)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)


def _complete_nonzero_head(a: list[int]) -> list[list[int]]:
    """Inductive construction, assuming a[0] != 0 (so every prefix gcd is positive)."""
    d = len(a)
    if d == 1:
        return [[a[0]]]
    A = _complete_nonzero_head(a[:-1])
    g_prev = gcd_all(a[:-1])
    g = gcd_all(a)
    rows = [list(a)] + [r + [0] for r in A[1:]]
    K = max(abs(x) for x in a)
    coeffs = [x // g_prev for x in a[:-1]]
    last = bounded_bezout(coeffs, -a[-1] // g, K)
    rows.append(list(last) + [g_prev // g])
    return rows


def complete_matrix(a) -> IntegerMatrix:
    """Integer matrix with first row a, rows 2..d orthogonal to a, det = sum a_j^2 / gcd(a).

    Entries are bounded by max |a_j|. For d >= 2 the sign is normalized so det > 0;
    for d = 1 the matrix is forced to be [a_1].
    """
    a = [int(x) for x in a]
    if not a or all(x == 0 for x in a):
        raise PreconditionError("cannot complete the zero vector")
    d = len(a)
    j = next(i for i, x in enumerate(a) if x != 0)
    perm = list(range(d))
    perm[0], perm[j] = perm[j], perm[0]
    rows = _complete_nonzero_head([a[i] for i in perm])
    # undo the column transposition
    rows = [[r[perm.index(c)] for c in range(d)] for r in rows]
    if d >= 2 and det(rows) < 0:
        rows[1] = [-x for x in rows[1]]
    return IntegerMatrix(tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class RelationVector:
    k: tuple
    K: int

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        if all(x == 0 for x in self.k):
            raise PreconditionError("relation must be nonzero")
        if any(abs(x) >= self.K for x in self.k):
            raise PreconditionError(f"relation {self.k} not inside |k_j| < {self.K}")

    def holds_for(self, phi: TorusHom) -> bool:
        return len(self.k) == phi.d and sum(a * r for a, r in zip(self.k, phi.freqs)) % phi.p == 0

    def normalized(self) -> "RelationVector":
        g = gcd_all(self.k)
        return RelationVector(tuple(x // g for x in self.k), self.K)


def _canonical(cands: np.ndarray) -> tuple:
    """Pick from relation candidates: first nonzero entry positive, then smallest (sup, l1, lex)."""
    first = np.argmax(cands != 0, axis=1)
    sgn = np.sign(cands[np.arange(len(cands)), first])
    c = cands * sgn[:, None]
    key = sorted(map(tuple, c.tolist()), key=lambda v: (max(map(abs, v)), sum(map(abs, v)), v))
    return key[0]


def _box_chunks(d: int, K: int, chunk: int):
    side = 2 * K - 1
    total = side**d
    for s in range(0, total, chunk):
        idx = np.arange(s, min(total, s + chunk), dtype=np.int64)
        cols = []
        for _ in range(d):
            cols.append(idx % side - (K - 1))
            idx = idx // side
        yield np.stack(cols[::-1], axis=1)


def _scan_box(freqs, p, K, chunk=1 << 20):
    r = np.asarray(freqs, dtype=np.int64)
    found = []
    for blk in _box_chunks(len(r), K, chunk):
        hit = ((blk @ r) % p == 0) & np.any(blk != 0, axis=1)
        if hit.any():
            found.append(blk[hit])
    return np.concatenate(found) if found else None


def _meet_in_middle(freqs, p, K, cap):
    """Split the coordinates; hash first-half partial sums mod p; look up negated second-half sums."""
    d = len(freqs)
    d1 = d // 2
    r1 = np.asarray(freqs[:d1], dtype=np.int64)
    r2 = np.asarray(freqs[d1:], dtype=np.int64)
    side = 2 * K - 1
    if side ** max(d1, d - d1) > cap:
        raise CapExceeded("box_cap (half)", side ** max(d1, d - d1), cap)
    left = next(_box_chunks(d1, K, side**d1)) if d1 else np.zeros((1, 0), dtype=np.int64)
    ls = (left @ r1) % p if d1 else np.zeros(1, dtype=np.int64)
    lzero = np.all(left == 0, axis=1)
    rep = np.full(p, -1, dtype=np.int64)
    # prefer nonzero representatives, so residue 0 can pair with v = 0
    order = np.argsort(lzero, kind="stable")[::-1]
    rep[ls[order]] = order
    right = next(_box_chunks(d - d1, K, side ** (d - d1)))
    rs = (right @ r2) % p
    need = (-rs) % p
    idx = rep[need]
    ok = idx >= 0
    rzero = np.all(right == 0, axis=1)
    ok &= ~(rzero & lzero[np.maximum(idx, 0)])
    if not ok.any():
        return None
    j = int(np.argmax(ok))
    return tuple(left[idx[j]].tolist()) + tuple(right[j].tolist())


def find_relation(phi: TorusHom, K: int, method: str = "auto", config: Config = DEFAULT) -> RelationVector | None:
    """A nonzero k with |k_j| < K and sum k_j r_j = 0 mod p, or None when phi is K-independent."""
    if K < 1:
        raise PreconditionError("K must be positive")
    d = phi.d
    if d == 0 or K == 1:
        return None
    total = (2 * K - 1) ** d
    if method == "auto":
        method = "box" if total <= config.caps.box_cap else "mitm"
    if method == "box":
        if total > config.caps.box_cap:
            raise CapExceeded("box_cap", total, config.caps.box_cap)
        hits = _scan_box(phi.freqs, phi.p, K)
        return None if hits is None else RelationVector(_canonical(hits), K)
    if method == "mitm":
        k = _meet_in_middle(phi.freqs, phi.p, K, config.caps.box_cap)
        return None if k is None else RelationVector(k, K)
    raise PreconditionError(f"unknown method {method!r}")


def reference_relation_scan(phi: TorusHom, K: int):
    """Plain itertools scan; independent oracle for find_relation."""
    for k in itertools.product(range(-K + 1, K), repeat=phi.d):
        if any(k) and sum(a * r for a, r in zip(k, phi.freqs)) % phi.p == 0:
            return k
    return None


def _solve_mod(A: list[list[int]], b: list[int], p: int) -> list[int]:
    """Solve A y = b over Z/p by Gauss-Jordan elimination."""
    n = len(A)
    M = [[x % p for x in row] + [bi % p] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            raise ModulusTooSmall("matrix is singular mod p")
        M[c], M[piv] = M[piv], M[c]
        inv = pow(M[c][c], -1, p)
        M[c] = [x * inv % p for x in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]


@dataclass
class Reduction:
    phi: TorusHom
    F: object
    matrix: IntegerMatrix
    lipschitz_factor: int

    def lipschitz(self, M: float) -> float:
        return self.lipschitz_factor * M


def reduce_dimension(phi: TorusHom, F, relation: RelationVector) -> Reduction:
    """Replace (phi, F) on T^d by (phi', F') on T^(d-1) with F'(phi'(x)) = F(phi(x)) for all x.

    The rows v_2..v_d of the completed matrix parametrize {t : <a, t> = 0}; phi' solves
    r = sum_i r'_i v_i (mod p), obtained by inverting the completion modulo p.
    """
    d, p = phi.d, phi.p
    if d < 2:
        raise PreconditionError("dimension reduction needs d >= 2")
    if not relation.holds_for(phi):
        raise PreconditionError(f"{relation.k} is not a relation for {phi.freqs} mod {p}")
    if p <= relation.K:
        raise ModulusTooSmall(f"p = {p} must exceed the relation bound K = {relation.K}")
    rel = relation.normalized()
    A = complete_matrix(rel.k)
    D = A.det()
    if D % p == 0:
        raise ModulusTooSmall(f"p divides det = {D}: degenerate parametrization")
    rows = [list(r) for r in A.rows]
    # A^T y = r (mod p); y_1 vanishes because <a, r> = 0 and p does not divide |a|^2
    AT = [list(col) for col in zip(*rows)]
    y = _solve_mod(AT, list(phi.freqs), p)
    if y[0] % p:
        raise ModulusTooSmall("parametrization failed: leading coordinate nonzero mod p")
    new_phi = TorusHom(p, tuple(y[1:]))
    V = np.array(rows[1:], dtype=np.int64)
    factor = int(np.abs(V).sum(axis=0).max())
    if isinstance(F, TrigPolynomial):
        G = F.pullback(V)
    else:
        def G(s, _F=F, _V=V):
            s = np.asarray(s, dtype=float).reshape(-1, _V.shape[0])
            return _F(np.mod(s @ _V, 1.0))
    return Reduction(new_phi, G, A, factor)
