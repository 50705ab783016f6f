"""Invariants and explicit constructions for sigma-linear maps ``b sigma``.

Matrices are elements of GL_n(k((z))) acting on column vectors; ``sigma``
acts on coefficients as the Frobenius of ``k`` over the base field.

Newton points are read off the characteristic polynomial of the
k((z))-linear map ``(b sigma)^r = b sigma(b) ... sigma^(r-1)(b)`` where ``r``
is the order of sigma on ``k``: the slopes of ``b sigma`` are the valuations
of its eigenvalues divided by ``r``.  Unknown coefficients (beyond the
precision) are only accepted if their known lower bound already lies on or
above the polygon, so every returned Newton point is certified.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import _fplinear as fpl
from .errors import (CertificationFailed, DomainError, InternalError, NoConvergence,
                     PrecisionExhausted)
from .fields import FiniteField
from .matrix import SeriesMatrix, permutation_matrix
from .poset import NewtonPoint, is_newton_point
from .rootdatum import GroupType, RootDatum, build_root_datum
from .series import Precision, TruncatedSeries

# ---------------------------------------------------------------------------
# group plumbing


def _datum_for(b: SeriesMatrix, datum: RootDatum | None) -> RootDatum:
    if datum is None:
        return build_root_datum(GroupType("GL", b.n))
    return datum


def pullback(datum: RootDatum, v) -> tuple:
    """Turn an ascending GL-vector of the standard representation into a dominant group coweight.

    For SO_2n the sign of the smallest entry is not visible in the standard
    representation; the non-negative choice is returned.
    """
    v = tuple(Fraction(x) for x in v)
    fam, n = datum.group.family, datum.group.n
    if fam in ("GL", "SL"):
        if len(v) != n:
            raise DomainError(f"{datum.group.name} needs a {n}x{n} matrix")
        return v
    size = {"Sp": 2 * n, "SO_odd": 2 * n + 1, "SO_even": 2 * n}[fam]
    if len(v) != size:
        raise DomainError(f"{datum.group.name} needs a {size}x{size} matrix")
    if any(a != -c for a, c in zip(v, reversed(v))):
        raise DomainError(f"{v} is not symmetric; not a point of {datum.group.name}")
    return datum.dominant_sort(v[size - n:])


def _check_square_invertible_field(b):
    if not isinstance(b, SeriesMatrix):
        raise DomainError("expected a SeriesMatrix")


# ---------------------------------------------------------------------------
# Hodge and Kottwitz points


def _certified_min(values):
    """Minimum valuation of a family of series, or raise if the precision hides it."""
    known = [x.min_exp for x in values if not x.is_zero()]
    bound = min((x.val_lower_bound() for x in values), default=float("inf"))
    if not known:
        if bound == float("inf"):
            return None
        raise PrecisionExhausted("all minors vanish at this precision")
    m = min(known)
    if bound < m:
        raise PrecisionExhausted(f"a minor is only known to exceed z^{bound}; cannot certify minimum {m}")
    return m


def gl_hodge_point(b: SeriesMatrix) -> tuple:
    """Elementary-divisor valuations, ascending, from determinantal divisors."""
    _check_square_invertible_field(b)
    d = [0]
    for k in range(1, b.n + 1):
        subsets = list(combinations(range(b.n), k))
        m = _certified_min([b.minor(r, c) for r in subsets for c in subsets])
        if m is None:
            raise DomainError("matrix is singular")
        d.append(m)
    return tuple(d[k] - d[k - 1] for k in range(1, b.n + 1))


def hodge_point(b: SeriesMatrix, datum: RootDatum | None = None) -> tuple:
    datum = _datum_for(b, datum)
    return tuple(int(x) for x in pullback(datum, gl_hodge_point(b)))


def kottwitz_point(b: SeriesMatrix, datum: RootDatum | None = None) -> tuple:
    datum = _datum_for(b, datum)
    if datum.group.family == "GL":
        det = b.det()
        if det.is_zero() and det.prec is None:
            raise DomainError("matrix is singular")
        return (det.valuation(),)
    return datum.kappa(hodge_point(b, datum))


# ---------------------------------------------------------------------------
# Newton points


def sigma_norm(b: SeriesMatrix, r: int | None = None) -> SeriesMatrix:
    """``b sigma(b) ... sigma^(r-1)(b)``, the linear map ``(b sigma)^r``."""
    r = b.field.sigma_order if r is None else r
    out = b
    for k in range(1, r):
        out = out @ b.frobenius(k)
    return out


def _lower_hull(points):
    """Lower convex hull of points sorted by x (monotone chain)."""
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _hull_value(hull, x):
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (x - x1)
    raise InternalError("hull evaluation outside its range")


def _slopes(hull):
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        out.extend([Fraction(y2 - y1, x2 - x1)] * (x2 - x1))
    return out


def gl_newton_slopes(b: SeriesMatrix) -> tuple:
    """Certified ascending slope vector of ``b sigma`` (as a GL_n point)."""
    r = b.field.sigma_order
    coeffs = sigma_norm(b, r).charpoly()
    n = b.n
    last = coeffs[n]
    if last.is_zero():
        if last.prec is None:
            raise DomainError("matrix is singular")
        raise PrecisionExhausted("determinant is not known to be nonzero at this precision")
    known, unknown = [], []
    for k, a in enumerate(coeffs):
        if not a.is_zero():
            known.append((k, a.min_exp))
        elif a.prec is not None:
            unknown.append((k, a.prec))
    hull = _lower_hull(known)
    slopes = tuple(s / r for s in _slopes(hull))
    for k, bound in unknown:
        if bound < _hull_value(hull, k):
            raise CertificationFailed(
                f"coefficient {k} of the characteristic polynomial is only known beyond z^{bound}",
                estimate=slopes)
    return slopes


def newton_point(b: SeriesMatrix, datum: RootDatum | None = None) -> NewtonPoint:
    """Certified Newton point, cross-checked against membership and Mazur's inequality."""
    datum = _datum_for(b, datum)
    slopes = gl_newton_slopes(b)
    nu = pullback(datum, slopes)
    kappa = kottwitz_point(b, datum)
    mu = hodge_point(b, datum)
    if not datum.is_dominant(nu) or not is_newton_point(datum, nu, kappa):
        raise CertificationFailed(f"{nu} is not a Newton point of class {kappa}", estimate=nu)
    if not datum.leq_dominance(nu, mu):
        raise CertificationFailed(f"{nu} violates Mazur's inequality against {mu}", estimate=nu)
    return NewtonPoint(datum, nu, kappa)


def newton_estimate(b: SeriesMatrix, N: int) -> tuple:
    """Slope estimate ``m_k(N)/N`` from minors of the N-fold product (converges from below)."""
    P = b
    for k in range(1, N):
        P = P @ b.frobenius(k)
    m = [0]
    for k in range(1, b.n + 1):
        subsets = list(combinations(range(b.n), k))
        v = _certified_min([P.minor(r, c) for r in subsets for c in subsets])
        m.append(v)
    s = [Fraction(x, N) for x in m]
    return tuple(s[k] - s[k - 1] for k in range(1, b.n + 1))


def exterior_power(b: SeriesMatrix, m: int) -> SeriesMatrix:
    return b.exterior_power(m)


def central_twist(b: SeriesMatrix, m: int) -> SeriesMatrix:
    """``z^(-m) b``: shifts Newton and Hodge points by ``-m``."""
    return b.shift(-m)


def sigma_conjugate(b: SeriesMatrix, g: SeriesMatrix, window: int | None = None) -> SeriesMatrix:
    """``g^-1 b sigma(g)``."""
    if g.field != b.field:
        big = g.field if g.field.e > b.field.e else b.field
        b, g = b.embed(big), g.embed(big)
    return g.inverse(window) @ b @ g.frobenius()


# ---------------------------------------------------------------------------
# Weyl representatives


@dataclass(frozen=True)
class ExtendedWeylElem:
    """Monomial matrix with ``z**powers[i]`` at ``(perm[i], i)`` (0-based)."""

    perm: tuple
    powers: tuple

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(int(x) for x in self.perm))
        object.__setattr__(self, "powers", tuple(int(x) for x in self.powers))
        if sorted(self.perm) != list(range(len(self.perm))) or len(self.powers) != len(self.perm):
            raise DomainError("ExtendedWeylElem needs a permutation and matching powers")

    @classmethod
    def cycle(cls, n: int) -> ExtendedWeylElem:
        """``e_l -> e_{l+1}`` for ``l < n`` and ``e_n -> z e_1``."""
        return cls(tuple(list(range(1, n)) + [0]), tuple([0] * (n - 1) + [1]))

    @classmethod
    def translation(cls, powers) -> ExtendedWeylElem:
        return cls(tuple(range(len(powers))), tuple(powers))

    @property
    def n(self):
        return len(self.perm)

    def __mul__(self, other: ExtendedWeylElem) -> ExtendedWeylElem:
        perm = tuple(self.perm[other.perm[i]] for i in range(self.n))
        powers = tuple(other.powers[i] + self.powers[other.perm[i]] for i in range(self.n))
        return ExtendedWeylElem(perm, powers)

    def __pow__(self, k: int) -> ExtendedWeylElem:
        out = ExtendedWeylElem.translation([0] * self.n)
        for _ in range(k):
            out = out * self
        return out

    def direct_sum(self, other: ExtendedWeylElem) -> ExtendedWeylElem:
        return ExtendedWeylElem(self.perm + tuple(self.n + x for x in other.perm), self.powers + other.powers)

    def to_matrix(self, field: FiniteField) -> SeriesMatrix:
        return permutation_matrix(field, self.perm, self.powers)

    def cycle_newton_point(self) -> tuple:
        """Slopes from cycle-averaged translation parts, ascending."""
        seen, out = set(), []
        for i in range(self.n):
            if i in seen:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self.perm[j]
            avg = Fraction(sum(self.powers[k] for k in cyc), len(cyc))
            out.extend([avg] * len(cyc))
        return tuple(sorted(out))


def weyl_representative(v: NewtonPoint) -> ExtendedWeylElem:
    """Block element: each slope ``a/b`` segment becomes copies of ``cycle(b)**a``."""
    if v.datum.group.family != "GL":
        raise DomainError("Weyl representatives are implemented for GL_n only")
    pts = v.point
    out = None
    i = 0
    while i < len(pts):
        j = i
        while j < len(pts) and pts[j] == pts[i]:
            j += 1
        s, length = pts[i], j - i
        den = s.denominator
        if length % den:
            raise InternalError(f"segment of length {length} with slope {s} is not integral")
        whole, rem = divmod(s.numerator, den)
        block = ExtendedWeylElem.cycle(den) ** rem * ExtendedWeylElem.translation([whole] * den)
        for _ in range(length // den):
            out = block if out is None else out.direct_sum(block)
        i = j
    return out


# ---------------------------------------------------------------------------
# effective isogeny: saturate the standard lattice under b sigma


class _PolarSpace:
    """F_p-coordinates of polar parts (exponents -M..-1) of column vectors."""

    def __init__(self, field: FiniteField, n: int, M: int):
        self.field, self.n, self.M = field, n, M
        self.e = field.e
        self.size = n * M * field.e

    def encode(self, col) -> np.ndarray:
        arr = np.zeros((self.n, self.M, self.e), dtype=np.int64)
        for i, x in enumerate(col):
            for k, c in x.terms().items():
                if k >= 0:
                    continue
                if k < -self.M:
                    raise InternalError(f"pole of order {-k} exceeds the lattice bound {self.M}")
                arr[i, k + self.M] = c
        return arr.reshape(-1)

    def decode(self, vec) -> list:
        arr = np.asarray(vec).reshape(self.n, self.M, self.e)
        return [TruncatedSeries(self.field, -self.M, arr[i]) for i in range(self.n)]

    def closure(self, vecs) -> list:
        """All ``z^t x^s`` multiples of the given polar vectors."""
        out = []
        F = self.field
        for v in vecs:
            arr = np.asarray(v).reshape(self.n, self.M, self.e)
            for s in range(self.e):
                a = arr if s == 0 else F.scale(arr.reshape(-1, self.e), F.p ** s).reshape(arr.shape)
                cur = a
                for _ in range(self.M):
                    if not cur.any():
                        break
                    out.append(cur.reshape(-1).copy())
                    nxt = np.zeros_like(cur)
                    nxt[:, 1:] = cur[:, :-1]
                    cur = nxt
        return out

    def pole_order(self, vec, i) -> int:
        row = np.asarray(vec).reshape(self.n, self.M, self.e)[i]
        nz = np.flatnonzero(row.any(axis=1))
        return 0 if nz.size == 0 else self.M - int(nz[0])


def _apply_bsigma(b: SeriesMatrix, col):
    sc = [x.frobenius() for x in col]
    zero = TruncatedSeries.zero(b.field)
    out = []
    for i in range(b.n):
        acc = zero
        for j in range(b.n):
            if not sc[j].is_zero():
                acc = acc + b[i, j] * sc[j]
        out.append(acc)
    return out


def effective_isogeny(b: SeriesMatrix):
    """Return ``(g, g^-1 b sigma(g))`` with the second factor integral.

    The columns of ``g`` span the smallest ``b sigma``-stable lattice
    containing the standard one, in upper-triangular form with monomial
    diagonal, so ``g`` has an exact inverse.
    """
    nu = newton_point(b)
    if any(x < 0 for x in nu.point):
        raise DomainError(f"negative Newton slope in {nu}")
    mu = gl_hodge_point(b)
    n, F = b.n, b.field
    if mu[0] >= 0:
        return SeriesMatrix.identity(F, n), b
    cap = n * (mu[-1] - mu[0] + 1)
    M = cap * (-mu[0])
    if b.prec is not None and b.prec < M:
        raise PrecisionExhausted(f"isogeny needs entries known below z^{M}")
    space = _PolarSpace(F, n, M)
    p = F.p
    images = [space.encode(b.column(i)) for i in range(n)]
    S = fpl.span_basis(np.array(space.closure(images)).reshape(-1, space.size), p)
    for _ in range(cap + 1):
        images = [space.encode(_apply_bsigma(b, space.decode(w))) for w in S]
        gens = space.closure(images)
        new = fpl.span_basis(np.vstack([S] + ([np.array(gens)] if gens else [])), p)
        if new.shape[0] == S.shape[0]:
            break
        S = new
    else:
        raise InternalError(f"lattice saturation did not stabilize within {cap} steps")

    cols = []
    for i in range(n):
        if S.shape[0]:
            mask = np.zeros((n, M, F.e), dtype=bool)
            mask[i + 1:] = True
            sub = S[:, mask.reshape(-1)]
            coeffs = fpl.nullspace(sub.T, p) if sub.shape[1] else np.eye(S.shape[0], dtype=np.int64)
            cand = (coeffs @ S) % p if coeffs.shape[0] else np.zeros((0, space.size), dtype=np.int64)
        else:
            cand = np.zeros((0, space.size), dtype=np.int64)
        best, order = None, 0
        for w in cand:
            o = space.pole_order(w, i)
            if o > order:
                best, order = w, o
        if order == 0:
            cols.append([TruncatedSeries.monomial(F, 0) if k == i else TruncatedSeries.zero(F)
                         for k in range(n)])
            continue
        col = space.decode(best)
        f = col[i].shift(order)
        u = f.inverse(order).truncate(order)
        u = TruncatedSeries(F, u.min_exp, u.coeffs)
        w2 = space.encode([u * x for x in col])
        col = space.decode(w2)
        col[i] = TruncatedSeries.monomial(F, -order)
        cols.append(col)
    g = SeriesMatrix.from_columns(cols)
    b_eff = g.inverse() @ b @ g.frobenius()
    if not b_eff.is_integral():
        raise InternalError("saturated lattice is not stable under b sigma")
    return g, b_eff


# ---------------------------------------------------------------------------
# Hodge-Newton filtration


@dataclass(frozen=True)
class HNData:
    """Rank-one slope-zero sub-object of ``b sigma`` and the resulting block form.

    ``conjugated = conjugator^-1 b sigma(conjugator)`` has first column
    ``(sub_unit, 0, ..., 0)`` modulo ``z^window``; ``block`` is the same
    matrix with that residue removed, and ``quotient`` its lower-right block.
    """

    generator: tuple
    sub_unit: TruncatedSeries
    quotient: SeriesMatrix
    conjugator: SeriesMatrix
    conjugated: SeriesMatrix
    block: SeriesMatrix
    window: int


def _constant_part(b: SeriesMatrix) -> SeriesMatrix:
    return b.truncate(1)


def hn_filtration(b: SeriesMatrix, window: int = 16) -> HNData:
    nu = newton_point(b)
    if not b.is_integral():
        raise DomainError("Hodge-Newton filtration needs an integral (effective) matrix")
    zeros = sum(1 for x in nu.point if x == 0)
    if zeros != 1 or any(x < 0 for x in nu.point):
        raise DomainError(f"slope 0 must occur exactly once; Newton point is {nu}")
    n, F = b.n, b.field
    if n < 2:
        raise DomainError("Hodge-Newton filtration needs n >= 2")
    bbar = _constant_part(b)
    P = bbar
    for k in range(1, n):
        P = (P @ bbar.frobenius(k)).truncate(1)
    col = next((P.column(j) for j in range(n) if any(not x.is_zero() for x in P.column(j))), None)
    if col is None:
        raise DomainError("reduction of (b sigma)^n vanishes; no slope-0 part")
    i0 = next(i for i, x in enumerate(col) if not x.is_zero())

    def normalize(v):
        inv = v[i0].inverse(window)
        out = []
        for x in v:
            y = (x * inv).truncate(window)
            out.append(TruncatedSeries(F, y.min_exp, y.coeffs) if not y.is_zero() else TruncatedSeries.zero(F))
        return out

    v = normalize([x.truncate(1) for x in col])
    cap = n * (window + n * 4) + 16
    for _ in range(cap):
        w = normalize(_apply_bsigma(b, v))
        if all(a == c for a, c in zip(w, v)):
            break
        v = w
    else:
        raise PrecisionExhausted(f"slope-0 line did not stabilize modulo z^{window}")
    one, zero = TruncatedSeries.one(F), TruncatedSeries.zero(F)
    cols = [v] + [[one if r == k else zero for r in range(n)] for k in range(n) if k != i0]
    g = SeriesMatrix.from_columns(cols)
    conj = g.inverse() @ b @ g.frobenius()
    for r in range(1, n):
        x = conj[r, 0]
        if x.val_lower_bound() < window:
            raise InternalError("conjugated matrix is not block-triangular to the requested window")
    rows = [list(r) for r in conj.entries]
    for r in range(1, n):
        rows[r][0] = TruncatedSeries.zero(F)
    block = SeriesMatrix(rows)
    quotient = block.submatrix(range(1, n), range(1, n))
    return HNData(tuple(v), conj[0, 0], quotient, g, conj, block, window)


def hn_normalize(b: SeriesMatrix, d: int, precision: Precision | None = None):
    """Split ``b = [[b0, w], [0, B]]`` as ``h^-1 b sigma(h) = bM bN`` with ``bN = 1 mod z^d``.

    ``h = [[1, y], [0, 1]]`` is found by iterating
    ``y <- sigma^-1(b0^-1 (y B - w))``, which contracts because ``B`` has
    strictly positive slopes.
    """
    precision = precision or Precision.from_env()
    n, F = b.n, b.field
    if n < 2:
        raise DomainError("hn_normalize needs n >= 2")
    if d > precision.max_window or (b.prec is not None and b.prec < d):
        raise PrecisionExhausted(f"target depth {d} exceeds the available precision")
    for r in range(1, n):
        if not (b[r, 0].is_zero() and (b[r, 0].prec is None or b[r, 0].prec >= d)):
            raise DomainError("matrix is not in (1, n-1) block-upper form")
    if not b.is_integral():
        raise DomainError("hn_normalize needs integral entries")
    b0 = b[0, 0]
    if b0.is_zero() or b0.min_exp != 0:
        raise DomainError("upper-left entry must be a unit")
    B = b.submatrix(range(1, n), range(1, n))
    w = [b[0, j] for j in range(1, n)]
    b0inv = b0.inverse(d)
    zero = TruncatedSeries.zero(F)

    def exact_trunc(x):
        x = x.truncate(d)
        return TruncatedSeries(F, x.min_exp, x.coeffs) if not x.is_zero() else zero

    y = [zero] * (n - 1)
    cap = (d + 1) * (n + 1) * max(1, F.sigma_order) + 16
    for _ in range(cap):
        yB = [sum((y[k] * B[k, j] for k in range(n - 1)), zero) for j in range(n - 1)]
        ny = [exact_trunc((b0inv * (yB[j] - w[j])).frobenius(-1)) for j in range(n - 1)]
        if all(a == c for a, c in zip(ny, y)):
            break
        y = ny
    else:
        raise PrecisionExhausted(f"hn_normalize did not converge modulo z^{d}")
    one = TruncatedSeries.one(F)
    rows = [[one] + list(y)] + [[one if r == c else zero for c in range(n)] for r in range(1, n)]
    h = SeriesMatrix(rows)
    conj = h.inverse() @ b @ h.frobenius()
    for j in range(1, n):
        if conj[0, j].val_lower_bound() < d:
            raise InternalError("off-diagonal block not cleared to the requested depth")
    bM_rows = [[b0] + [zero] * (n - 1)] + [[zero] + [B[r, c] for c in range(n - 1)] for r in range(n - 1)]
    bM = SeriesMatrix(bM_rows)
    bN_rows = [[one] + [b0inv * conj[0, j] for j in range(1, n)]] + \
        [[one if r == c else zero for c in range(n)] for r in range(1, n)]
    bN = SeriesMatrix(bN_rows)
    if not (bM @ bN).agrees(conj):
        raise InternalError("factorization check failed")
    return h, bM, bN


# ---------------------------------------------------------------------------
# solving sigma-conjugacy as a linear system over extensions


def _dense(x: TruncatedSeries, lo: int, hi: int) -> np.ndarray:
    arr = np.zeros((hi - lo, x.field.e), dtype=np.int64)
    for k, c in x.terms().items():
        if lo <= k < hi:
            arr[k - lo] = c
    return arr


def _extension_degrees(field: FiniteField, limit: int):
    out = []
    for m in (1, 2, 3, 4, 6, 8, 12, 16):
        if field.p ** (field.e * m) <= 2 ** 16 and m <= limit:
            out.append(m)
    return out


def _conjugation_system(b, b2, lo, hi, T, homogeneous=False):
    """Matrix of ``X -> X b2 - b sigma(X)`` on unknown exponents [lo, hi), equations below T."""
    F, n, e, p = b.field, b.n, b.field.e, b.field.p
    vmin = min(min(x.val_lower_bound() for r in M.entries for x in r) for M in (b, b2))
    vmin = int(min(vmin, 0))
    # equations cover every exponent where b - b2 can be nonzero
    elo = vmin + min(lo, 0)
    off = lo + vmin - elo
    L = T - elo
    b_d = [[_dense(b[i, j], vmin, T - lo) for j in range(n)] for i in range(n)]
    b2_d = [[_dense(b2[i, j], vmin, T - lo) for j in range(n)] for i in range(n)]
    # column index: (i, j, k, s); row index: (r, c, t, coord)
    nunk = n * n * (hi - lo) * e
    A = np.zeros((n * n * L * e, nunk), dtype=np.int64)
    mult = [F.mult_matrix(p ** s) for s in range(e)]
    mult_sig = [F.mult_matrix(F.frob(p ** s)) for s in range(e)]
    col = 0
    for i in range(n):
        for j in range(n):
            for k in range(hi - lo):
                for s in range(e):
                    block = np.zeros((n, n, L, e), dtype=np.int64)
                    # X = c z^(lo+k) E_ij; X b2 fills row i
                    t0 = k + off
                    if t0 < L:
                        for c2 in range(n):
                            block[i, c2, t0:] += b2_d[j][c2][:L - t0] @ mult[s].T
                        for r in range(n):
                            block[r, j, t0:] -= b_d[r][i][:L - t0] @ mult_sig[s].T
                    A[:, col] = block.reshape(-1) % p
                    col += 1
    return A, elo, L


def _rhs(b, b2, elo, T):
    n = b.n
    out = np.zeros((n, n, T - elo, b.field.e), dtype=np.int64)
    for r in range(n):
        for c in range(n):
            out[r, c] = _dense(b[r, c] - b2[r, c], elo, T)
    return out.reshape(-1) % b.field.p


def _from_unknowns(x, F, n, lo, hi, constant_one=True):
    arr = np.asarray(x).reshape(n, n, hi - lo, F.e)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            s = TruncatedSeries(F, lo, arr[i, j])
            if constant_one and i == j:
                s = s + TruncatedSeries.one(F)
            row.append(s)
        rows.append(row)
    return SeriesMatrix(rows)


def _verify(b, b2, g, T) -> bool:
    diff = b @ g.frobenius() - g @ b2
    return all(x.val_lower_bound() >= T for r in diff.entries for x in r)


def default_conjugation_window(b: SeriesMatrix, d: int) -> int:
    mu = gl_hodge_point(b)
    return d + max(mu[-1], 0) + 2 * (mu[-1] - mu[0] + b.n)


def sigma_conj_solve(b: SeriesMatrix, b2: SeriesMatrix, d: int, window: int | None = None,
                     max_degree: int = 16, max_unknowns: int = 4000) -> SeriesMatrix:
    """Find ``g = 1 + X`` with ``X`` in ``z k'[[z]]`` and ``g^-1 b sigma(g) = b2`` modulo ``z^window``.

    ``k'`` runs over extensions of ``k`` of increasing degree; the defining
    equation ``X b2 - b sigma(X) = b - b2`` is F_p-linear in the coefficients
    of ``X``.  The returned ``g`` is verified exactly; if no extension up to
    ``max_degree`` admits a solution, NoConvergence is raised.
    """
    if b.n != b2.n or b.field != b2.field:
        raise DomainError("matrices must share size and field")
    T = default_conjugation_window(b, d) if window is None else window
    for M in (b, b2):
        if M.prec is not None and M.prec < T:
            raise PrecisionExhausted(f"inputs known only below z^{M.prec}; window is {T}")
    if all(x.val_lower_bound() >= T for r in (b - b2).entries for x in r):
        return SeriesMatrix.identity(b.field, b.n)
    vmin = min(min(x.val_lower_bound() for r in M.entries for x in r) for M in (b, b2))
    lo, hi = 1, int(T - min(vmin, 0))
    for m in _extension_degrees(b.field, max_degree):
        F = b.field.extension(m) if m > 1 else b.field
        if b.n * b.n * (hi - lo) * F.e > max_unknowns:
            break
        be, b2e = b.embed(F), b2.embed(F)
        A, elo, _ = _conjugation_system(be, b2e, lo, hi, T)
        x = fpl.solve(A, _rhs(be, b2e, elo, T), F.p)
        if x is None:
            continue
        g = _from_unknowns(x, F, b.n, lo, hi)
        if not _verify(be, b2e, g, T):
            raise InternalError("linear solution failed verification")
        return g
    raise NoConvergence(f"no sigma-conjugator in K_1 over extensions of degree <= {max_degree} "
                        f"modulo z^{T}; depth {d} may be below the admissibility threshold")


def lang_normalize(u: TruncatedSeries, window: int, max_degree: int = 16) -> TruncatedSeries:
    """A unit ``g`` with ``g^-1 u sigma(g) = 1`` modulo ``z^window`` (``u`` a unit)."""
    F = u.field
    if u.is_zero() or u.min_exp != 0:
        raise DomainError("lang_normalize needs a unit")
    if u.prec is not None and u.prec < window:
        raise PrecisionExhausted("unit known to insufficient precision")
    one = SeriesMatrix.identity(F, 1)
    b = SeriesMatrix([[u]])
    for m in _extension_degrees(F, max_degree):
        E = F.extension(m) if m > 1 else F
        be, oe = b.embed(E), one.embed(E)
        # homogeneous: X * 1 - u sigma(X) = 0 with constant term allowed
        A, elo, _ = _conjugation_system(be, oe, 0, window, window)
        ker = fpl.nullspace(A, E.p)
        for vec in ker:
            g = _from_unknowns(vec, E, 1, 0, window, constant_one=False)
            if not g[0, 0].is_zero() and g[0, 0].min_exp == 0 and _verify(be, oe, g, window):
                return g[0, 0]
    raise NoConvergence(f"no Lang solution over extensions of degree <= {max_degree}")
