"""Split classical root data and the coweight lattice.

Conventions (all families): coweights are vectors in ambient coordinates
and the pairing is the dot product.  Dominance is *ascending*:

* ``alpha_i = e_{i+1} - e_i`` for ``i < n`` (all families),
* the last simple root of the B/C/D families sits at the small end:
  ``e_1`` (B), ``2 e_1`` (C), ``e_1 + e_2`` (D).

So a dominant GL_n coweight is ``v_1 <= ... <= v_n`` and a dominant Sp_2n
coweight is ``0 <= v_1 <= ... <= v_n``.  Simple-root indices are 1-based.

SL_n uses ambient coordinates with the sum-zero constraint; its cocharacter
lattice has basis ``e_{i+1} - e_i``.  The fundamental group and the Kottwitz
map come from the Smith normal form of the coroot matrix, never from
per-family tables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations

from sympy import Matrix, Rational, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import DomainError

FAMILIES = ("GL", "SL", "Sp", "SO_odd", "SO_even")


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def as_vector(v) -> tuple:
    return tuple(_frac(x) for x in v)


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@dataclass(frozen=True)
class GroupType:
    family: str
    n: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unsupported family {self.family!r}")
        low = 1 if self.family in ("GL", "SL") else 2
        if self.n < low:
            raise DomainError(f"{self.family} needs rank parameter >= {low}")

    @property
    def name(self) -> str:
        return {"GL": f"GL{self.n}", "SL": f"SL{self.n}", "Sp": f"Sp{2 * self.n}",
                "SO_odd": f"SO{2 * self.n + 1}", "SO_even": f"SO{2 * self.n}"}[self.family]

    @classmethod
    def parse(cls, text: str) -> GroupType:
        """``GL3``, ``SL2``, ``Sp4``, ``SO5``, ``SO4`` (case-insensitive)."""
        m = re.fullmatch(r"\s*(GL|SL|SP|SO)_?(\d+)\s*", text.upper())
        if not m:
            raise DomainError(f"cannot parse group name {text!r}")
        fam, k = m.group(1), int(m.group(2))
        if fam in ("GL", "SL"):
            return cls(fam, k)
        if fam == "SP":
            if k % 2:
                raise DomainError("Sp needs an even matrix size")
            return cls("Sp", k // 2)
        return cls("SO_odd", (k - 1) // 2) if k % 2 else cls("SO_even", k // 2)


class RootDatum:
    """Root datum of a split classical group in ambient coordinates."""

    def __init__(self, group: GroupType):
        self.group = group
        fam, n = group.family, group.n
        self.dim = n
        e = lambda i: tuple(1 if k == i else 0 for k in range(n))
        add = lambda a, b, s=1: tuple(x + s * y for x, y in zip(a, b))
        scale = lambda c, a: tuple(c * x for x in a)
        roots = [add(e(i + 1), e(i), -1) for i in range(n - 1)]
        coroots = list(roots)
        if fam == "Sp":
            roots.append(scale(2, e(0)))
            coroots.append(e(0))
        elif fam == "SO_odd":
            roots.append(e(0))
            coroots.append(scale(2, e(0)))
        elif fam == "SO_even":
            roots.append(add(e(0), e(1)))
            coroots.append(add(e(0), e(1)))
        self.simple_roots = tuple(roots)
        self.simple_coroots = tuple(coroots)
        self.rank = len(roots)

        pos = [add(e(j), e(i), -1) for i, j in combinations(range(n), 2)]
        if fam in ("Sp", "SO_odd", "SO_even"):
            pos += [add(e(i), e(j)) for i, j in combinations(range(n), 2)]
        if fam == "Sp":
            pos += [scale(2, e(i)) for i in range(n)]
        elif fam == "SO_odd":
            pos += [e(i) for i in range(n)]
        self.positive_roots = tuple(pos)
        self.rho = tuple(Fraction(sum(r[k] for r in pos), 2) for k in range(n))

        # lattice basis of X_*(T), as columns
        if fam == "SL":
            self.lattice_basis = tuple(add(e(i + 1), e(i), -1) for i in range(n - 1))
        else:
            self.lattice_basis = tuple(e(i) for i in range(n))

        if self.rank:
            R = Matrix(self.simple_roots)
            C = Matrix(self.simple_coroots)
            P = R * C.T
            Q = P.inv()
            Qd = P.T.inv()
            self.fundamental_weights = tuple(as_vector(Q[i, :] * R) for i in range(self.rank))
            self.fundamental_coweights = tuple(as_vector(Qd[i, :] * C) for i in range(self.rank))
        else:
            self.fundamental_weights = ()
            self.fundamental_coweights = ()
        self._setup_pi1()

    # lattice coordinates --------------------------------------------------
    @cached_property
    def _basis_left_inverse(self):
        B = Matrix(self.lattice_basis).T
        return (B.T * B).inv() * B.T, B

    def lattice_coords(self, v) -> tuple:
        """Rational coordinates of ``v`` in the lattice basis; DomainError if outside its span."""
        v = self.check(v)
        L, B = self._basis_left_inverse
        c = L * Matrix([Rational(x.numerator, x.denominator) for x in v])
        if B * c != Matrix([Rational(x.numerator, x.denominator) for x in v]):
            raise DomainError(f"{v} is not in the cocharacter space of {self.group.name}")
        return as_vector(c)

    def from_lattice_coords(self, c) -> tuple:
        return tuple(sum((_frac(ci) * b[k] for ci, b in zip(c, self.lattice_basis)), Fraction(0))
                     for k in range(self.dim))

    def is_integral(self, v) -> bool:
        try:
            return all(x.denominator == 1 for x in self.lattice_coords(v))
        except DomainError:
            return False

    def check(self, v) -> tuple:
        v = as_vector(v)
        if len(v) != self.dim:
            raise DomainError(f"expected a vector of length {self.dim}, got {len(v)}")
        return v

    # fundamental group ------------------------------------------------------
    def _setup_pi1(self):
        r = len(self.lattice_basis)
        if self.rank == 0:
            self._U = Matrix.eye(r)
            self._divisors = ()
            self._free = r
            return
        C = Matrix([list(self.lattice_coords(c)) for c in self.simple_coroots]).T  # r x l
        C = C.applyfunc(lambda x: int(x))
        S, U, _ = smith_normal_decomp(C, domain=ZZ)
        divs = [int(S[i, i]) for i in range(min(S.shape)) if S[i, i] != 0]
        rows = [U[i, :] for i in range(r)]
        for i in range(len(divs), r):
            row = rows[i]
            first = next(x for x in row if x != 0)
            if first < 0:
                rows[i] = -row
        self._U = Matrix.vstack(*rows)
        self._divisors = tuple(divs)
        self._free = r - len(divs)

    @property
    def pi1(self) -> tuple:
        """Invariant factors: ``(torsion orders..., 0 for each free Z)``."""
        return tuple(d for d in self._divisors if d != 1) + (0,) * self._free

    def kappa(self, m) -> tuple:
        """Image of an integral coweight in the fundamental group, as a tuple."""
        c = self.lattice_coords(m)
        if any(x.denominator != 1 for x in c):
            raise DomainError(f"{tuple(str(x) for x in m)} is not an integral coweight")
        y = self._U * Matrix([int(x) for x in c])
        out = []
        for i, d in enumerate(self._divisors):
            if d != 1:
                out.append(int(y[i]) % d)
        out.extend(int(y[i]) for i in range(len(self._divisors), y.rows))
        return tuple(out)

    def kappa_rational(self, v) -> tuple:
        """Free part of the Kottwitz image of a rational coweight (image in pi_1 tensor Q)."""
        c = self.lattice_coords(v)
        y = self._U * Matrix([Rational(x.numerator, x.denominator) for x in c])
        return tuple(_frac(y[i]) for i in range(len(self._divisors), y.rows))

    def kappa_representative(self, kappa) -> tuple:
        """An integral coweight with the given Kottwitz image."""
        kappa = tuple(int(x) for x in kappa)
        tors = [d for d in self._divisors if d != 1]
        if len(kappa) != len(tors) + self._free:
            raise DomainError(f"pi_1 element must have {len(tors) + self._free} components")
        y, k = [], 0
        for d in self._divisors:
            if d == 1:
                y.append(0)
            else:
                y.append(kappa[k] % d)
                k += 1
        y.extend(kappa[k:])
        c = self._U.inv() * Matrix(y)
        return self.from_lattice_coords([int(x) for x in c])

    # pairings and order -------------------------------------------------------
    def pairing(self, w, v) -> Fraction:
        w, v = as_vector(w), as_vector(v)
        if len(w) != self.dim or len(v) != self.dim:
            raise DomainError("pairing length mismatch")
        return sum((a * b for a, b in zip(w, v)), Fraction(0))

    def root_pairings(self, v) -> tuple:
        return tuple(self.pairing(a, v) for a in self.simple_roots)

    def is_dominant(self, v) -> bool:
        return all(x >= 0 for x in self.root_pairings(v))

    def break_points(self, v) -> frozenset:
        """1-based indices ``i`` with ``<alpha_i, v> > 0``."""
        return frozenset(i + 1 for i, x in enumerate(self.root_pairings(v)) if x > 0)

    def dominant_sort(self, v) -> tuple:
        v = self.check(v)
        fam = self.group.family
        if fam in ("GL", "SL"):
            return tuple(sorted(v))
        a = sorted(abs(x) for x in v)
        if fam == "SO_even" and sum(1 for x in v if x < 0) % 2 and a[0] != 0:
            a[0] = -a[0]
        return tuple(a)

    def coroot_coefficients(self, d) -> tuple | None:
        """Coefficients of ``d`` in the simple coroots, or None if ``d`` is outside their span."""
        d = self.check(d)
        c = tuple(self.pairing(w, d) for w in self.fundamental_weights)
        back = tuple(sum((ci * a[k] for ci, a in zip(c, self.simple_coroots)), Fraction(0))
                     for k in range(self.dim))
        return c if back == d else None

    def leq_dominance(self, a, b, integral: bool = False) -> bool:
        """``a <= b``: ``b - a`` is a non-negative (integral) combination of positive coroots."""
        a, b = self.check(a), self.check(b)
        if not (self.is_dominant(a) and self.is_dominant(b)):
            raise DomainError("dominance order is only defined on dominant coweights")
        c = self.coroot_coefficients(tuple(y - x for x, y in zip(a, b)))
        if c is None or any(x < 0 for x in c):
            return False
        return not integral or all(x.denominator == 1 for x in c)

    def deformation_dimension(self, m) -> int:
        m = self.check(m)
        if not self.is_dominant(m):
            raise DomainError("deformation dimension needs a dominant coweight")
        return int(2 * self.pairing(self.rho, m))

    # Levi projections -------------------------------------------------------
    @lru_cache(maxsize=None)
    def _levi_projector(self, levi: frozenset):
        """Orthogonal projection killing the coroots indexed by ``levi`` (1-based)."""
        if not levi:
            return Matrix.eye(self.dim)
        C = Matrix([self.simple_coroots[i - 1] for i in sorted(levi)]).T
        return Matrix.eye(self.dim) - C * (C.T * C).inv() * C.T

    def levi_projection(self, v, levi) -> tuple:
        P = self._levi_projector(frozenset(levi))
        return as_vector(P * Matrix([Rational(x.numerator, x.denominator) for x in as_vector(v)]))

    def central_projection(self, v) -> tuple:
        """Projection onto the center: the basic Newton point of the class of ``v``."""
        return self.levi_projection(v, range(1, self.rank + 1))

    def __eq__(self, other):
        return isinstance(other, RootDatum) and other.group == self.group

    def __hash__(self):
        return hash(self.group)

    def __repr__(self):
        return f"RootDatum({self.group.name})"


@lru_cache(maxsize=None)
def build_root_datum(group) -> RootDatum:
    if isinstance(group, str):
        group = GroupType.parse(group)
    return RootDatum(group)


def pairing(datum: RootDatum, w, v) -> Fraction:
    return datum.pairing(w, v)


def kottwitz_class(datum: RootDatum, m) -> tuple:
    return datum.kappa(m)


def dominant_sort(datum: RootDatum, v) -> tuple:
    return datum.dominant_sort(v)


def leq_dominance(datum: RootDatum, a, b, integral: bool = False) -> bool:
    return datum.leq_dominance(a, b, integral)


def deformation_dimension(datum: RootDatum, m) -> int:
    return datum.deformation_dimension(m)


def format_vector(v) -> str:
    return "(" + ",".join(str(x) for x in as_vector(v)) + ")"


ceil_frac = _ceil
floor_frac = _floor
