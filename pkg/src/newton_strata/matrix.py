"""Square matrices over truncated Laurent series.

Matrices act on column vectors.  All minors are computed by memoized
Laplace expansion, so nothing here ever divides: determinants, exterior
powers and determinantal divisors of exact inputs stay exact.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import DomainError, PrecisionExhausted
from .fields import FiniteField
from .series import TruncatedSeries, _min_prec


class SeriesMatrix:
    """An n x n matrix of :class:`TruncatedSeries` over one field."""

    __slots__ = ("entries", "n", "field", "_minors")

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DomainError("SeriesMatrix needs a non-empty square array")
        field = rows[0][0].field
        for r in rows:
            for x in r:
                if not isinstance(x, TruncatedSeries):
                    raise DomainError("entries must be TruncatedSeries")
                if x.field != field:
                    raise DomainError("entries over different fields")
        self.entries = rows
        self.n = n
        self.field = field
        self._minors = {}

    # constructors ---------------------------------------------------------
    @classmethod
    def from_terms(cls, field: FiniteField, rows, prec=None):
        """Entries given as ``{exp: int or coords}`` dicts, or plain ints for constants."""
        def conv(x):
            if isinstance(x, TruncatedSeries):
                return x
            if isinstance(x, dict):
                return TruncatedSeries.from_terms(field, x, prec)
            return TruncatedSeries.from_terms(field, {0: int(x)} if x else {}, prec)
        return cls([[conv(x) for x in r] for r in rows])

    @classmethod
    def identity(cls, field, n):
        return cls.diagonal_monomials(field, [0] * n)

    @classmethod
    def zero(cls, field, n):
        z = TruncatedSeries.zero(field)
        return cls([[z] * n for _ in range(n)])

    @classmethod
    def diagonal(cls, entries):
        entries = list(entries)
        field = entries[0].field
        z = TruncatedSeries.zero(field)
        return cls([[entries[i] if i == j else z for j in range(len(entries))]
                    for i in range(len(entries))])

    @classmethod
    def diagonal_monomials(cls, field, exps):
        """``diag(z**e_1, ..., z**e_n)``."""
        return cls.diagonal([TruncatedSeries.monomial(field, int(e)) for e in exps])

    @classmethod
    def from_columns(cls, columns):
        n = len(columns)
        return cls([[columns[j][i] for j in range(n)] for i in range(n)])

    # queries ----------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def prec(self):
        """Smallest entry precision (None when every entry is exact)."""
        p = None
        for r in self.entries:
            for x in r:
                p = _min_prec(p, x.prec)
        return p

    @property
    def is_exact(self) -> bool:
        return all(x.prec is None for r in self.entries for x in r)

    def column(self, j):
        return [self.entries[i][j] for i in range(self.n)]

    def submatrix(self, rows, cols):
        return SeriesMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def val_lower_bound(self):
        """Lower bound for the minimum entry valuation (inf for the zero matrix)."""
        return min(x.val_lower_bound() for r in self.entries for x in r)

    def min_valuation(self) -> int:
        """Certified minimum entry valuation."""
        known = [x.min_exp for r in self.entries for x in r if not x.is_zero()]
        bound = self.val_lower_bound()
        if not known or min(known) > bound:
            raise PrecisionExhausted("minimum entry valuation is not determined at this precision")
        return min(known)

    def is_integral(self) -> bool:
        """All entries in k[[z]] (inexact zeros count as integral if prec >= 0)."""
        return self.val_lower_bound() >= 0

    # arithmetic -------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, SeriesMatrix):
            raise DomainError(f"expected SeriesMatrix, got {type(other).__name__}")
        if other.n != self.n or other.field != self.field:
            raise DomainError("matrix size or field mismatch")

    def __add__(self, other):
        self._check(other)
        return SeriesMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return SeriesMatrix([[-a for a in r] for r in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        self._check(other)
        n = self.n
        zero = TruncatedSeries.zero(self.field)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero
                for k in range(n):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if (a.is_zero() and a.prec is None) or (b.is_zero() and b.prec is None):
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    __mul__ = __matmul__

    def scale(self, s: TruncatedSeries):
        return SeriesMatrix([[s * a for a in r] for r in self.entries])

    def shift(self, k: int):
        """Multiply by the central element ``z**k``."""
        return SeriesMatrix([[a.shift(k) for a in r] for r in self.entries])

    def frobenius(self, power: int = 1):
        return SeriesMatrix([[a.frobenius(power) for a in r] for r in self.entries])

    def embed(self, target: FiniteField):
        return SeriesMatrix([[a.embed(target) for a in r] for r in self.entries])

    def truncate(self, prec):
        return SeriesMatrix([[a.truncate(prec) for a in r] for r in self.entries])

    def transpose(self):
        return SeriesMatrix([list(c) for c in zip(*self.entries)])

    def power(self, k: int):
        out = SeriesMatrix.identity(self.field, self.n)
        for _ in range(k):
            out = out @ self
        return out

    # minors -----------------------------------------------------------------
    def minor(self, rows, cols) -> TruncatedSeries:
        """Determinant of the submatrix on ``rows`` x ``cols`` (sorted index tuples)."""
        rows, cols = tuple(rows), tuple(cols)
        key = (rows, cols)
        hit = self._minors.get(key)
        if hit is not None:
            return hit
        if len(rows) != len(cols):
            raise DomainError("minor needs as many rows as columns")
        if not rows:
            val = TruncatedSeries.one(self.field)
        elif len(rows) == 1:
            val = self.entries[rows[0]][cols[0]]
        else:
            val = TruncatedSeries.zero(self.field)
            r0, rest = rows[0], rows[1:]
            for idx, c in enumerate(cols):
                a = self.entries[r0][c]
                if a.is_zero() and a.prec is None:
                    continue
                term = a * self.minor(rest, cols[:idx] + cols[idx + 1:])
                val = val - term if idx % 2 else val + term
        self._minors[key] = val
        return val

    def det(self) -> TruncatedSeries:
        idx = tuple(range(self.n))
        return self.minor(idx, idx)

    def minors_of_size(self, k: int):
        """All k x k minors, keyed by (rows, cols) in lexicographic order."""
        subsets = list(combinations(range(self.n), k))
        return {(r, c): self.minor(r, c) for r in subsets for c in subsets}

    def principal_minor_sums(self):
        """``e_k`` = sum of principal k x k minors, for k = 0..n."""
        out = []
        for k in range(self.n + 1):
            acc = TruncatedSeries.zero(self.field)
            for s in combinations(range(self.n), k):
                acc = acc + self.minor(s, s)
            out.append(acc)
        return out

    def charpoly(self):
        """Coefficients ``a_k`` of ``det(x - M) = sum_k a_k x^(n-k)``; ``a_0 = 1``."""
        sums = self.principal_minor_sums()
        return [s if k % 2 == 0 else -s for k, s in enumerate(sums)]

    def exterior_power(self, m: int):
        """Matrix of m x m minors in the lexicographic basis of m-subsets."""
        if not 1 <= m <= self.n:
            raise DomainError(f"exterior power degree must lie in [1, {self.n}]")
        subsets = list(combinations(range(self.n), m))
        return SeriesMatrix([[self.minor(r, c) for c in subsets] for r in subsets])

    def adjugate(self):
        n = self.n
        full = tuple(range(n))
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                # adj[i][j] = (-1)^(i+j) det(M without row j, column i)
                m = self.minor(full[:j] + full[j + 1:], full[:i] + full[i + 1:])
                row.append(-m if (i + j) % 2 else m)
            rows.append(row)
        return SeriesMatrix(rows)

    def inverse(self, window: int | None = None):
        """Inverse over k((z)); exact when the determinant is a monomial of an exact matrix."""
        if self.n == 1:
            return SeriesMatrix([[self.entries[0][0].inverse(window)]])
        return self.adjugate().scale(self.det().inverse(window))

    # comparisons ------------------------------------------------------------
    def agrees(self, other) -> bool:
        self._check(other)
        return all(a.agrees(b) for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def to_terms(self):
        """Nested lists of ``{exp: coords}`` dicts (for tests and serialization)."""
        return [[x.terms() for x in r] for r in self.entries]

    def __repr__(self):
        body = ",\n ".join("[" + ", ".join(repr(x) for x in r) + "]" for r in self.entries)
        return f"SeriesMatrix([{body}])"


def unit_column_index(col) -> int | None:
    """Index of an entry of valuation exactly zero, if any."""
    for i, x in enumerate(col):
        if not x.is_zero() and x.min_exp == 0 and x.val_lower_bound() == 0:
            return i
    return None


def elementary(field, n, i, j, s: TruncatedSeries):
    """``1 + s E_ij`` (i != j); its inverse is ``1 - s E_ij``."""
    if i == j:
        raise DomainError("elementary matrix needs i != j")
    one, zero = TruncatedSeries.one(field), TruncatedSeries.zero(field)
    return SeriesMatrix([[one if a == b else s if (a, b) == (i, j) else zero for b in range(n)]
                         for a in range(n)])


def permutation_matrix(field, perm, powers=None):
    """Matrix with ``z**powers[i]`` at (perm[i], i)."""
    n = len(perm)
    powers = powers or [0] * n
    zero = TruncatedSeries.zero(field)
    rows = [[zero] * n for _ in range(n)]
    for i, (r, k) in enumerate(zip(perm, powers)):
        rows[r][i] = TruncatedSeries.monomial(field, int(k))
    return SeriesMatrix(rows)


def constant_matrix(field, arr):
    """Lift an integer-encoded n x n array over the field to constant series."""
    arr = np.asarray(arr)
    return SeriesMatrix([[TruncatedSeries.monomial(field, 0, int(c)) if c else TruncatedSeries.zero(field)
                          for c in r] for r in arr])
