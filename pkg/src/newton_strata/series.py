"""Truncated Laurent series over small finite fields.

A :class:`TruncatedSeries` is an element of k((z)) known on the exponent
window ``[min_exp, prec)``.  ``prec=None`` marks an exact Laurent polynomial.
Every operation returns the precision that honestly survives it; asking for
information beyond that raises :class:`PrecisionExhausted`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PrecisionExhausted
from .fields import FFElem, FiniteField

DEFAULT_WINDOW = 64
ENV_MAX_WINDOW = "NEWTON_STRATA_MAX_WINDOW"


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _add_prec(p, shift):
    return None if p is None else p + shift


@dataclass(frozen=True)
class Precision:
    """Working-window policy: start at ``window``, multiply by ``escalation_factor`` up to ``max_window``."""

    window: int = DEFAULT_WINDOW
    escalation_factor: int = 2
    max_window: int = 1024

    def __post_init__(self):
        if not 0 < self.window <= self.max_window:
            raise DomainError(f"need 0 < window <= max_window, got {self.window}, {self.max_window}")
        if self.escalation_factor < 2:
            raise DomainError("escalation_factor must be at least 2")

    @classmethod
    def from_env(cls, window: int = DEFAULT_WINDOW, max_window: int | None = None) -> Precision:
        if max_window is None:
            max_window = int(os.environ.get(ENV_MAX_WINDOW, 1024))
        return cls(min(window, max_window), 2, max_window)

    def escalate(self) -> Precision:
        if self.window >= self.max_window:
            raise PrecisionExhausted(f"precision window {self.window} already at its cap")
        return Precision(min(self.window * self.escalation_factor, self.max_window),
                         self.escalation_factor, self.max_window)

    def run(self, fn):
        """Call ``fn(window)``, escalating the window on PrecisionExhausted."""
        policy = self
        while True:
            try:
                return fn(policy.window)
            except PrecisionExhausted:
                policy = policy.escalate()


class TruncatedSeries:
    """An element of k((z)) on a finite exponent window.

    ``coeffs`` is an integer array of shape ``(L, e)``: row ``i`` holds the
    polynomial-basis coordinates of the coefficient of ``z**(min_exp + i)``.
    Coefficients between ``min_exp + L`` and ``prec`` are known zeros.  The
    zero series is canonical: empty coefficients and ``min_exp == prec``
    (``min_exp == 0`` for the exact zero).
    """

    __slots__ = ("field", "min_exp", "coeffs", "prec")

    def __init__(self, field: FiniteField, min_exp: int, coeffs, prec: int | None = None):
        arr = np.asarray(coeffs, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, field.e) if field.e > 1 and arr.size % field.e == 0 and arr.size else arr[:, None]
        if arr.size == 0:
            arr = np.zeros((0, field.e), dtype=np.int64)
        if arr.shape[1] != field.e:
            raise DomainError(f"coefficient rows must have {field.e} coordinates")
        arr = arr % field.p
        if prec is not None and prec <= min_exp + arr.shape[0] - 1:
            arr = arr[:max(prec - min_exp, 0)]
        nz = np.flatnonzero(arr.any(axis=1))
        if nz.size == 0:
            self.field = field
            self.coeffs = np.zeros((0, field.e), dtype=np.int64)
            self.prec = prec
            self.min_exp = 0 if prec is None else prec
            return
        self.field = field
        self.min_exp = int(min_exp + nz[0])
        self.coeffs = arr[nz[0]:nz[-1] + 1]
        self.prec = prec
        if prec is not None and prec <= self.min_exp:  # pragma: no cover - guarded above
            raise PrecisionExhausted("empty precision window")

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, field, prec=None):
        return cls(field, 0 if prec is None else prec, [], prec)

    @classmethod
    def one(cls, field):
        return cls.monomial(field, 0)

    @classmethod
    def monomial(cls, field, exp: int, c: int = 1, prec=None):
        """``c * z**exp`` with ``c`` an integer-encoded field element."""
        return cls(field, exp, field.from_ints([c]), prec)

    @classmethod
    def from_ints(cls, field, values, min_exp: int = 0, prec=None):
        """Build from a list of integer-encoded coefficients starting at ``min_exp``."""
        if len(values) == 0:
            return cls(field, min_exp if prec is None else prec, [], prec)
        return cls(field, min_exp, field.from_ints(values), prec)

    @classmethod
    def from_terms(cls, field, terms, prec=None):
        """Build from ``{exponent: coordinate tuple or int}``."""
        if not terms:
            return cls.zero(field, prec)
        lo, hi = min(terms), max(terms)
        arr = np.zeros((hi - lo + 1, field.e), dtype=np.int64)
        for k, c in terms.items():
            arr[k - lo] = field.coords(c) if isinstance(c, (int, np.integer)) else c
        return cls(field, lo, arr, prec)

    # basic queries --------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        """True when no nonzero coefficient is known (exact zero or O(z^prec))."""
        return self.coeffs.shape[0] == 0

    def valuation(self) -> int:
        if self.coeffs.shape[0] == 0:
            if self.prec is None:
                raise DomainError("valuation of the exact zero series")
            raise PrecisionExhausted(f"series is O(z^{self.prec}); valuation unknown")
        return self.min_exp

    def val_lower_bound(self) -> float:
        """The valuation if known, else the precision (a lower bound); inf for exact zero."""
        if self.coeffs.shape[0]:
            return self.min_exp
        return float("inf") if self.prec is None else self.prec

    def degree(self) -> int:
        """Largest exponent carrying a stored coefficient."""
        return self.min_exp + self.coeffs.shape[0] - 1

    def coefficient(self, k: int) -> FFElem:
        if self.prec is not None and k >= self.prec:
            raise PrecisionExhausted(f"coefficient of z^{k} beyond precision {self.prec}")
        i = k - self.min_exp
        if self.coeffs.shape[0] == 0 or i < 0 or i >= self.coeffs.shape[0]:
            return FFElem(self.field, (0,) * self.field.e)
        return FFElem(self.field, tuple(int(c) for c in self.coeffs[i]))

    def coefficient_int(self, k: int) -> int:
        i = k - self.min_exp
        if self.coeffs.shape[0] == 0 or i < 0 or i >= self.coeffs.shape[0]:
            return 0
        return int(self.field.to_ints(self.coeffs[i:i + 1])[0])

    def terms(self) -> dict:
        """Nonzero coefficients as ``{exponent: coordinate tuple}``."""
        return {self.min_exp + i: tuple(int(c) for c in row)
                for i, row in enumerate(self.coeffs) if row.any()}

    # arithmetic -------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            raise DomainError(f"expected a TruncatedSeries, got {type(other).__name__}")
        if other.field != self.field:
            raise DomainError("series over different fields")

    def __add__(self, other):
        self._check(other)
        prec = _min_prec(self.prec, other.prec)
        if other.is_zero():
            return self if prec == self.prec else self.truncate(prec)
        if self.is_zero():
            return other if prec == other.prec else other.truncate(prec)
        lo = min(self.min_exp, other.min_exp)
        hi = max(self.degree(), other.degree()) + 1
        arr = np.zeros((hi - lo, self.field.e), dtype=np.int64)
        arr[self.min_exp - lo:self.min_exp - lo + self.coeffs.shape[0]] += self.coeffs
        arr[other.min_exp - lo:other.min_exp - lo + other.coeffs.shape[0]] += other.coeffs
        return TruncatedSeries(self.field, lo, arr, prec)

    def __neg__(self):
        return TruncatedSeries(self.field, self.min_exp, -self.coeffs, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FFElem):
            return self.scale(other.value)
        self._check(other)
        if (self.is_zero() and self.prec is None) or (other.is_zero() and other.prec is None):
            return TruncatedSeries.zero(self.field)
        prec = _min_prec(_add_prec(self.prec, other.min_exp), _add_prec(other.prec, self.min_exp))
        if self.is_zero() or other.is_zero():
            return TruncatedSeries.zero(self.field, prec)
        arr = self.field.convolve(self.coeffs, other.coeffs)
        return TruncatedSeries(self.field, self.min_exp + other.min_exp, arr, prec)

    def scale(self, c: int):
        """Multiply by the integer-encoded field element ``c``."""
        if c == 0:
            return TruncatedSeries.zero(self.field, None)
        return TruncatedSeries(self.field, self.min_exp, self.field.scale(self.coeffs, c), self.prec)

    def shift(self, k: int):
        """Multiply by ``z**k``."""
        if self.is_zero():
            return TruncatedSeries.zero(self.field, _add_prec(self.prec, k))
        return TruncatedSeries(self.field, self.min_exp + k, self.coeffs, _add_prec(self.prec, k))

    def truncate(self, prec: int | None):
        """Forget everything at exponents >= ``prec`` (never raises precision)."""
        prec = _min_prec(self.prec, prec)
        if prec == self.prec:
            return self
        return TruncatedSeries(self.field, self.min_exp if self.coeffs.shape[0] else prec, self.coeffs, prec)

    def inverse(self, window: int | None = None):
        """Multiplicative inverse, known to relative precision ``window``.

        For an inexact input the relative precision is also capped by the
        input's own ``prec - valuation``.
        """
        if self.is_zero():
            if self.prec is None:
                raise DomainError("inverse of the exact zero series")
            raise PrecisionExhausted(f"cannot invert O(z^{self.prec})")
        v = self.min_exp
        if self.prec is None and self.coeffs.shape[0] == 1:
            c = int(self.field.to_ints(self.coeffs)[0])
            return TruncatedSeries.monomial(self.field, -v, self.field.inv(c))
        rel = None if self.prec is None else self.prec - v
        if window is not None:
            rel = window if rel is None else min(rel, window)
        if rel is None:
            rel = DEFAULT_WINDOW
        unit = self.coeffs[:rel]
        f = self.field
        c0 = int(f.to_ints(unit[:1])[0])
        inv = f.from_ints([f.inv(c0)])
        known = 1
        while known < rel:
            known = min(2 * known, rel)
            # inv <- inv + inv * (1 - unit * inv)  mod z^known
            r = (-f.convolve(unit[:known], inv)[:known]) % f.p
            r[0, 0] = (r[0, 0] + 1) % f.p
            inv = np.pad(inv, ((0, known - inv.shape[0]), (0, 0)))
            inv = (inv + f.convolve(inv, r)[:known]) % f.p
        return TruncatedSeries(f, -v, inv[:rel], rel - v)

    def frobenius(self, power: int = 1):
        """Apply sigma coefficientwise (z is fixed)."""
        if self.is_zero():
            return self
        return TruncatedSeries(self.field, self.min_exp, self.field.frob_array(self.coeffs, power), self.prec)

    def embed(self, target: FiniteField):
        """Push coefficients into an extension field."""
        if target == self.field:
            return self
        if self.is_zero():
            return TruncatedSeries.zero(target, self.prec)
        return TruncatedSeries(target, self.min_exp, self.field.embed_array(self.coeffs, target), self.prec)

    # comparisons ------------------------------------------------------------
    def agrees(self, other) -> bool:
        """True when the two series coincide on their common precision window."""
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.field == other.field and self.prec == other.prec and self.min_exp == other.min_exp
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.field.key, self.prec, self.min_exp, self.coeffs.tobytes()))

    def __repr__(self):
        parts = []
        for k, c in self.terms().items():
            cs = str(FFElem(self.field, c)) if self.field.e > 1 else str(c[0])
            if self.field.e > 1 and "+" in cs:
                cs = f"({cs})"
            mon = "" if k == 0 else "z" if k == 1 else f"z^{k}"
            if cs == "1" and mon:
                parts.append(mon)
            else:
                parts.append(cs + ("*" + mon if mon else ""))
        body = " + ".join(parts) if parts else "0"
        return body if self.prec is None else f"{body} + O(z^{self.prec})"


def ls_arith(a: TruncatedSeries, b: TruncatedSeries | None, op: str, window: int | None = None):
    """Dispatch ``op`` in {add, mul, inv, val}."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse(window)
    if op == "val":
        return a.valuation()
    raise DomainError(f"unknown series operation {op!r}")


def ls_frobenius(a: TruncatedSeries, power: int = 1) -> TruncatedSeries:
    return a.frobenius(power)
