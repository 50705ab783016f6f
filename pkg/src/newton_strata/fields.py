"""Small finite fields F_{p^e} with a fixed, reproducible modulus.

Elements are encoded as integers ``sum(c_i * p**i)`` over the polynomial
basis ``1, x, ..., x^(e-1)``.  The modulus of ``F_{p^e}`` is the first monic
primitive polynomial of degree ``e`` when the candidates
``x^e + c_{e-1} x^(e-1) + ... + c_0`` are ordered by the integer
``sum(c_i * p**i)``.  That rule is the portable "modulus table": for example
F_4 = F_2[x]/(x^2+x+1), F_8 = F_2[x]/(x^3+x+1), F_9 = F_3[x]/(x^2+x+2).

A field also remembers the base field F_q (``q = p**base_degree``) over which
its Frobenius ``sigma: a -> a**q`` is taken.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MAX_FIELD_SIZE = 1 << 16


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Split ``q = p**f``; raise DomainError when q is not a prime power."""
    if q < 2:
        raise DomainError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    f, r = 0, q
    while r % p == 0:
        r //= p
        f += 1
    if r != 1:
        raise DomainError(f"{q} is not a prime power")
    return p, f


def _mul_by_x(coords, modulus, p):
    top = coords[-1]
    out = [0] + coords[:-1]
    if top:
        out = [(c - top * f) % p for c, f in zip(out, modulus)]
    return out


def _powers_of_x(modulus, p, e):
    """Return the list of x^k (as coordinate lists) for k < p^e - 1, or None if x is not primitive."""
    order = p**e - 1
    one = [1] + [0] * (e - 1)
    if e == 1:
        # x is the root of x + c_0, i.e. the scalar -c_0
        g = (-modulus[0]) % p
        out, cur = [], 1
        for k in range(order):
            if k and cur == 1:
                return None
            out.append([cur])
            cur = cur * g % p
        return out if cur == 1 else None
    out, cur = [], one
    for k in range(order):
        if k and cur == one:
            return None
        out.append(cur)
        cur = _mul_by_x(cur, modulus, p)
    return out if cur == one else None


@functools.lru_cache(maxsize=None)
def _primitive_modulus(p: int, e: int):
    for code in range(p**e):
        low = [(code // p**i) % p for i in range(e)]
        if low[0] == 0:
            continue
        if _powers_of_x(low, p, e) is not None:
            return tuple(low) + (1,)
    raise DomainError(f"no primitive polynomial found for F_{p}^{e}")  # pragma: no cover


class FiniteField:
    """The field F_{p^e}, with Frobenius taken over F_{p^base_degree}.

    Use :func:`finite_field` to obtain instances; they are cached so that two
    fields with the same parameters are the same object.
    """

    def __init__(self, p: int, e: int = 1, base_degree: int = 1):
        if not is_prime(p):
            raise DomainError(f"characteristic {p} is not prime")
        if e < 1 or base_degree < 1 or e % base_degree:
            raise DomainError(f"need 1 <= base_degree | e, got e={e}, base_degree={base_degree}")
        if p**e > MAX_FIELD_SIZE:
            raise DomainError(f"field size {p}^{e} exceeds {MAX_FIELD_SIZE}")
        self.p = p
        self.e = e
        self.base_degree = base_degree
        self.size = p**e
        self.base_q = p**base_degree
        self.sigma_order = e // base_degree
        self.modulus = _primitive_modulus(p, e)

        powers = _powers_of_x(list(self.modulus[:-1]), p, e)
        self._weights = p ** np.arange(e, dtype=np.int64)
        digits = np.zeros((self.size, e), dtype=np.int64)
        for v in range(self.size):
            for i in range(e):
                digits[v, i] = (v // p**i) % p
        self._digits = digits
        self._exp = [int(sum(c * p**i for i, c in enumerate(cs))) for cs in powers]
        log = [-1] * self.size
        for k, v in enumerate(self._exp):
            log[v] = k
        self._log = log
        self._frob_mats = {}
        self._lower = np.array(self.modulus[:-1], dtype=np.int64)

    # identity -----------------------------------------------------------
    @property
    def key(self):
        return (self.p, self.e, self.base_degree)

    def __eq__(self, other):
        return isinstance(other, FiniteField) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"FiniteField(p={self.p}, e={self.e}, base_q={self.base_q})"

    # scalar arithmetic on integer encodings ------------------------------
    def coords(self, v: int) -> tuple:
        return tuple(int(c) for c in self._digits[v])

    def encode(self, coords) -> int:
        coords = list(coords)
        if len(coords) != self.e or any(not 0 <= c < self.p for c in coords):
            raise DomainError(f"bad coordinates {coords} for {self!r}")
        return int(sum(c * self.p**i for i, c in enumerate(coords)))

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        d = (self._digits[a] + self._digits[b]) % self.p
        return int(d @ self._weights)

    def neg(self, a: int) -> int:
        return int((-self._digits[a]) % self.p @ self._weights)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.size - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("division by zero in finite field")
        return self._exp[(-self._log[a]) % (self.size - 1)]

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            if k <= 0:
                raise DomainError("0 has no non-positive powers")
            return 0
        return self._exp[(self._log[a] * k) % (self.size - 1)]

    def frob(self, a: int, power: int = 1) -> int:
        """sigma^power(a) with sigma(a) = a^q, q the base field size."""
        if a == 0:
            return 0
        return self._exp[(self._log[a] * pow(self.base_q, power % self.sigma_order, self.size - 1)) % (self.size - 1)]

    def generator(self) -> int:
        return self._exp[1 % (self.size - 1)] if self.size > 2 else 1

    def elements(self):
        return range(self.size)

    def in_base_field(self, a: int) -> bool:
        return self.frob(a) == a

    # vectorized arithmetic on coordinate arrays of shape (L, e) ----------
    def to_ints(self, arr: np.ndarray) -> np.ndarray:
        return arr @ self._weights

    def from_ints(self, values) -> np.ndarray:
        return self._digits[np.asarray(values, dtype=np.int64)].copy()

    def reduce_poly(self, arr: np.ndarray) -> np.ndarray:
        """Reduce an (L, k) array of x-polynomials modulo the modulus and p."""
        e = self.e
        arr = arr % self.p
        for k in range(arr.shape[1] - 1, e - 1, -1):
            col = arr[:, k]
            if col.any():
                arr[:, k - e:k] -= col[:, None] * self._lower[None, :]
                arr[:, k - e:k] %= self.p
        return arr[:, :e] % self.p

    def convolve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product of two coefficient arrays viewed as polynomials in z."""
        if self.e == 1:
            return (np.convolve(a[:, 0], b[:, 0]) % self.p)[:, None]
        la, lb, e = a.shape[0], b.shape[0], self.e
        out = np.zeros((la + lb - 1, 2 * e - 1), dtype=np.int64)
        for i in range(e):
            ai = a[:, i]
            if not ai.any():
                continue
            for j in range(e):
                bj = b[:, j]
                if bj.any():
                    out[:, i + j] += np.convolve(ai, bj)
        return self.reduce_poly(out)

    def mult_matrix(self, c: int) -> np.ndarray:
        """The F_p-linear map 'multiply by c' on coordinates (column convention)."""
        cols = [self._digits[self.mul(c, self.p**j)] for j in range(self.e)]
        return np.array(cols, dtype=np.int64).T

    def scale(self, arr: np.ndarray, c: int) -> np.ndarray:
        if self.e == 1:
            return arr * c % self.p
        return arr @ self.mult_matrix(c).T % self.p

    def frob_matrix(self, power: int = 1) -> np.ndarray:
        power %= self.sigma_order
        mat = self._frob_mats.get(power)
        if mat is None:
            cols = [self._digits[self.frob(self.p**j, power)] for j in range(self.e)]
            mat = np.array(cols, dtype=np.int64).T
            self._frob_mats[power] = mat
        return mat

    def frob_array(self, arr: np.ndarray, power: int = 1) -> np.ndarray:
        if self.sigma_order == 1 or power % self.sigma_order == 0:
            return arr
        return arr @ self.frob_matrix(power).T % self.p

    # embeddings ----------------------------------------------------------
    def extension(self, degree: int) -> FiniteField:
        """The field F_{p^(e*degree)} with the same Frobenius base."""
        return finite_field(self.p, self.e * degree, self.base_degree)

    @functools.lru_cache(maxsize=None)
    def embedding_matrix(self, target: FiniteField) -> np.ndarray:
        """Return Y with ``coords_target = coords_self @ Y`` realizing a field embedding."""
        if target.p != self.p or target.e % self.e or target.base_degree != self.base_degree:
            raise DomainError(f"cannot embed {self!r} into {target!r}")
        if target == self:
            return np.eye(self.e, dtype=np.int64)
        if self.e == 1:
            y = np.zeros((1, target.e), dtype=np.int64)
            y[0, 0] = 1
            return y
        step = (target.size - 1) // (self.size - 1)
        for k in range(1, self.size - 1):
            root = target._exp[(k * step) % (target.size - 1)]
            acc = 0
            for c in reversed(self.modulus):
                acc = target.add(target.mul(acc, root), c)
            if acc == 0:
                rows = [target._digits[target.pow(root, j)] for j in range(self.e)]
                return np.array(rows, dtype=np.int64)
        raise DomainError(f"no root of the modulus of {self!r} in {target!r}")  # pragma: no cover

    def embed_array(self, arr: np.ndarray, target: FiniteField) -> np.ndarray:
        if target == self:
            return arr
        return arr @ self.embedding_matrix(target) % self.p

    def embed(self, a: int, target: FiniteField) -> int:
        row = self.embed_array(self._digits[a][None, :], target)
        return int(target.to_ints(row)[0])


@functools.lru_cache(maxsize=None)
def finite_field(p: int, e: int = 1, base_degree: int = 1) -> FiniteField:
    """Cached constructor for :class:`FiniteField`."""
    return FiniteField(p, e, base_degree)


def field_for(q: int, degree: int = 1) -> FiniteField:
    """The field F_{q^degree} with Frobenius over F_q."""
    p, f = prime_power(q)
    return finite_field(p, f * degree, f)


@dataclass(frozen=True)
class FFElem:
    """An element of a :class:`FiniteField` given by its polynomial-basis coordinates."""

    field: FiniteField
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != self.field.e or any(not 0 <= c < self.field.p for c in coeffs):
            raise DomainError(f"coordinates {coeffs} invalid for {self.field!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_int(cls, field, value):
        return cls(field, field.coords(value))

    @property
    def value(self) -> int:
        return self.field.encode(self.coeffs)

    def _check(self, other):
        if not isinstance(other, FFElem) or other.field != self.field:
            raise DomainError("operands live in different fields")

    def __add__(self, other):
        self._check(other)
        return FFElem.from_int(self.field, self.field.add(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return FFElem.from_int(self.field, self.field.sub(self.value, other.value))

    def __neg__(self):
        return FFElem.from_int(self.field, self.field.neg(self.value))

    def __mul__(self, other):
        self._check(other)
        return FFElem.from_int(self.field, self.field.mul(self.value, other.value))

    def inverse(self):
        return FFElem.from_int(self.field, self.field.inv(self.value))

    def __truediv__(self, other):
        return self * other.inverse()

    def frob(self, power: int = 1):
        return FFElem.from_int(self.field, self.field.frob(self.value, power))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self):
        terms = [("" if c == 1 and i else str(c)) + ("" if i == 0 else "x" if i == 1 else f"x^{i}")
                 for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"


def ff_arith(a: FFElem, b: FFElem | None, op: str) -> FFElem:
    """Dispatch ``op`` in {add, mul, inv, frob}; ``b`` is ignored by the unary ops."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "frob":
        return a.frob()
    raise DomainError(f"unknown field operation {op!r}")
