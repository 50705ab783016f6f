"""Newton points below a bound, with Chai's length function.

A rational dominant coweight ``nu`` with Kottwitz class ``kappa`` is a Newton
point iff it is the central average, in the centralizer Levi ``M`` of ``nu``,
of some integral coweight ``lambda`` of class ``kappa``.  Writing
``lambda = lambda_0 + sum_j n_j alpha_j^vee`` and projecting to the center of
``M`` (which kills the coroots of ``M``) turns this into a finite test:

    c_j = <omega_j, nu - lambda_0> is an integer for every break point j, and
    nu == pr_M(lambda_0) + sum_{j in J} c_j pr_M(alpha_j^vee).

Enumeration runs the same parametrization forwards: for each candidate break
set ``J`` the integers ``c_j`` range over a box cut out by the basic point
from below and the bound from above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import networkx as nx

from .errors import DomainError, InternalError
from .rootdatum import RootDatum, as_vector, ceil_frac, floor_frac, format_vector


def _as_kappa(kappa) -> tuple:
    if isinstance(kappa, (int,)):
        return (kappa,)
    return tuple(int(x) for x in kappa)


@dataclass(frozen=True)
class NewtonPoint:
    """A dominant rational coweight together with its Kottwitz class."""

    datum: RootDatum = field(compare=False, repr=False)
    point: tuple
    kappa: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", self.datum.check(self.point))
        object.__setattr__(self, "kappa", _as_kappa(self.kappa))
        if not self.datum.is_dominant(self.point):
            raise DomainError(f"{format_vector(self.point)} is not dominant")
        if not is_newton_point(self.datum, self.point, self.kappa):
            raise DomainError(f"{format_vector(self.point)} is not a Newton point of class {self.kappa}")

    @property
    def group(self):
        return self.datum.group

    def __str__(self):
        return format_vector(self.point)

    def __hash__(self):
        return hash((self.datum.group, self.point, self.kappa))

    def __eq__(self, other):
        return (isinstance(other, NewtonPoint) and self.datum.group == other.datum.group
                and self.point == other.point and self.kappa == other.kappa)


def infer_kappa(datum: RootDatum, v) -> tuple:
    """Kottwitz class of ``v`` when it is determined by ``v`` alone."""
    v = as_vector(v)
    if datum.is_integral(v):
        return datum.kappa(v)
    if any(d != 1 for d in datum._divisors):
        raise DomainError(f"{datum.group.name} has torsion in pi_1; pass kappa explicitly")
    free = datum.kappa_rational(v)
    if any(x.denominator != 1 for x in free):
        raise DomainError(f"{format_vector(v)} has no integral Kottwitz class")
    return tuple(int(x) for x in free)


def make_newton_point(datum: RootDatum, v, kappa=None) -> NewtonPoint:
    """Validated constructor; ``kappa`` defaults to the class inferred from ``v``."""
    v = datum.check(v)
    return NewtonPoint(datum, v, infer_kappa(datum, v) if kappa is None else kappa)


def is_newton_point(datum: RootDatum, v, kappa) -> bool:
    v = datum.check(v)
    if not datum.is_dominant(v):
        raise DomainError("membership is only tested on dominant coweights")
    try:
        lam0 = datum.kappa_representative(_as_kappa(kappa))
    except DomainError:
        return False
    J = datum.break_points(v)
    levi = frozenset(range(1, datum.rank + 1)) - J
    diff = tuple(a - b for a, b in zip(v, lam0))
    coeffs = {}
    for j in J:
        c = datum.pairing(datum.fundamental_weights[j - 1], diff)
        if c.denominator != 1:
            return False
        coeffs[j] = c
    target = list(datum.levi_projection(lam0, levi))
    for j, c in coeffs.items():
        pj = datum.levi_projection(datum.simple_coroots[j - 1], levi)
        target = [t + c * x for t, x in zip(target, pj)]
    return tuple(target) == v


def _enumerate_below(datum: RootDatum, top: tuple, kappa: tuple) -> list:
    lam0 = datum.kappa_representative(kappa)
    nu0 = datum.central_projection(lam0)
    if not datum.leq_dominance(nu0, top):
        raise DomainError(f"{format_vector(top)} is not above the basic point of class {kappa}")
    omegas = datum.fundamental_weights
    lo = [ceil_frac(datum.pairing(w, tuple(a - b for a, b in zip(nu0, lam0)))) for w in omegas]
    hi = [floor_frac(datum.pairing(w, tuple(a - b for a, b in zip(top, lam0)))) for w in omegas]
    simple = range(1, datum.rank + 1)
    found = set()
    for size in range(datum.rank + 1):
        for J in combinations(simple, size):
            levi = frozenset(simple) - set(J)
            base = datum.levi_projection(lam0, levi)
            dirs = [datum.levi_projection(datum.simple_coroots[j - 1], levi) for j in J]
            ranges = [range(lo[j - 1], hi[j - 1] + 1) for j in J]
            for cs in product(*ranges):
                v = list(base)
                for c, d in zip(cs, dirs):
                    v = [x + c * y for x, y in zip(v, d)]
                v = tuple(v)
                if datum.break_points(v) != frozenset(J) or not datum.is_dominant(v):
                    continue
                if datum.leq_dominance(v, top):
                    found.add(v)
    return sorted(found, key=lambda v: (datum.pairing(datum.rho, v), tuple(-x for x in v)))


def _check_same_class(a: NewtonPoint, b: NewtonPoint):
    if a.datum != b.datum:
        raise DomainError("Newton points of different groups")
    if a.kappa != b.kappa:
        raise DomainError(f"Kottwitz classes differ: {a.kappa} vs {b.kappa}")


def leq(a: NewtonPoint, b: NewtonPoint) -> bool:
    _check_same_class(a, b)
    return a.datum.leq_dominance(a.point, b.point)


def break_points(v: NewtonPoint) -> frozenset:
    return v.datum.break_points(v.point)


def pr_compare(a: NewtonPoint, b: NewtonPoint, j: int) -> str:
    """Compare the j-th fundamental-coweight coefficients of the two projections."""
    _check_same_class(a, b)
    if not 1 <= j <= a.datum.rank:
        raise DomainError(f"simple-root index {j} out of range")
    w = a.datum.fundamental_weights[j - 1]
    x, y = a.datum.pairing(w, a.point), a.datum.pairing(w, b.point)
    return "less" if x < y else "greater" if x > y else "equal"


def _ceil_sum(datum, mu, v):
    d = tuple(a - b for a, b in zip(mu, v))
    vals = [datum.pairing(w, d) for w in datum.fundamental_weights]
    return sum(ceil_frac(x) for x in vals), sum(vals, Fraction(0))


def delta(a: NewtonPoint, b: NewtonPoint, mu=None) -> int:
    """Length of every saturated chain from ``a`` up to ``b``."""
    _check_same_class(a, b)
    D = a.datum
    mu = b.point if mu is None else D.check(mu)
    if not (D.leq_dominance(a.point, b.point) and D.leq_dominance(b.point, mu)):
        raise DomainError(f"delta needs {a} <= {b} <= {format_vector(mu)}")
    return _ceil_sum(D, mu, a.point)[0] - _ceil_sum(D, mu, b.point)[0]


def defect(v: NewtonPoint, mu) -> int:
    D = v.datum
    mu = D.check(mu)
    if not D.leq_dominance(v.point, mu):
        raise DomainError(f"defect needs {v} <= {format_vector(mu)}")
    c, x = _ceil_sum(D, mu, v.point)
    return int(2 * (c - x))


def codimension(v: NewtonPoint, mu2) -> int:
    D = v.datum
    mu2 = D.check(mu2)
    val = D.pairing(D.rho, tuple(a - b for a, b in zip(mu2, v.point))) + Fraction(defect(v, mu2), 2)
    if val.denominator != 1:
        raise InternalError(f"non-integral codimension {val} for {v} under {format_vector(mu2)}")
    return int(val)


def mazur_nonempty(v: NewtonPoint, mu) -> bool:
    D = v.datum
    mu = D.dominant_sort(mu)
    return D.kappa(mu) == v.kappa and D.leq_dominance(v.point, mu)


def nu_break_max(v: NewtonPoint, j: int) -> NewtonPoint:
    """The unique maximal Newton point below ``v`` whose j-th projection differs from ``v``'s."""
    if j not in break_points(v):
        raise DomainError(f"{j} is not a break point of {v}")
    D = v.datum
    w = D.fundamental_weights[j - 1]
    target = D.pairing(w, v.point)
    cands = [NewtonPoint(D, p, v.kappa) for p in _enumerate_below(D, v.point, v.kappa)
             if D.pairing(w, p) != target]
    maximal = [c for c in cands
               if not any(o != c and D.leq_dominance(c.point, o.point) for o in cands)]
    if len(maximal) != 1:
        raise InternalError(f"expected a unique maximal element below {v} off break {j}, got {len(maximal)}")
    return maximal[0]


class NewtonPoset:
    """All Newton points of class ``kappa`` below ``top`` with their Hasse diagram."""

    def __init__(self, datum: RootDatum, top, kappa):
        self.datum = datum
        self.top = datum.check(top)
        self.kappa = _as_kappa(kappa)
        self.elements = [NewtonPoint(datum, p, self.kappa)
                         for p in _enumerate_below(datum, self.top, self.kappa)]
        g = nx.DiGraph()
        g.add_nodes_from(self.elements)
        for a, b in combinations(self.elements, 2):
            if datum.leq_dominance(a.point, b.point):
                g.add_edge(a, b)
            elif datum.leq_dominance(b.point, a.point):
                g.add_edge(b, a)
        self.order = g
        self.hasse = nx.transitive_reduction(g)
        self.hasse.add_nodes_from(self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, v):
        return v in self.order

    @property
    def bottom(self) -> NewtonPoint:
        return self.elements[0]

    @property
    def top_point(self) -> NewtonPoint:
        return NewtonPoint(self.datum, self.top, self.kappa)

    def leq(self, a, b) -> bool:
        return a == b or self.order.has_edge(a, b)

    def covers(self):
        """Cover relations ``(a, b)`` with ``a`` directly below ``b``."""
        return sorted(self.hasse.edges(), key=lambda e: (self.elements.index(e[0]), self.elements.index(e[1])))

    def maximal_chains(self, a: NewtonPoint, b: NewtonPoint):
        return maximal_chains(a, b, self)

    def rows(self, mu=None):
        """One summary dict per element: point, break set, defect, codimension, delta to top."""
        mu = self.top if mu is None else mu
        top = self.top_point
        out = []
        for v in self.elements:
            out.append({
                "nu": v.point,
                "breaks": tuple(sorted(break_points(v))),
                "defect": defect(v, mu),
                "codim": codimension(v, mu),
                "delta_to_top": delta(v, top, mu),
            })
        return out

    def to_dot(self) -> str:
        ids = {v: f"n{i}" for i, v in enumerate(self.elements)}
        lines = ["digraph newton_poset {", "  rankdir=BT;"]
        for v in self.elements:
            J = ",".join(str(j) for j in sorted(break_points(v)))
            label = f"{v}\\nJ={{{J}}} def={defect(v, self.top)} codim={codimension(v, self.top)}"
            lines.append(f'  {ids[v]} [label="{label}"];')
        for a, b in self.covers():
            lines.append(f'  {ids[a]} -> {ids[b]} [label="{delta(a, b, self.top)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def enumerate_poset(datum: RootDatum, mu, kappa=None) -> NewtonPoset:
    mu = datum.check(mu)
    if not datum.is_integral(mu):
        raise DomainError(f"{format_vector(mu)} is not an integral coweight")
    if not datum.is_dominant(mu):
        raise DomainError(f"{format_vector(mu)} is not dominant")
    k = datum.kappa(mu)
    if kappa is not None and _as_kappa(kappa) != k:
        raise DomainError(f"kappa {kappa} does not match the class {k} of {format_vector(mu)}")
    return NewtonPoset(datum, mu, k)


def maximal_chains(a: NewtonPoint, b: NewtonPoint, poset: NewtonPoset):
    """All saturated chains from ``a`` to ``b`` inside ``poset``."""
    if a not in poset or b not in poset:
        raise DomainError("chain endpoints must lie in the poset")
    if a == b:
        return [[a]]
    if not poset.leq(a, b):
        raise DomainError(f"{a} is not below {b}")
    return [list(p) for p in nx.all_simple_paths(poset.hasse, a, b)]
