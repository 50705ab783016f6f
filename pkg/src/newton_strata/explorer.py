"""Seeded experiments on double cosets ``K z^mu K`` of GL_n over small fields.

Every sample is an exact Laurent-polynomial matrix, so the Hodge and Newton
points of samples are computed without truncation.  Samples are seeded by
``(seed, index)`` so reports do not depend on evaluation order.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import (CertificationFailed, DomainError, InternalError, NotFound,
                     PrecisionExhausted)
from .fields import FiniteField, field_for
from .matrix import SeriesMatrix, elementary
from .poset import (NewtonPoint, codimension, enumerate_poset, is_newton_point, make_newton_point,
                    maximal_chains, mazur_nonempty)
from .rootdatum import GroupType, build_root_datum, format_vector
from .series import TruncatedSeries
from .sigma import ExtendedWeylElem, gl_hodge_point, newton_point, weyl_representative


@dataclass(frozen=True)
class SampleConfig:
    """Parameters of a sampling experiment in ``K z^mu K`` (or the union over ``mu1 <= mu' <= mu``)."""

    mu: tuple
    q: int = 2
    samples: int = 1000
    seed: int = 0
    depth: int | None = None
    mu1: tuple | None = None
    witness_degree: int = 2
    budget: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(int(x) for x in self.mu))
        if self.mu1 is not None:
            object.__setattr__(self, "mu1", tuple(int(x) for x in self.mu1))
        if list(self.mu) != sorted(self.mu):
            raise DomainError(f"mu={self.mu} is not dominant (ascending)")
        field_for(self.q)

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def datum(self):
        return build_root_datum(GroupType("GL", self.n))

    @property
    def field(self) -> FiniteField:
        return field_for(self.q)

    @property
    def effective_depth(self) -> int:
        if self.depth is not None:
            return self.depth
        return 4 * (self.datum.deformation_dimension(self.mu) + self.n)


def _random_element(rng, field: FiniteField) -> int:
    return int(rng.integers(field.size))


def random_integral_unit(field: FiniteField, n: int, depth: int, rng) -> SeriesMatrix:
    """Random element of GL_n(F[[z]]) with entries polynomials of degree < depth."""
    while True:
        const = rng.integers(field.size, size=(n, n))
        c = SeriesMatrix([[TruncatedSeries.monomial(field, 0, int(x)) if x else TruncatedSeries.zero(field)
                           for x in row] for row in const])
        if not c.det().is_zero():
            break
    coeffs = rng.integers(field.size, size=(n, n, max(depth, 1)))
    coeffs[:, :, 0] = const
    rows = [[TruncatedSeries.from_ints(field, list(coeffs[i, j][:depth])) for j in range(n)]
            for i in range(n)]
    return SeriesMatrix(rows)


def _choose_mu(cfg: SampleConfig, rng) -> tuple:
    if cfg.mu1 is None:
        return cfg.mu
    D = cfg.datum
    poset = enumerate_poset(D, cfg.mu)
    cands = [tuple(int(x) for x in v.point) for v in poset
             if all(x.denominator == 1 for x in v.point)
             and D.leq_dominance(cfg.mu1, v.point, integral=True)]
    if not cands:
        raise DomainError(f"no coweights between {cfg.mu1} and {cfg.mu}")
    weights = [cfg.q ** D.deformation_dimension(m) for m in cands]
    pick = int(rng.integers(sum(weights)))
    for m, w in zip(cands, weights):
        if pick < w:
            return m
        pick -= w
    return cands[-1]


def sample_double_coset(cfg: SampleConfig, rng) -> SeriesMatrix:
    """``k1 z^mu k2`` with ``k1, k2`` random in GL_n(F_q[[z]]) to the configured depth."""
    F, n, d = cfg.field, cfg.n, cfg.effective_depth
    mu = _choose_mu(cfg, rng)
    k1 = random_integral_unit(F, n, d, rng)
    k2 = random_integral_unit(F, n, d, rng)
    return k1 @ SeriesMatrix.diagonal_monomials(F, mu) @ k2


def sample_rng(seed: int, index: int):
    return np.random.default_rng([seed, index])


# ---------------------------------------------------------------------------
# census


@dataclass
class CensusReport:
    config: SampleConfig
    counts: dict
    uncertified: int
    mazur_violations: int
    non_newton: int
    predicted_codim: dict
    reference_frequency: dict
    corridor: dict
    runtime_ms: int = 0
    notes: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.uncertified

    def frequency(self, key) -> Fraction:
        return Fraction(self.counts.get(key, 0), max(self.total, 1))

    def to_json(self) -> dict:
        """JSON-ready dict; numbers are exact rationals rendered as strings."""
        return {
            "mu": format_vector(self.config.mu),
            "mu1": None if self.config.mu1 is None else format_vector(self.config.mu1),
            "q": str(self.config.q),
            "samples": str(self.total),
            "seed": str(self.config.seed),
            "depth": str(self.config.effective_depth),
            "strata": [
                {"nu": k, "count": str(self.counts.get(k, 0)), "frequency": str(self.frequency(k)),
                 "codimension": str(self.predicted_codim[k]),
                 "reference_frequency": str(self.reference_frequency[k]),
                 "corridor": self.corridor.get(k, "too few hits")}
                for k in self.predicted_codim
            ],
            "uncertified": str(self.uncertified),
            "mazur_violations": str(self.mazur_violations),
            "non_newton_points": str(self.non_newton),
            "corridor_rule": "heuristic: |log_q(frequency) + codimension| <= 3/2 for strata with >= 30 hits",
            "runtime_ms": str(self.runtime_ms),
            "notes": list(self.notes),
        }

    def deterministic_part(self) -> dict:
        out = self.to_json()
        out.pop("runtime_ms")
        return out


def corridor_ok(freq: Fraction, q: int, codim: int) -> bool:
    """``|log_q(freq) + codim| <= 3/2``, decided exactly by squaring."""
    if freq <= 0:
        return False
    f2 = freq * freq
    return Fraction(q) ** (-2 * codim - 3) <= f2 <= Fraction(q) ** (3 - 2 * codim)


def _classify(cfg: SampleConfig, index: int):
    """Newton point of sample ``index`` as ``(key or None, flags)``; re-runs at double depth on failure."""
    for depth in (cfg.effective_depth, 2 * cfg.effective_depth):
        c = replace(cfg, depth=depth)
        b = sample_double_coset(c, sample_rng(cfg.seed, index))
        try:
            nu = newton_point(b)
        except (CertificationFailed, PrecisionExhausted):
            continue
        return nu, b
    return None, None


def _census_chunk(args):
    cfg, indices = args
    D = cfg.datum
    out = []
    for i in indices:
        nu, b = _classify(cfg, i)
        if nu is None:
            out.append((None, False, False))
            continue
        mu_b = gl_hodge_point(b)
        mazur = D.leq_dominance(nu.point, mu_b) and nu.kappa == D.kappa(mu_b) \
            and D.leq_dominance(nu.point, cfg.mu)
        member = is_newton_point(D, nu.point, nu.kappa)
        out.append((nu.point, mazur, member))
    return out


def stratum_census(cfg: SampleConfig, workers: int = 1) -> CensusReport:
    start = time.perf_counter()
    D = cfg.datum
    poset = enumerate_poset(D, cfg.mu)
    keys = {v.point: str(v) for v in poset}
    codims = {str(v): codimension(v, cfg.mu) for v in poset}
    refs = {k: Fraction(1, cfg.q ** c) for k, c in codims.items()}
    idx = list(range(cfg.samples))
    if workers > 1:
        chunks = [(cfg, idx[k::workers]) for k in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_census_chunk, chunks))
        results = [None] * cfg.samples
        for k, part in enumerate(parts):
            for i, r in zip(idx[k::workers], part):
                results[i] = r
    else:
        results = _census_chunk((cfg, idx))
    counts = {k: 0 for k in codims}
    uncertified = violations = non_newton = 0
    notes = []
    for point, mazur, member in results:
        if point is None:
            uncertified += 1
            continue
        if not mazur or point not in keys:
            violations += 1
            notes.append(f"Mazur violation at {format_vector(point)}")
            continue
        if not member:
            non_newton += 1
        counts[keys[point]] += 1
    if uncertified:
        notes.append("depth policy insufficient for some samples (uncertified at 2d)")
    total = cfg.samples
    corridor = {}
    for k, c in codims.items():
        if counts[k] >= 30:
            corridor[k] = "inside" if corridor_ok(Fraction(counts[k], total), cfg.q, c) else "outside"
    report = CensusReport(cfg, counts, uncertified, violations, non_newton, codims, refs, corridor,
                          notes=notes)
    report.runtime_ms = int((time.perf_counter() - start) * 1000)
    return report


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class WitnessResult:
    status: str  # "found", "not_found", "impossible_by_mazur"
    matrix: SeriesMatrix | None = None
    hodge: tuple | None = None
    newton: NewtonPoint | None = None
    trials: int = 0


def monomial_witness(v: NewtonPoint, mu) -> ExtendedWeylElem | None:
    """A monomial matrix with translation part a rearrangement of ``mu`` and Newton point ``v``.

    Such an element lies in ``K z^mu K`` automatically.  Exhaustive for n <= 5.
    """
    n = len(mu)
    if n > 5:
        return None
    target = tuple(v.point)
    for powers in sorted(set(itertools.permutations(mu))):
        for perm in itertools.permutations(range(n)):
            x = ExtendedWeylElem(perm, powers)
            if x.cycle_newton_point() == target:
                return x
    return None


def _slope_segments(v: NewtonPoint):
    """``(length, total)`` for each maximal run of equal slopes."""
    out = []
    for x in v.point:
        if out and out[-1][2] == x:
            out[-1][0] += 1
        else:
            out.append([1, None, x])
    return [(m, int(s * m)) for m, _, s in out]


def _random_composition(total, length, lo, hi, rng):
    """Integers in ``[lo, hi]`` of given length and sum, or None."""
    if not lo * length <= total <= hi * length:
        return None
    parts = [lo] * length
    for _ in range(total - lo * length):
        open_ = [i for i in range(length) if parts[i] < hi]
        parts[open_[int(rng.integers(len(open_)))]] += 1
    return parts


def _triangular_candidate(F, segments, mu, rng):
    """Block upper-triangular matrix whose diagonal blocks are cycles of prescribed slope."""
    n = len(mu)
    order = list(range(len(segments)))
    rng.shuffle(order)
    lo, hi = min(mu), max(mu)
    rows = [[TruncatedSeries.zero(F) for _ in range(n)] for _ in range(n)]
    start = 0
    for k in order:
        m, total = segments[k]
        powers = _random_composition(total, m, lo, hi, rng)
        if powers is None:
            return None
        for i in range(m):
            # e_i -> z^{powers[i]} e_{i+1 mod m} inside the block
            rows[start + (i + 1) % m][start + i] = TruncatedSeries.monomial(F, powers[i], 1)
        start += m
    pos = []
    start = 0
    for k in order:
        pos.extend([start] * segments[k][0])
        start += segments[k][0]
    for i in range(n):
        for j in range(n):
            if pos[i] < pos[j] and rng.random() < 0.6:
                c = int(rng.integers(1, F.size))
                rows[i][j] = TruncatedSeries.monomial(F, int(rng.integers(lo, hi + 1)), c)
    return SeriesMatrix(rows)


def find_witness(v: NewtonPoint, mu, cfg: SampleConfig | None = None, raise_on_failure: bool = False):
    """Search ``[b]`` meeting ``K z^mu K``.

    A monomial element is tried first.  Otherwise random block
    upper-triangular matrices are drawn whose diagonal blocks are cycles with
    the slopes of ``v``; their Newton point is ``v`` by construction and only
    the Hodge point has to be hit.  Coefficients live in the
    degree-``cfg.witness_degree`` extension of F_q.
    """
    mu = tuple(int(x) for x in mu)
    cfg = cfg or SampleConfig(mu)
    if not mazur_nonempty(v, mu):
        return WitnessResult("impossible_by_mazur")
    base = field_for(cfg.q)
    F = base.extension(cfg.witness_degree) if cfg.witness_degree > 1 else base
    rng = np.random.default_rng([cfg.seed, 0x5717])
    mono = monomial_witness(v, mu)
    b, trials = None, 0
    if mono is not None:
        b = mono.to_matrix(F)
    else:
        segments = _slope_segments(v)
        while trials < cfg.budget:
            trials += 1
            cand = _triangular_candidate(F, segments, mu, rng)
            if cand is not None and tuple(gl_hodge_point(cand)) == mu:
                b = cand
                break
    if b is None:
        if raise_on_failure:
            raise NotFound(f"no witness for {v} in K z^{format_vector(mu)} K within {cfg.budget} trials")
        return WitnessResult("not_found", trials=trials)
    nu = newton_point(b)
    h = tuple(gl_hodge_point(b))
    if nu.point != v.point or h != mu:
        raise InternalError("witness construction produced the wrong Newton or Hodge point")
    return WitnessResult("found", b, h, nu, trials)


# ---------------------------------------------------------------------------
# pencils


@dataclass
class AnomalyReport:
    kind: str
    details: str


@dataclass
class PencilResult:
    base: SeriesMatrix
    direction: SeriesMatrix
    samples: list  # (degree, t code, NewtonPoint, hodge)
    generic: NewtonPoint | None
    violations: int
    anomaly: AnomalyReport | None = None

    @property
    def special(self) -> NewtonPoint:
        return self.samples[0][2]


def _pencil_degrees(F: FiniteField, max_j: int = 6):
    out = []
    for j in range(1, max_j + 1):
        if F.p ** (F.e * j) <= 2 ** 16:
            out.append(j)
    return out


def pencil_generic_newton(b: SeriesMatrix, direction: SeriesMatrix, cfg: SampleConfig | None = None,
                          per_degree: int = 3, datum=None) -> PencilResult:
    """Newton points of ``b + t direction`` at ``t = 0`` and at random ``t`` in extensions.

    Raises DomainError when the Kottwitz class is not constant along the
    sampled fibers, since then the pencil is not a family in the loop group.
    """
    rng = np.random.default_rng([0 if cfg is None else cfg.seed, 0x9E7C])
    F = b.field
    samples = []
    nu0 = newton_point(b, datum)
    samples.append((0, 0, nu0, tuple(gl_hodge_point(b))))
    for j in _pencil_degrees(F):
        E = F.extension(j) if j > 1 else F
        be, de = b.embed(E), direction.embed(E)
        for _ in range(per_degree):
            t = int(rng.integers(1, E.size))
            bt = be + de.scale(TruncatedSeries.monomial(E, 0, t))
            try:
                nu = newton_point(bt, datum)
            except DomainError:
                continue
            samples.append((j, t, nu, tuple(gl_hodge_point(bt))))
    D = nu0.datum
    jumps = {s[2].kappa for s in samples} - {nu0.kappa}
    if jumps:
        # det(b + t dir) is not z^k times a unit over F[t]: not a family in the loop group
        raise DomainError(f"kappa jumps along the pencil ({nu0.kappa} at t=0, also {sorted(jumps)})")
    pts = {s[2].point for s in samples}
    maxima = [p for p in pts if not any(o != p and D.leq_dominance(p, o) for o in pts)]
    anomaly = None
    generic = None
    if len(maxima) == 1:
        generic = NewtonPoint(D, maxima[0], nu0.kappa)
    else:
        anomaly = AnomalyReport("incomparable maxima",
                                ", ".join(format_vector(p) for p in sorted(maxima)))
    violations = 0
    if generic is not None:
        violations = sum(1 for s in samples if not D.leq_dominance(s[2].point, generic.point))
    return PencilResult(b, direction, samples, generic, violations, anomaly)


@dataclass
class StepResult:
    source: NewtonPoint
    target: NewtonPoint
    success: bool
    pencil: PencilResult | None
    attempts: int


def _random_direction(F, n, rng):
    zero = TruncatedSeries.zero(F)
    rows = [[zero] * n for _ in range(n)]
    for _ in range(int(rng.integers(1, 3))):
        i, j = (int(x) for x in rng.integers(n, size=2))
        k = int(rng.integers(-1, 3))
        c = int(rng.integers(1, F.size))
        rows[i][j] = TruncatedSeries.monomial(F, k, c)
    return SeriesMatrix(rows)


def _random_k_conjugate(b: SeriesMatrix, rng, steps: int = 3) -> SeriesMatrix:
    """``g^-1 b sigma(g)`` for ``g`` a product of integral elementary matrices (inverse is exact)."""
    F, n = b.field, b.n
    for _ in range(steps):
        i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
        s = TruncatedSeries.monomial(F, int(rng.integers(0, 2)), int(rng.integers(1, F.size)))
        b = elementary(F, n, i, j, -s) @ b @ elementary(F, n, i, j, s).frobenius()
    return b


def realize_step(src: NewtonPoint, dst: NewtonPoint, mu, cfg: SampleConfig, max_directions: int = 300):
    """Pencil inside ``K z^{<= mu} K`` whose special fiber has Newton point ``src`` and generic ``dst``.

    The base point is a witness for ``src``, re-conjugated by a random
    element of K after every failed direction.
    """
    D = src.datum
    w = find_witness(src, mu, cfg)
    if w.status != "found":
        return StepResult(src, dst, False, None, 0)
    rng = np.random.default_rng([cfg.seed, 0xC4A1])
    base = w.matrix
    for attempt in range(1, max_directions + 1):
        direction = _random_direction(base.field, base.n, rng)
        try:
            res = pencil_generic_newton(base, direction, cfg, per_degree=2)
        except DomainError:
            res = None
        if (res is not None and res.generic is not None and res.generic.point == dst.point
                and not res.violations
                and all(D.leq_dominance(D.dominant_sort(s[3]), mu) for s in res.samples)):
            return StepResult(src, dst, True, res, attempt)
        base = _random_k_conjugate(w.matrix, rng)
    return StepResult(src, dst, False, None, max_directions)


def chain_realization(a: NewtonPoint, b: NewtonPoint, mu, cfg: SampleConfig | None = None):
    """For each saturated chain from ``a`` to ``b``, try to realize every step by a pencil.

    Steps shared between chains are computed once.
    """
    mu = tuple(int(x) for x in mu)
    cfg = cfg or SampleConfig(mu)
    if a == b:
        return []
    poset = enumerate_poset(a.datum, mu)
    cache = {}
    out = []
    for chain in maximal_chains(a, b, poset):
        steps = []
        for x, y in zip(chain, chain[1:]):
            if (x, y) not in cache:
                cache[x, y] = realize_step(x, y, mu, cfg)
            steps.append(cache[x, y])
        out.append(steps)
    return out


def newton_from_string(datum, text, kappa=None) -> NewtonPoint:
    parts = [Fraction(x.strip()) for x in text.split(",")]
    return make_newton_point(datum, parts, kappa)
