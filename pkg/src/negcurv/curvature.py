"""Flag curvature of left-invariant Finsler metrics at the identity.

Two independent routes are provided:

* ``flag_curvature``: the homogeneous formula, valid only for commuting
  flags ``(u, v)`` with ``g_u(u, [u, g]) = 0``. Its value is a squared norm
  over a Gram determinant, so it is never negative.
* ``riemannian_sectional``: the Levi-Civita connection of a left-invariant
  Riemannian metric from the Koszul formula, for arbitrary planes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg as sla
from scipy.optimize import least_squares, minimize, minimize_scalar

from .errors import DomainError, InputError, NotApplicableError, NotSolvableError, StrongConvexityError
from .heintze import check_heintze
from .lie_core import (
    QuotientMap,
    StructureConstants,
    Subspace,
    ValidationReport,
    descending_sequence,
    induced_endomorphism,
    is_solvable,
)
from .minkowski import MinkowskiNorm, RiemannianNorm, fundamental_tensor, validate_norm
from .submersion import LinearSubmersion, horizontal_lift, induced_norm
from .tolerances import DEFAULT


@dataclass(frozen=True, eq=False)
class LeftInvariantMetric:
    algebra: StructureConstants
    norm: MinkowskiNorm
    audit_samples: int = 20
    validation: ValidationReport = field(init=False)

    def __post_init__(self):
        if self.algebra.dim != self.norm.dim:
            raise InputError(f"algebra has dimension {self.algebra.dim} but the norm {self.norm.dim}")
        object.__setattr__(self, "validation", validate_norm(self.norm, self.audit_samples))

    @property
    def reliable(self) -> bool:
        """False when the norm failed its axiom audit; results are then advisory."""
        return self.validation.passed

    @property
    def is_riemannian(self) -> bool:
        return isinstance(self.norm, RiemannianNorm)

    def g(self, y):
        return fundamental_tensor(self.norm, y)


@dataclass(frozen=True, eq=False)
class FlagSpec:
    pole: np.ndarray
    partner: np.ndarray

    def __post_init__(self):
        u = np.array(self.pole, dtype=float)
        v = np.array(self.partner, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise InputError("pole and partner must be vectors of equal length")
        if not np.any(u):
            raise DomainError("flag pole must be nonzero")
        s = np.linalg.svd(np.vstack([u, v]), compute_uv=False)
        if s[1] <= 1e-10 * s[0]:
            raise DomainError("pole and partner are linearly dependent")
        object.__setattr__(self, "pole", u)
        object.__setattr__(self, "partner", v)

    def to_dict(self):
        return {"pole": self.pole.tolist(), "partner": self.partner.tolist()}


@dataclass
class CurvatureReport:
    value: float
    numerator: float
    denominator: float
    commuting_residual: float = 0.0
    orthogonality_residual: float = 0.0
    method: str = "homogeneous"
    reliable: bool = True

    def to_dict(self):
        return {
            "K": self.value,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "residuals": {"commuting": self.commuting_residual,
                          "orthogonality": self.orthogonality_residual},
            "method": self.method,
            "reliable": self.reliable,
        }


def u_vector(metric: LeftInvariantMetric, u, v) -> np.ndarray:
    """Solve ``2 g_u(U, w) = g_u([u, w], v) + g_u(u, [v, w])`` for all ``w``."""
    alg = metric.algebra
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = metric.g(u).G
    rhs = alg.ad(u).T @ g @ v + alg.ad(v).T @ g @ u
    return np.linalg.solve(2.0 * g, rhs)


def precondition_residuals(metric: LeftInvariantMetric, u, v, g=None):
    """Scale-free residuals of ``[u, v] = 0`` and ``g_u(u, [u, e_i]) = 0``."""
    alg = metric.algebra
    cmax = alg.scale
    if cmax == 0.0:
        return 0.0, 0.0
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if g is None:
        g = metric.g(u).G
    commuting = np.linalg.norm(alg.bracket(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v) * cmax)
    orth = np.abs((g @ u) @ alg.ad(u)).max() / ((u @ g @ u) * cmax)
    return float(commuting), float(orth)


def flag_curvature(metric: LeftInvariantMetric, flag: FlagSpec, tol=DEFAULT) -> CurvatureReport:
    u, v = flag.pole, flag.partner
    g = metric.g(u).G
    commuting, orth = precondition_residuals(metric, u, v, g)
    if commuting > tol.commuting or orth > tol.orthogonality:
        raise NotApplicableError(
            f"formula not applicable: commuting residual {commuting:.2e}, orthogonality residual {orth:.2e}",
            {"commuting": commuting, "orthogonality": orth})
    big_u = u_vector(metric, u, v)
    numerator = float(big_u @ g @ big_u)
    denominator = float((u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2)
    if not denominator > 0:
        raise DomainError(f"degenerate flag: Gram determinant {denominator:.3e}")
    return CurvatureReport(numerator / denominator, numerator, denominator, commuting, orth,
                           "homogeneous", metric.reliable)


# ------------------------------------------------------------- oracle

def levi_civita(algebra: StructureConstants, a, x, y) -> np.ndarray:
    """``nabla_x y`` for left-invariant fields and the inner product ``a``."""
    ainv = np.linalg.inv(a)
    return 0.5 * (algebra.bracket(x, y)
                  - ainv @ algebra.ad(x).T @ a @ y
                  - ainv @ algebra.ad(y).T @ a @ x)


def riemann_tensor(algebra, a, x, y, z) -> np.ndarray:
    """``R(x, y) z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z``."""
    nab = lambda p, q: levi_civita(algebra, a, p, q)  # noqa: E731
    return nab(x, nab(y, z)) - nab(y, nab(x, z)) - nab(algebra.bracket(x, y), z)


def riemannian_report(metric: LeftInvariantMetric, x, y) -> CurvatureReport:
    if not metric.is_riemannian:
        raise InputError("the sectional-curvature oracle needs a Riemannian norm")
    a = metric.norm.A
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    den = float((x @ a @ x) * (y @ a @ y) - (x @ a @ y) ** 2)
    if not den > 1e-12 * (x @ a @ x) * (y @ a @ y):
        raise DomainError("plane vectors are linearly dependent")
    num = float(riemann_tensor(metric.algebra, a, x, y, y) @ a @ x)
    return CurvatureReport(num / den, num, den, method="oracle", reliable=True)


def riemannian_sectional(metric: LeftInvariantMetric, x, y) -> float:
    return riemannian_report(metric, x, y).value


# ------------------------------------------------------------- flag search

def _commuting_partner(algebra: StructureConstants, u, rng=None):
    """A vector commuting with ``u`` and independent of it, or ``None``."""
    u = np.asarray(u, dtype=float)
    ad = algebra.ad(u)
    _, s, vt = np.linalg.svd(ad)
    cutoff = 1e-9 * max(algebra.scale * np.linalg.norm(u), 1e-300)
    null = vt[s <= cutoff].T if algebra.scale else np.eye(algebra.dim)
    uh = u / np.linalg.norm(u)
    rest = null - np.outer(uh, uh @ null)
    sub = Subspace.span(rest, algebra.dim, rtol=1e-8, ref_scale=1.0)
    if sub.dim == 0:
        return None
    if rng is None:
        v = sub.basis[:, 0]
    else:
        v = sub.basis @ rng.normal(size=sub.dim)
    k = int(np.argmax(np.abs(v)))
    return v if v[k] > 0 else -v


def _sample_partner(metric, u, rng):
    """Partner uniform on the ``g_u``-unit sphere of the ``g_u``-orthocomplement
    of ``u`` inside the commutant of ``u``; ``None`` if that space is trivial."""
    alg = metric.algebra
    _, s, vt = np.linalg.svd(alg.ad(u))
    cutoff = 1e-9 * max(alg.scale * np.linalg.norm(u), 1e-300)
    null = vt[s <= cutoff].T if alg.scale else np.eye(alg.dim)
    g = metric.g(u).G
    rest = null - np.outer(u, (u @ g @ null) / (u @ g @ u))
    sub = Subspace.span(rest, alg.dim, rtol=1e-8, ref_scale=1.0)
    if sub.dim == 0:
        return None
    # g_u-orthonormal basis of the candidate space
    gram = sub.basis.T @ g @ sub.basis
    onb = sub.basis @ np.linalg.inv(np.linalg.cholesky(gram)).T
    z = rng.normal(size=sub.dim)
    return onb @ (z / np.linalg.norm(z))


def _orthogonality_residual_vector(metric, u):
    g = metric.g(u).G
    return (g @ u) @ metric.algebra.ad(u) / (u @ g @ u)


def nudge_pole(metric: LeftInvariantMetric, u0):
    """Move ``u0`` on the unit sphere toward ``g_u(u, [u, g]) = 0``."""
    u0 = np.asarray(u0, dtype=float) / np.linalg.norm(u0)

    def residual(x):
        n = np.linalg.norm(x)
        u = x / n
        try:
            r = _orthogonality_residual_vector(metric, u)
        except StrongConvexityError:
            r = np.full(metric.algebra.dim, 1e3)
        return np.concatenate([r, [n - 1.0]])

    sol = least_squares(residual, u0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    return sol.x / np.linalg.norm(sol.x)


def _try_flag(metric, u, v, tol):
    try:
        return flag_curvature(metric, FlagSpec(u, v), tol)
    except (NotApplicableError, DomainError, StrongConvexityError):
        return None


def _basis_pairs(n):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def random_applicable_flag(metric: LeftInvariantMetric, rng, tol=DEFAULT):
    """One rejection-sampling attempt: nudge a random pole, pick a commuting partner."""
    n = metric.algebra.dim
    u = nudge_pole(metric, rng.normal(size=n))
    try:
        v = _sample_partner(metric, u, rng)
    except (DomainError, StrongConvexityError):
        return None
    if v is None:
        return None
    report = _try_flag(metric, u, v, tol)
    return None if report is None else (FlagSpec(u, v), report)


@dataclass
class ScanSummary:
    method: str
    attempts: int
    accepted: int
    values: np.ndarray

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0

    @property
    def empty(self) -> bool:
        return self.values.size == 0

    @property
    def min(self):
        return None if self.empty else float(self.values.min())

    @property
    def max(self):
        return None if self.empty else float(self.values.max())

    def to_dict(self):
        qs = {}
        if not self.empty:
            for p in (5, 25, 50, 75, 95):
                qs[f"q{p:02d}"] = float(np.percentile(self.values, p))
        return {
            "method": self.method,
            "attempts": self.attempts,
            "accepted": self.accepted,
            "acceptance_rate": self.acceptance_rate,
            "min": self.min,
            "max": self.max,
            "quantiles": qs,
            "count_negative": int(np.sum(self.values < 0)),
            "count_nonnegative": int(np.sum(self.values >= 0)),
        }


def _oracle_sample(metric, seed, index):
    rng = np.random.default_rng([seed, index])
    n = metric.algebra.dim
    while True:
        x, y = rng.normal(size=n), rng.normal(size=n)
        try:
            return riemannian_sectional(metric, x, y)
        except DomainError:
            continue


def _formula_sample(metric, seed, index, tol):
    found = random_applicable_flag(metric, np.random.default_rng([seed, index]), tol)
    return None if found is None else found[1].value


def scan_flags(metric: LeftInvariantMetric, samples=1000, seed=42, jobs=1, method="auto",
               tol=DEFAULT) -> ScanSummary:
    """Survey curvature values over random flags.

    ``method="auto"`` uses the oracle for Riemannian norms and the
    homogeneous formula otherwise. The formula route first tries every
    ordered pair of basis vectors, then ``samples`` randomised attempts.
    Each sample draws from its own generator seeded by ``(seed, index)``,
    so results do not depend on ``jobs``.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    if method == "auto":
        method = "oracle" if metric.is_riemannian else "homogeneous"
    if method == "oracle":
        if not metric.is_riemannian:
            raise InputError("oracle scans need a Riemannian norm")
        work = lambda i: _oracle_sample(metric, seed, i)  # noqa: E731
        fixed = []
    elif method == "homogeneous":
        work = lambda i: _formula_sample(metric, seed, i, tol)  # noqa: E731
        eye = np.eye(metric.algebra.dim)
        fixed = [_try_flag(metric, eye[i], eye[j], tol) for i, j in _basis_pairs(metric.algebra.dim)]
        fixed = [r.value for r in fixed if r is not None]
    else:
        raise InputError(f"unknown scan method {method!r}")
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, range(samples)))
    else:
        results = [work(i) for i in range(samples)]
    values = fixed + [r for r in results if r is not None]
    attempts = samples + (len(_basis_pairs(metric.algebra.dim)) if method == "homogeneous" else 0)
    return ScanSummary(method, attempts, len(values), np.array(values, dtype=float))


# ------------------------------------------------------------- witnesses

class Witness(NamedTuple):
    flag: FlagSpec
    report: CurvatureReport
    case: str


def _directions(m, budget, rng):
    eye = np.eye(m)
    for i in range(m):
        yield eye[i]
        yield -eye[i]
    for _ in range(max(budget - 2 * m, 0)):
        d = rng.normal(size=m)
        yield d / np.linalg.norm(d)


def _quotient_setup(metric, y0, seq):
    """Norm of ``l0`` (in its own coordinates), submersion onto ``l0/l1`` and pairing."""
    alg, norm = metric.algebra, metric.norm
    l0, l1 = seq[0], seq[1]
    q = QuotientMap.between(l0, l1)
    sub = LinearSubmersion(q.projection @ l0.basis)
    restricted = norm.pullback(l0.basis)
    ad = alg.ad(y0)

    def lift(ubar):
        return l0.basis @ horizontal_lift(restricted, sub, ubar).lift

    def ratio(ubar):
        u = lift(ubar)
        g = metric.g(u).G
        return float((g @ u) @ (ad @ u) / (u @ g @ u)), u

    return q, sub, restricted, lift, ratio


def _partner_in_l0(seq, u):
    k = len(seq) - 1
    if k > 1:
        v = seq[k - 1].basis[:, 0]
    else:
        l0 = seq[0].basis
        uh = u / np.linalg.norm(u)
        rest = Subspace.span(l0 - np.outer(uh, uh @ l0), len(u), rtol=1e-8, ref_scale=1.0)
        if rest.dim == 0:
            return None
        v = rest.basis[:, 0]
    k_ = int(np.argmax(np.abs(v)))
    return v if v[k_] > 0 else -v


def _bisect_sign_change(ratio, a, b, iters=80):
    ra, _ = ratio(a)
    mid = a
    for _ in range(iters):
        mid = a + b
        mid /= np.linalg.norm(mid)
        rm, _ = ratio(mid)
        if rm == 0.0:
            return mid
        if (rm > 0) == (ra > 0):
            a, ra = mid, rm
        else:
            b = mid
    return mid


def witness_nonnegative(metric: LeftInvariantMetric, budget=1000, seed=0, tol=DEFAULT) -> Optional[Witness]:
    """Look for a flag where the homogeneous formula applies (so ``K >= 0``).

    Case ``a``: lift a direction of ``g/l0`` to ``u`` with ``g_u(u, l0) = 0``
    and look for a second vector commuting with ``u``.
    Case ``b``: with ``y0`` that lift, search ``l0/l1`` for a direction where
    ``g_u(u, [y0, u])`` vanishes at the horizontal lift ``u``, and pair ``u``
    with a central vector of ``l0`` (or any other vector when ``l0`` is abelian).
    Returns ``None`` when the budget is exhausted.
    """
    alg, norm = metric.algebra, metric.norm
    if not is_solvable(alg, tol):
        raise NotSolvableError("witness search needs a solvable algebra")
    rng = np.random.default_rng(seed)
    seq = descending_sequence(alg, tol)
    l0 = seq[0]
    comp = l0.complement().basis
    to_quotient = LinearSubmersion(comp.T)
    y0 = None
    for ubar in _directions(comp.shape[1], min(budget, 2 * comp.shape[1] + 20), rng):
        u = horizontal_lift(norm, to_quotient, ubar).lift
        if y0 is None:
            y0 = u
        v = _commuting_partner(alg, u)
        if v is not None:
            report = _try_flag(metric, u, v, tol)
            if report is not None:
                return Witness(FlagSpec(u, v), report, "a")

    if l0.dim == 0 or comp.shape[1] != 1:
        return None
    _, _, _, lift, ratio = _quotient_setup(metric, y0, seq)
    m = seq[0].dim - seq[1].dim
    signs = {}
    candidates = []
    for d in _directions(m, budget, rng):
        r, u = ratio(d)
        if abs(r) <= 1e-13:
            candidates.append(u)
            break
        signs.setdefault(r > 0, d)
        if len(signs) == 2:
            a, b = signs[True], signs[False]
            if np.linalg.norm(a + b) < 1e-8:  # antipodal; go round through another direction
                signs.pop(False)
                continue
            root = _bisect_sign_change(ratio, a, b)
            candidates.append(lift(root))
            break
    for u in candidates:
        v = _partner_in_l0(seq, u)
        if v is None:
            continue
        report = _try_flag(metric, u, v, tol)
        if report is not None:
            return Witness(FlagSpec(u, v), report, "b")
    return None


# ------------------------------------------------------------- growth

@dataclass
class GrowthReport:
    c: float
    holds: bool
    worst_ratio: float
    inconsistent: bool
    y0: np.ndarray
    times: np.ndarray

    def to_dict(self):
        return {"c": self.c, "holds": self.holds, "worst_ratio": self.worst_ratio,
                "inconsistent": self.inconsistent, "y0": self.y0.tolist(),
                "t_max": float(self.times[-1])}


def growth_constant_check(metric: LeftInvariantMetric, y0=None, steps=51, samples=200, seed=0,
                          t_max=5.0, tol=DEFAULT) -> GrowthReport:
    """Estimate ``c = min gbar(u, A u) / gbar(u, u)`` on ``l0/l1`` and test
    ``f(t) = F(exp(tA) u)^2 / 2 >= exp(c t) f(0)`` along flows of the induced
    endomorphism ``A``.
    """
    alg = metric.algebra
    verdict = check_heintze(alg, tol)
    if not verdict.holds:
        raise NotApplicableError("growth check needs an algebra satisfying the Heintze criterion")
    y0 = verdict.y0_used if y0 is None else np.asarray(y0, dtype=float)
    seq = descending_sequence(alg, tol)
    q, sub, restricted, _, ratio = _quotient_setup(metric, y0, seq)
    a = induced_endomorphism(alg, y0, q, tol)
    m = q.dim
    rng = np.random.default_rng(seed)
    dirs = list(_directions(m, samples, rng))
    vals = [ratio(d)[0] for d in dirs]
    best = dirs[int(np.argmin(vals))]
    c = float(min(vals))
    if m == 2:
        th0 = math.atan2(best[1], best[0])
        res = minimize_scalar(lambda th: ratio(np.array([math.cos(th), math.sin(th)]))[0],
                              bounds=(th0 - 0.2, th0 + 0.2), method="bounded",
                              options={"xatol": 1e-12})
        c = min(c, float(res.fun))
    elif m > 2:
        res = minimize(lambda x: ratio(x / np.linalg.norm(x))[0], best, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        c = min(c, float(res.fun))

    fbar = lambda x: induced_norm(restricted, sub, x)  # noqa: E731
    times = np.linspace(0.0, t_max, steps)
    worst = np.inf
    for d in dirs[: 2 * m + 4]:
        f0 = 0.5 * fbar(d) ** 2
        for t in times:
            ft = 0.5 * fbar(sla.expm(t * a) @ d) ** 2
            worst = min(worst, ft / (math.exp(c * t) * f0))
    return GrowthReport(c, bool(worst >= 1.0 - 1e-6), float(worst), c <= 0, y0, times)
