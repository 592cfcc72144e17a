"""Heintze's criterion for solvable Lie algebras and the growth estimates behind it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .errors import DomainError, InputError, NotSolvableError, NumericalError
from .lie_core import (
    QuotientMap,
    Spectrum,
    StructureConstants,
    descending_sequence,
    induced_endomorphism,
    is_solvable,
    restricted_endomorphism,
    spectrum,
    validate,
)
from .tolerances import DEFAULT


@dataclass
class HeintzeVerdict:
    codim_ok: bool
    y0_used: np.ndarray = None  # already carries the chosen sign
    sign: str = None  # "+" or "-" relative to the unit complement vector
    spectra_graded: list = field(default_factory=list)
    spectrum_full: Spectrum = None
    verdict_item2: bool = False
    verdict_item3: bool = False
    margin: float = None
    marginal: bool = False

    @property
    def holds(self) -> bool:
        return self.verdict_item2 and self.verdict_item3

    def to_dict(self):
        return {
            "codim_ok": self.codim_ok,
            "sign": self.sign,
            "y0": None if self.y0_used is None else [float(x) for x in self.y0_used],
            "graded_spectra": [s.to_list() for s in self.spectra_graded],
            "spectrum_full": [] if self.spectrum_full is None else self.spectrum_full.to_list(),
            "item2": self.verdict_item2,
            "item3": self.verdict_item3,
            "margin": self.margin,
            "marginal": self.marginal,
        }


def _require_heintze_input(g, tol):
    if g.dim < 2:
        raise InputError("the criterion needs dim g >= 2")
    report = validate(g, tol)
    if not report.passed:
        raise InputError("invalid structure constants: " + "; ".join(report.failures))
    if not is_solvable(g, tol):
        raise NotSolvableError("algebra is not solvable")


def graded_spectra(g: StructureConstants, y0, tol=DEFAULT, sequence=None) -> list:
    """Spectra of the maps induced by ``ad(y0)`` on each ``l^i / l^(i+1)``."""
    seq = sequence if sequence is not None else descending_sequence(g, tol)
    out = []
    for num, den in zip(seq[:-1], seq[1:]):
        q = QuotientMap.between(num, den)
        out.append(spectrum(induced_endomorphism(g, y0, q, tol)))
    return out


def transverse_unit(g: StructureConstants, l0) -> np.ndarray:
    """Unit vector orthogonal to a codimension-one ``l0``, sign-normalised."""
    y = l0.complement().basis[:, 0]
    k = int(np.argmax(np.abs(y)))
    return y if y[k] > 0 else -y


def check_heintze(g: StructureConstants, tol=DEFAULT) -> HeintzeVerdict:
    """Decide the codimension condition and the two eigenvalue conditions.

    Only ``y0 = +y`` and ``y0 = -y`` are tried, ``y`` spanning the orthogonal
    complement of ``[g, g]``; other representatives differ by elements of
    ``[g, g]`` which do not change any graded spectrum.
    """
    _require_heintze_input(g, tol)
    seq = descending_sequence(g, tol)
    l0 = seq[0]
    if g.dim - l0.dim != 1:
        return HeintzeVerdict(codim_ok=False)

    y = transverse_unit(g, l0)
    candidates = []
    for sign, s in (("+", 1.0), ("-", -1.0)):
        y0 = s * y
        graded = graded_spectra(g, y0, tol, seq)
        full = spectrum(restricted_endomorphism(g, y0, l0, tol))
        item2 = graded[0].all_positive(tol.positive_real)
        item3 = full.all_positive(tol.positive_real)
        candidates.append((sign, y0, graded, full, item2, item3))
    chosen = next((c for c in candidates if c[4] or c[5]), candidates[0])
    sign, y0, graded, full, item2, item3 = chosen
    margin = full.min_real
    return HeintzeVerdict(
        codim_ok=True,
        y0_used=y0,
        sign=sign,
        spectra_graded=graded,
        spectrum_full=full,
        verdict_item2=item2,
        verdict_item3=item3,
        margin=margin,
        marginal=abs(margin) < tol.marginal,
    )


# ------------------------------------------------------------------ growth

@dataclass
class GrowthClassification:
    kind: str  # "Unbounded" or "Bounded"
    witness_times: list
    witness_norms: list
    initial_norm: float

    @property
    def unbounded(self) -> bool:
        return self.kind == "Unbounded"


def classify_growth(a, v, dt=DEFAULT.growth_dt, steps=DEFAULT.growth_steps,
                    ratio=DEFAULT.growth_ratio) -> GrowthClassification:
    """Sample ``|exp(t A) v|`` at ``t = dt, 2 dt, ..., steps dt``.

    The orbit is reported Unbounded when its running maxima climb past
    ``ratio`` times the initial norm. Norms are tracked in log scale so fast
    growth cannot overflow.
    """
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or v.shape != (a.shape[0],):
        raise InputError("classify_growth needs a square matrix and a matching vector")
    n0 = float(np.linalg.norm(v))
    if n0 == 0.0:
        raise DomainError("classify_growth needs a nonzero vector")
    step = sla.expm(dt * a)  # scaling and squaring with Pade approximants
    w = v / n0
    log_norm = math.log(n0)
    best = log_norm
    times, norms = [], []
    for k in range(1, steps + 1):
        w = step @ w
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            break
        log_norm += math.log(nw)
        w /= nw
        if log_norm > best:
            best = log_norm
            times.append(k * dt)
            norms.append(math.exp(min(log_norm, 700.0)))
    unbounded = bool(times) and best - math.log(n0) >= math.log(ratio)
    return GrowthClassification("Unbounded" if unbounded else "Bounded", times, norms, n0)


def _validate_terms(terms):
    clean = []
    for k, xi, w in terms:
        k = int(k)
        xi = complex(xi)
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        if k < 0:
            raise InputError("polynomial degrees must be non-negative")
        if xi.real <= 0:
            raise InputError(f"exponent {xi} must have positive real part")
        if not np.any(w):
            raise InputError("coefficient vectors must be nonzero")
        clean.append((k, xi, w))
    if not clean:
        raise InputError("at least one term is required")
    dims = {w.shape for _, _, w in clean}
    if len(dims) != 1:
        raise InputError("coefficient vectors have different lengths")
    for i in range(len(clean)):
        for j in range(i):
            if clean[i][0] == clean[j][0] and abs(clean[i][1] - clean[j][1]) <= 1e-12:
                raise InputError(f"duplicate (k, xi) pair {clean[i][:2]}")
    return clean


def exp_poly_norm(terms, t) -> np.ndarray:
    """``|sum_i t^k_i exp(xi_i t) w_i|`` at each time in ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    total = 0
    for k, xi, w in terms:
        total = total + np.outer(t ** k * np.exp(xi * t), w)
    return np.linalg.norm(total, axis=1)


def exp_poly_growth_witness(terms, thresholds=None, t_max=1e6) -> list:
    """Times at which the exponential polynomial exceeds successive thresholds.

    ``terms`` is a list of ``(k, xi, w)``. The horizon doubles until every
    threshold (default ``10, 100, ..., 1e6``) has been exceeded, then each
    crossing is refined by bisection against the preceding grid point.
    """
    terms = _validate_terms(terms)
    if thresholds is None:
        thresholds = [10.0 ** p for p in range(1, 7)]
    thresholds = sorted(float(x) for x in thresholds)
    freq = max(abs(xi.imag) for _, xi, _ in terms)
    h = min(0.01, math.pi / (8.0 * freq)) if freq > 0 else 0.01
    horizon = 1.0
    while True:
        t = np.arange(0.0, horizon + h, h)
        f = exp_poly_norm(terms, t)
        if np.nanmax(f) > thresholds[-1]:
            break
        horizon *= 2.0
        if horizon > t_max:
            raise NumericalError("no threshold crossing found within the time budget", t_max=t_max)
    out = []
    for thr in thresholds:
        idx = int(np.argmax(f > thr))
        if idx == 0:
            out.append(0.0)
            continue

        def gap(s, thr=thr):
            return exp_poly_norm(terms, s)[0] - thr

        out.append(float(brentq(gap, t[idx - 1], t[idx], xtol=1e-14, rtol=4 * np.finfo(float).eps)))
    return out
