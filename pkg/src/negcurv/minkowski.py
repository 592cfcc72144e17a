"""Minkowski norms and their fundamental tensors.

Three families are supported: Riemannian ``sqrt(y.A.y)``, Randers
``sqrt(y.A.y) + b.y`` and a black-box ``CustomNorm`` whose derivatives are
taken by central differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InputError, StrongConvexityError
from .lie_core import ValidationReport
from .tolerances import DEFAULT

EPS = np.finfo(float).eps
# central first differences: optimal step ~ eps^(1/3); second differences ~ eps^(1/4)
GRAD_STEP = EPS ** (1.0 / 3.0)
HESS_STEP = EPS ** 0.25


def _spd(a, what="A"):
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InputError(f"{what} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{what} has non-finite entries")
    if np.abs(a - a.T).max() > 1e-12 * max(1.0, np.abs(a).max()):
        raise InputError(f"{what} is not symmetric")
    a = 0.5 * (a + a.T)
    lo = np.linalg.eigvalsh(a)[0]
    if lo <= 0:
        raise InputError(f"{what} is not positive definite (min eigenvalue {lo:.3e})")
    a.setflags(write=False)
    return a


class MinkowskiNorm:
    """Common interface. Subclasses provide ``__call__`` and may override derivatives."""

    dim: int
    family = "custom"

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.dim,):
            raise InputError(f"expected a vector of length {self.dim}, got shape {y.shape}")
        return y

    def half_sq(self, y) -> float:
        return 0.5 * self(y) ** 2

    def gradient_half_sq(self, y) -> np.ndarray:
        """Gradient of ``F^2 / 2``; equals ``g_y @ y`` by homogeneity."""
        y = self._check(y)
        h = GRAD_STEP * max(np.linalg.norm(y), 1.0)
        eye = np.eye(self.dim)
        return np.array([(self.half_sq(y + h * e) - self.half_sq(y - h * e)) / (2 * h) for e in eye])

    def hessian_half_sq(self, y) -> np.ndarray:
        y = self._check(y)
        h = HESS_STEP * max(np.linalg.norm(y), 1.0)
        n = self.dim
        eye = np.eye(n)
        f = self.half_sq
        hess = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                di, dj = h * eye[i], h * eye[j]
                val = (f(y + di + dj) - f(y + di - dj) - f(y - di + dj) + f(y - di - dj)) / (4 * h * h)
                hess[i, j] = hess[j, i] = val
        return hess

    def pullback(self, m) -> "MinkowskiNorm":
        """The norm ``z -> F(M z)`` for an injective ``M``."""
        m = np.asarray(m, dtype=float)
        return CustomNorm(m.shape[1], lambda z: self(m @ z), name=f"pullback of {self.family}")

    def to_dict(self):
        raise InputError("custom norms have no file representation")


@dataclass(frozen=True, eq=False)
class RiemannianNorm(MinkowskiNorm):
    A: np.ndarray
    family = "riemannian"

    def __post_init__(self):
        object.__setattr__(self, "A", _spd(self.A))

    @property
    def dim(self):
        return self.A.shape[0]

    def __call__(self, y) -> float:
        y = self._check(y)
        return float(np.sqrt(max(y @ self.A @ y, 0.0)))

    def gradient_half_sq(self, y):
        return self.A @ self._check(y)

    def hessian_half_sq(self, y):
        self._check(y)
        return np.array(self.A)

    def pullback(self, m):
        m = np.asarray(m, dtype=float)
        return RiemannianNorm(m.T @ self.A @ m)

    def to_dict(self):
        return {"type": "riemannian", "A": self.A.tolist()}


@dataclass(frozen=True, eq=False)
class RandersNorm(MinkowskiNorm):
    A: np.ndarray
    b: np.ndarray
    margin: float = DEFAULT.randers_margin
    family = "randers"

    def __post_init__(self):
        a = _spd(self.A)
        b = np.array(self.b, dtype=float)
        if b.shape != (a.shape[0],):
            raise InputError(f"b must have length {a.shape[0]}, got shape {b.shape}")
        strength = float(b @ np.linalg.solve(a, b))
        if not strength < 1.0 - self.margin:
            raise InputError(f"Randers condition violated: b.A^-1.b = {strength:.12g} >= 1 - {self.margin:g}")
        b.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def strength(self) -> float:
        """``b.A^-1.b``, which must stay below one."""
        return float(self.b @ np.linalg.solve(self.A, self.b))

    def __call__(self, y) -> float:
        y = self._check(y)
        return float(np.sqrt(max(y @ self.A @ y, 0.0)) + self.b @ y)

    def gradient_half_sq(self, y):
        y = self._check(y)
        alpha = np.sqrt(y @ self.A @ y)
        if alpha == 0:
            return np.zeros(self.dim)
        return (alpha + self.b @ y) * (self.A @ y / alpha + self.b)

    def hessian_half_sq(self, y):
        y = self._check(y)
        ay = self.A @ y
        alpha = np.sqrt(y @ ay)
        if alpha == 0:
            raise DomainError("fundamental tensor is undefined at y = 0")
        grad_f = ay / alpha + self.b
        f = alpha + self.b @ y
        return np.outer(grad_f, grad_f) + (f / alpha) * (self.A - np.outer(ay, ay) / alpha ** 2)

    def pullback(self, m):
        m = np.asarray(m, dtype=float)
        return RandersNorm(m.T @ self.A @ m, m.T @ self.b, self.margin)

    def to_dict(self):
        return {"type": "randers", "A": self.A.tolist(), "b": self.b.tolist()}


class CustomNorm(MinkowskiNorm):
    """Black-box norm. ``evaluator`` must be pure and smooth away from 0."""

    family = "custom"

    def __init__(self, dim, evaluator, name="custom"):
        if int(dim) < 1:
            raise InputError("dimension must be positive")
        self.dim = int(dim)
        self.evaluator = evaluator
        self.name = name

    def __call__(self, y) -> float:
        return float(self.evaluator(self._check(y)))

    def __repr__(self):
        return f"CustomNorm(dim={self.dim}, name={self.name!r})"


@dataclass(frozen=True, eq=False)
class FundamentalTensor:
    base_y: np.ndarray
    G: np.ndarray

    def __call__(self, u, v) -> float:
        return float(np.asarray(u) @ self.G @ np.asarray(v))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.G)[0])


def evaluate(norm: MinkowskiNorm, y) -> float:
    return norm(y)


FD_CONVEXITY_RTOL = 1e-6


def fundamental_tensor(norm: MinkowskiNorm, y, rtol=None) -> FundamentalTensor:
    """Hessian of ``F^2 / 2`` at a nonzero ``y``, checked positive definite.

    The default threshold on ``min/max`` eigenvalue is ``1e-10`` for closed
    forms and ``1e-6`` for finite-difference tensors, whose own error is
    about ``1e-8``.
    """
    if rtol is None:
        rtol = FD_CONVEXITY_RTOL if norm.family == "custom" else 1e-10
    y = norm._check(y)
    if not np.any(y):
        raise DomainError("fundamental tensor is undefined at y = 0")
    g = norm.hessian_half_sq(y)
    g = 0.5 * (g + g.T)
    eig = np.linalg.eigvalsh(g)
    if not eig[0] > rtol * max(abs(eig[-1]), 1e-300):
        raise StrongConvexityError(
            f"fundamental tensor not positive definite at y={y.tolist()} (min eigenvalue {eig[0]:.3e})",
            min_eigenvalue=float(eig[0]))
    return FundamentalTensor(y.copy(), g)


def sphere_samples(dim, count, rng, include_axes=True) -> np.ndarray:
    """Rows: ``count`` uniform points of the unit sphere, then +-e_i if asked."""
    pts = rng.normal(size=(count, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    if include_axes:
        eye = np.eye(dim)
        pts = np.vstack([pts, eye, -eye])
    return pts


def validate_norm(norm: MinkowskiNorm, samples=100, seed=0, convexity_rtol=FD_CONVEXITY_RTOL) -> ValidationReport:
    """Audit homogeneity, positivity and strong convexity on sphere samples.

    Strong convexity is judged by the smallest ratio ``min/max`` eigenvalue
    of ``g_y``; the coordinate axes are always included because degeneracy
    of many hand-made norms sits there.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = sphere_samples(norm.dim, samples, rng)
    worst_homog = 0.0
    min_value = np.inf
    min_ratio = np.inf
    worst_point = None
    for y in pts:
        fy = norm(y)
        min_value = min(min_value, fy)
        for lam in (0.5, 2.0, 7.0):
            err = abs(norm(lam * y) - lam * fy) / max(lam * abs(fy), 1e-300)
            worst_homog = max(worst_homog, err)
        hess = norm.hessian_half_sq(y)
        eig = np.linalg.eigvalsh(0.5 * (hess + hess.T))
        ratio = eig[0] / max(abs(eig[-1]), 1e-300)
        if ratio < min_ratio:
            min_ratio, worst_point = ratio, y
    failures = []
    if worst_homog > 1e-9:
        failures.append(f"positive homogeneity violated (relative error {worst_homog:.3e})")
    if not min_value > 0:
        failures.append(f"non-positive value {min_value:.3e} on the unit sphere")
    if not min_ratio > convexity_rtol:
        failures.append(f"strong convexity fails near y={np.round(worst_point, 6).tolist()} "
                        f"(eigenvalue ratio {min_ratio:.3e})")
    return ValidationReport(
        passed=not failures,
        checks={
            "homogeneity_error": float(worst_homog),
            "min_value": float(min_value),
            "convexity_margin": float(min_ratio),
            "worst_direction": None if worst_point is None else [float(x) for x in worst_point],
        },
        failures=failures,
    )


def metric_from_dict(data: dict) -> MinkowskiNorm:
    kind = str(data.get("type", "")).lower()
    try:
        if kind == "riemannian":
            return RiemannianNorm(np.array(data["A"], dtype=float))
        if kind == "randers":
            return RandersNorm(np.array(data["A"], dtype=float), np.array(data["b"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed metric description: {exc}") from exc
    raise InputError(f"unknown metric type {data.get('type')!r}; expected 'riemannian' or 'randers'")


def load_metric(path) -> MinkowskiNorm:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read metric file {path}: {exc}") from exc
    return metric_from_dict(data)
