"""Linear submersions between Minkowski norms.

For a surjective ``l: V -> W`` the induced norm is the infimum of ``F`` on
each affine fiber ``l^-1(w)``. The minimiser (the horizontal lift) is found
by damped Newton on ``F^2 / 2`` restricted to the fiber; at the minimiser
the gradient ``g_u(u, .)`` annihilates ``ker l``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, InputError, NumericalError
from .lie_core import Subspace
from .minkowski import CustomNorm, MinkowskiNorm, fundamental_tensor
from .tolerances import DEFAULT

log = logging.getLogger(__name__)

MAX_NEWTON = 200
MAX_DESCENT = 5000


@dataclass(frozen=True, eq=False)
class LinearSubmersion:
    map: np.ndarray
    kernel: Subspace = field(init=False)

    def __post_init__(self):
        m = np.array(self.map, dtype=float)
        if m.ndim == 1:
            m = m[None, :]
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[0] > m.shape[1]:
            raise InputError(f"submersion map must be target x source with target <= source, got {m.shape}")
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= DEFAULT.rank * s[0]:
            raise InputError("submersion map is not surjective (rank deficient)")
        m.setflags(write=False)
        object.__setattr__(self, "map", m)
        object.__setattr__(self, "kernel", Subspace(m.shape[1], sla.null_space(m)))

    @property
    def source_dim(self) -> int:
        return self.map.shape[1]

    @property
    def target_dim(self) -> int:
        return self.map.shape[0]

    def __call__(self, v):
        return self.map @ np.asarray(v, dtype=float)

    def particular(self, w) -> np.ndarray:
        """Minimum Euclidean-norm preimage of ``w``."""
        w = np.asarray(w, dtype=float).reshape(self.target_dim)
        return self.map.T @ np.linalg.solve(self.map @ self.map.T, w)


@dataclass
class HorizontalLift:
    target_vector: np.ndarray
    lift: np.ndarray
    certified_min: float
    orthogonality_residual: float
    iterations: int = 0
    method: str = "newton"

    def to_dict(self):
        return {
            "target": [float(x) for x in self.target_vector],
            "lift": [float(x) for x in self.lift],
            "value": self.certified_min,
            "orthogonality_residual": self.orthogonality_residual,
            "iterations": self.iterations,
            "method": self.method,
        }


def _as_submersion(l):
    return l if isinstance(l, LinearSubmersion) else LinearSubmersion(l)


def _minimize_on_fiber(norm: MinkowskiNorm, l: LinearSubmersion, w, start=None):
    """Return ``(u, iterations, method)`` minimising ``F`` over ``l^-1(w)``."""
    k = l.kernel.basis
    if start is None:
        u = l.particular(w)
    else:
        u = np.asarray(start, dtype=float)
        # keep the start on the fiber exactly
        u = u + l.particular(w - l(u))
    if k.shape[1] == 0:
        return u, 0, "direct"

    def reduced_grad(x):
        return k.T @ norm.gradient_half_sq(x)

    def stationary(x, gz, scale=1e-10):
        return np.linalg.norm(gz) <= scale * (1.0 + norm(x) ** 2)

    it = 0
    gz = reduced_grad(u)
    for it in range(1, MAX_NEWTON + 1):
        if stationary(u, gz):
            return u, it - 1, "newton"
        hess = k.T @ norm.hessian_half_sq(u) @ k
        hess = 0.5 * (hess + hess.T)
        step = None
        if np.linalg.cond(hess) < 1e12:
            step = -np.linalg.solve(hess, gz)
            if gz @ step >= 0:
                step = None
        if step is None:
            step = -gz
        phi0 = norm.half_sq(u)
        t = 1.0
        accepted = False
        while t > 1e-12:
            cand = u + t * (k @ step)
            gc = reduced_grad(cand)
            # second test: near the optimum phi decreases below round-off
            if norm.half_sq(cand) <= phi0 + 1e-4 * t * (gz @ step) or (
                    np.linalg.norm(gc) < 0.5 * np.linalg.norm(gz)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        u, gz = cand, gc
    if stationary(u, gz):
        return u, it, "newton"
    log.debug("Newton stalled on the fiber after %d steps; falling back to descent", it)
    return _descent_on_fiber(norm, l, u, it)


def _descent_on_fiber(norm, l, u, used):
    k = l.kernel.basis
    best_u = u
    for it in range(1, MAX_DESCENT + 1):
        gz = k.T @ norm.gradient_half_sq(u)
        scale = 1.0 + norm(u) ** 2
        if np.linalg.norm(gz) <= 1e-10 * scale:
            return u, used + it, "descent"
        phi0 = norm.half_sq(u)
        t = 1.0
        while t > 1e-14:
            cand = u - t * (k @ gz)
            if norm.half_sq(cand) <= phi0 - 1e-4 * t * (gz @ gz):
                break
            t *= 0.5
        else:
            break
        u = best_u = cand
    gz = k.T @ norm.gradient_half_sq(best_u)
    if np.linalg.norm(gz) <= 1e-7 * (1.0 + norm(best_u) ** 2):
        return best_u, used + it, "descent"
    raise NumericalError("fiber minimisation did not converge", best=best_u.tolist(),
                         value=norm(best_u), gradient=float(np.linalg.norm(gz)))


def horizontal_lift(norm: MinkowskiNorm, l, ubar, start=None) -> HorizontalLift:
    """The unique minimiser of ``norm`` on ``l^-1(ubar)``."""
    l = _as_submersion(l)
    if norm.dim != l.source_dim:
        raise InputError(f"norm has dimension {norm.dim}, submersion source {l.source_dim}")
    ubar = np.asarray(ubar, dtype=float).reshape(l.target_dim)
    if not np.any(ubar):
        raise DomainError("horizontal lift needs a nonzero target vector")
    # lifts are positively homogeneous; solving at unit scale keeps the
    # absolute stopping rule meaningful for tiny or huge targets
    scale = float(np.linalg.norm(ubar))
    if start is not None:
        start = np.asarray(start, dtype=float) / scale
    u, iters, method = _minimize_on_fiber(norm, l, ubar / scale, start)
    u = scale * u
    u = u + l.particular(ubar - l(u))
    value = norm(u)
    k = l.kernel.basis
    if k.shape[1]:
        g = fundamental_tensor(norm, u)
        resid = float(np.abs(k.T @ (g.G @ u)).max()) / value ** 2
    else:
        resid = 0.0
    return HorizontalLift(ubar.copy(), u, value, resid, iters, method)


def induced_norm(norm: MinkowskiNorm, l, vbar) -> float:
    l = _as_submersion(l)
    vbar = np.asarray(vbar, dtype=float).reshape(l.target_dim)
    if not np.any(vbar):
        return 0.0
    return horizontal_lift(norm, l, vbar).certified_min


def induced(norm: MinkowskiNorm, l) -> CustomNorm:
    """The induced norm on the target, as a black-box norm."""
    l = _as_submersion(l)
    return CustomNorm(l.target_dim, lambda x: induced_norm(norm, l, x), name="induced")


@dataclass
class IsometryReport:
    lift: HorizontalLift
    trials: int
    max_discrepancy: float
    induced_tensor: np.ndarray
    induced_tensor_min_eigenvalue: float

    @property
    def induced_tensor_positive(self) -> bool:
        return self.induced_tensor_min_eigenvalue > 0

    def to_dict(self):
        return {
            "lift": self.lift.to_dict(),
            "trials": self.trials,
            "max_discrepancy": self.max_discrepancy,
            "induced_tensor": self.induced_tensor.tolist(),
            "induced_tensor_min_eigenvalue": self.induced_tensor_min_eigenvalue,
            "induced_tensor_positive": self.induced_tensor_positive,
        }


def isometry_check(norm: MinkowskiNorm, l, ubar, trials=100, seed=0) -> IsometryReport:
    """Compare ``g_u`` on the ``g_u``-orthogonal complement of ``ker l`` with
    the fundamental tensor of the induced norm at ``ubar``.

    The induced tensor comes from central second differences of the induced
    norm, each evaluation being a fiber minimisation (for invertible ``l``,
    from the pulled-back norm directly).
    """
    l = _as_submersion(l)
    lift = horizontal_lift(norm, l, ubar)
    g = fundamental_tensor(norm, lift.lift).G
    k = l.kernel.basis
    horiz = sla.null_space(k.T @ g) if k.shape[1] else np.eye(l.source_dim)
    if k.shape[1]:
        gbar = induced(norm, l).hessian_half_sq(lift.target_vector)
    else:
        # invertible l: the induced norm is a change of variables
        gbar = norm.pullback(np.linalg.inv(l.map)).hessian_half_sq(lift.target_vector)
    gbar = 0.5 * (gbar + gbar.T)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        w1 = horiz @ rng.normal(size=horiz.shape[1])
        w2 = horiz @ rng.normal(size=horiz.shape[1])
        lhs = w1 @ g @ w2
        rhs = l(w1) @ gbar @ l(w2)
        worst = max(worst, abs(lhs - rhs))
    return IsometryReport(lift, trials, float(worst), gbar, float(np.linalg.eigvalsh(gbar)[0]))
