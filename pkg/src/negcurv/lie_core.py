"""Finite-dimensional real Lie algebras given by structure constants.

The convention throughout is ``[e_i, e_j] = sum_k c[i, j, k] e_k`` and the
adjoint matrix of ``x`` acts on column vectors, ``ad(x) @ y == [x, y]``.
Subspaces are stored with orthonormal column bases obtained from an SVD.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import InputError, InvarianceError, NotNilpotentError, NumericalError
from .tolerances import DEFAULT

log = logging.getLogger(__name__)


@dataclass
class ValidationReport:
    """Outcome of an invariant audit. ``checks`` holds the worst residuals."""

    passed: bool
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {"passed": self.passed, "checks": dict(self.checks),
                "failures": list(self.failures)}


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """A Lie algebra as a bracket tensor over a fixed basis."""

    c: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 3 or c.shape[0] == 0 or len(set(c.shape)) != 1:
            raise InputError(f"structure constants must be an n x n x n array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InputError("structure constants contain non-finite entries")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        n = c.shape[0]
        labels = tuple(self.labels) if self.labels else tuple(f"e{i + 1}" for i in range(n))
        if len(labels) != n:
            raise InputError(f"{len(labels)} labels for a {n}-dimensional algebra")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def scale(self) -> float:
        """Largest absolute structure constant."""
        return float(np.abs(self.c).max())

    def ad(self, x) -> np.ndarray:
        x = self._vec(x)
        return np.einsum("i,ijk->kj", x, self.c)

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", self._vec(x), self._vec(y), self.c)

    def basis_vector(self, i) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def _vec(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InputError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        return x

    @classmethod
    def from_brackets(cls, dim, brackets, labels=()):
        """Build from ``{(i, j): {k: coeff}}`` with 0-based indices.

        Only one of ``(i, j)`` / ``(j, i)`` needs to be given; the other is
        filled in by antisymmetry.
        """
        c = np.zeros((dim, dim, dim))
        seen = {}
        for (i, j), coeffs in brackets.items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise InputError(f"bracket index ({i}, {j}) out of range for dim {dim}")
            vec = np.zeros(dim)
            for k, val in coeffs.items():
                if not 0 <= int(k) < dim:
                    raise InputError(f"coefficient index {k} out of range for dim {dim}")
                vec[int(k)] += float(val)
            if i == j:
                if np.any(vec):
                    raise InputError(f"[e{i + 1}, e{i + 1}] must vanish")
                continue
            key = (min(i, j), max(i, j))
            signed = vec if i < j else -vec
            if key in seen and not np.allclose(seen[key], signed):
                raise InputError(f"inconsistent brackets given for pair {key}")
            seen[key] = signed
        for (i, j), vec in seen.items():
            c[i, j] = vec
            c[j, i] = -vec
        return cls(c, tuple(labels))


def bracket(g: StructureConstants, x, y) -> np.ndarray:
    return g.bracket(x, y)


def validate(g: StructureConstants, tol=DEFAULT) -> ValidationReport:
    """Check antisymmetry and the Jacobi identity on all basis triples."""
    c = g.c
    scale = 1.0 + g.scale
    anti = float(np.abs(c + c.transpose(1, 0, 2)).max())
    # J[i,j,k,:] = [e_i,[e_j,e_k]] + cyclic
    inner = np.einsum("jkm,imn->ijkn", c, c)
    jac = inner + inner.transpose(1, 2, 0, 3) + inner.transpose(2, 0, 1, 3)
    jacobi = float(np.abs(jac).max())
    failures = []
    if anti > tol.antisymmetry * scale:
        failures.append(f"antisymmetry residual {anti:.3e}")
    if jacobi > tol.jacobi * scale ** 3:
        failures.append(f"Jacobi residual {jacobi:.3e}")
    return ValidationReport(
        passed=not failures,
        checks={"antisymmetry_residual": anti, "jacobi_residual": jacobi},
        failures=failures,
    )


def _canonical_signs(cols):
    """Flip columns so the largest-magnitude entry of each is positive."""
    if cols.size == 0:
        return cols
    idx = np.argmax(np.abs(cols), axis=0)
    signs = np.sign(cols[idx, np.arange(cols.shape[1])])
    return cols * np.where(signs == 0, 1.0, signs) + 0.0


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n with orthonormal basis columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros((n, 0)))

    @classmethod
    def full(cls, n):
        return cls(n, np.eye(n))

    @classmethod
    def span(cls, vectors, ambient_dim, rtol=DEFAULT.rank, ref_scale=0.0):
        """Span of ``vectors`` (columns of a matrix or an iterable of rows).

        Singular values below ``rtol * max(s_max, ref_scale)`` are dropped;
        ``ref_scale`` keeps round-off vectors from counting as rank.
        """
        if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
            m = vectors
        else:
            vectors = list(vectors)
            if not vectors:
                return cls.zero(ambient_dim)
            m = np.column_stack(vectors)
        m = np.asarray(m, dtype=float).reshape(ambient_dim, -1)
        if m.size == 0:
            return cls.zero(ambient_dim)
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        cutoff = rtol * max(s[0] if s.size else 0.0, ref_scale)
        r = int(np.sum(s > cutoff)) if s.size and s[0] > 0 else 0
        return cls(ambient_dim, _canonical_signs(u[:, :r]))

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def residual(self, v) -> float:
        """Distance of ``v`` (vector or columns) from the subspace, 2-norm."""
        v = np.asarray(v, dtype=float)
        r = v - self.basis @ (self.basis.T @ v)
        return float(np.linalg.norm(r, 2) if r.ndim == 2 and r.size else np.linalg.norm(r))

    def contains(self, other, tol=1e-9) -> bool:
        vecs = other.basis if isinstance(other, Subspace) else np.asarray(other, dtype=float)
        if vecs.size == 0:
            return True
        return self.residual(vecs) <= tol * max(1.0, float(np.linalg.norm(vecs, 2)))

    def complement(self):
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(self.ambient_dim, _canonical_signs(sla.null_space(self.basis.T)))


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """Projection from ``numerator`` onto ``numerator / denominator``.

    Quotient coordinates are taken along the orthogonal complement of the
    denominator inside the numerator, so ``projection`` has orthonormal rows.
    """

    numerator: Subspace
    denominator: Subspace
    projection: np.ndarray

    @classmethod
    def between(cls, numerator: Subspace, denominator: Subspace, tol=1e-9):
        if numerator.ambient_dim != denominator.ambient_dim:
            raise InputError("subspaces live in different ambient spaces")
        if not numerator.contains(denominator, tol):
            raise InputError("denominator is not contained in numerator")
        q = numerator.dim - denominator.dim
        n = numerator.ambient_dim
        if q == 0:
            return cls(numerator, denominator, np.zeros((0, n)))
        rest = numerator.basis - denominator.projector @ numerator.basis
        u, _, _ = np.linalg.svd(rest, full_matrices=False)
        return cls(numerator, denominator, _canonical_signs(u[:, :q]).T.copy())

    @property
    def dim(self) -> int:
        return self.projection.shape[0]

    @property
    def section(self) -> np.ndarray:
        """Columns spanning the chosen complement; ``projection @ section = I``."""
        return self.projection.T

    def __call__(self, v):
        return self.projection @ np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalue multiset, stored sorted for stable display."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.sort_complex(np.asarray(self.eigenvalues, dtype=complex).ravel())
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self):
        return self.eigenvalues.size

    @property
    def real_parts(self):
        return self.eigenvalues.real

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.eigenvalues).max()) if len(self) else 0.0

    @property
    def min_real(self):
        return float(self.real_parts.min()) if len(self) else None

    def all_positive(self, rtol=DEFAULT.positive_real) -> bool:
        """Every real part exceeds ``rtol`` times the spectral radius.

        An empty spectrum is vacuously positive.
        """
        if not len(self):
            return True
        return bool(np.all(self.real_parts > rtol * self.spectral_radius))

    def conjugate_closed(self, tol=1e-8) -> bool:
        return self.distance(Spectrum(self.eigenvalues.conj())) <= tol * max(1.0, self.spectral_radius)

    def distance(self, other) -> float:
        """Largest deviation under the optimal one-to-one matching."""
        a, b = self.eigenvalues, np.asarray(getattr(other, "eigenvalues", other), dtype=complex)
        if a.size != b.size:
            return float("inf")
        if a.size == 0:
            return 0.0
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max())

    @classmethod
    def union(cls, spectra):
        parts = [s.eigenvalues for s in spectra]
        return cls(np.concatenate(parts) if parts else np.zeros(0, dtype=complex))

    def to_list(self):
        return [{"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues]


def spectrum(a) -> Spectrum:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"spectrum needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    if a.size == 0:
        return Spectrum(np.zeros(0, dtype=complex))
    try:
        return Spectrum(np.linalg.eigvals(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}", matrix=a.tolist()) from exc


def _bracket_span(g, left: np.ndarray, right: np.ndarray, tol) -> Subspace:
    vecs = np.einsum("ia,jb,ijk->kab", left, right, g.c).reshape(g.dim, -1)
    return Subspace.span(vecs, g.dim, rtol=tol.rank, ref_scale=g.scale)


def derived_algebra(g: StructureConstants, tol=DEFAULT) -> Subspace:
    eye = np.eye(g.dim)
    return _bracket_span(g, eye, eye, tol)


def descending_sequence(g: StructureConstants, tol=DEFAULT) -> list:
    """``[l0, l1, ..., lk]`` with ``l0 = [g, g]``, ``li = [l0, l(i-1)]`` and ``lk = 0``."""
    l0 = derived_algebra(g, tol)
    seq = [l0]
    cur = l0
    for _ in range(g.dim + 1):
        if cur.dim == 0:
            return seq
        nxt = _bracket_span(g, l0.basis, cur.basis, tol)
        if nxt.dim >= cur.dim:
            raise NotNilpotentError(
                f"l0 not nilpotent: descending sequence stalls at dimension {cur.dim}")
        seq.append(nxt)
        cur = nxt
    raise NotNilpotentError("l0 not nilpotent: sequence did not terminate")


def derived_series(g: StructureConstants, tol=DEFAULT) -> list:
    """``[g, [g,g], [[g,g],[g,g]], ...]`` up to the point where it stabilises."""
    cur = Subspace.full(g.dim)
    series = [cur]
    while cur.dim > 0:
        nxt = _bracket_span(g, cur.basis, cur.basis, tol)
        if nxt.dim >= cur.dim:
            break
        series.append(nxt)
        cur = nxt
    return series


def is_solvable(g: StructureConstants, tol=DEFAULT) -> bool:
    return derived_series(g, tol)[-1].dim == 0


def is_nilpotent(g: StructureConstants, tol=DEFAULT) -> bool:
    cur = Subspace.full(g.dim)
    eye = np.eye(g.dim)
    while cur.dim > 0:
        nxt = _bracket_span(g, eye, cur.basis, tol)
        if nxt.dim >= cur.dim:
            return False
        cur = nxt
    return True


def induced_endomorphism(g: StructureConstants, y0, q: QuotientMap, tol=DEFAULT) -> np.ndarray:
    """Matrix of the map induced by ``ad(y0)`` on ``q.numerator / q.denominator``.

    Expressed in the quotient coordinates of ``q``: ``M @ q(v) == q([y0, v])``
    for every ``v`` in the numerator.
    """
    ad = g.ad(y0)
    scale = 1.0 + np.linalg.norm(ad, 2)
    num, den = q.numerator, q.denominator
    if num.dim and num.residual(ad @ num.basis) > tol.invariance * scale:
        raise InvarianceError("subspace not ad-invariant: [y0, numerator] leaves the numerator")
    if den.dim and den.residual(ad @ den.basis) > tol.invariance * scale:
        raise InvarianceError("subspace not ad-invariant: [y0, denominator] leaves the denominator")
    m = q.projection @ ad @ q.section
    if num.dim:
        err = np.abs(m @ q(num.basis) - q(ad @ num.basis)).max()
        if err > tol.invariance * scale:
            raise InvarianceError(f"induced map inconsistent on numerator (residual {err:.2e})")
    return m


def restricted_endomorphism(g: StructureConstants, y0, sub: Subspace, tol=DEFAULT) -> np.ndarray:
    """``ad(y0)`` restricted to an invariant subspace, in its orthonormal basis."""
    return induced_endomorphism(g, y0, QuotientMap.between(sub, Subspace.zero(g.dim)), tol)


def killing_form(g: StructureConstants) -> np.ndarray:
    ads = np.einsum("ijk->ikj", g.c)  # ads[i] = ad(e_i)
    b = np.einsum("iab,jba->ij", ads, ads)
    return 0.5 * (b + b.T)


def change_basis(g: StructureConstants, p) -> StructureConstants:
    """Structure constants in the basis whose i-th vector is column i of ``p``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (g.dim, g.dim):
        raise InputError(f"basis change must be {g.dim} x {g.dim}, got {p.shape}")
    cond = np.linalg.cond(p)
    log.debug("change_basis condition number %.3e", cond)
    if not np.isfinite(cond) or cond > 1e12:
        raise InputError(f"basis change is singular (condition number {cond:.3e})")
    pinv = np.linalg.inv(p)
    c = np.einsum("ai,bj,abm,km->ijk", p, p, g.c, pinv)
    return StructureConstants(c, g.labels)


def derivations(g: StructureConstants, tol=1e-10) -> list:
    """Basis of the derivation algebra, as matrices acting on column vectors.

    Solves ``D[x, y] = [Dx, y] + [x, Dy]`` on all basis pairs.
    """
    n = g.dim
    cols = []
    for a in range(n):
        for b in range(n):
            d = np.zeros((n, n))
            d[a, b] = 1.0
            # D c[i,j,:] - c[Dei, j] - c[ei, Dej]
            lhs = np.einsum("lk,ijk->ijl", d, g.c)
            r1 = np.einsum("pi,pjl->ijl", d, g.c)
            r2 = np.einsum("pj,ipl->ijl", d, g.c)
            cols.append((lhs - r1 - r2).ravel())
    system = np.column_stack(cols)
    null = sla.null_space(system, rcond=tol)
    return [null[:, i].reshape(n, n) for i in range(null.shape[1])]


def semidirect_extension(n: StructureConstants, d, label="y") -> StructureConstants:
    """``R y (+) n`` with ``[y, x] = D x``; index 0 is ``y``.

    ``d`` must be a derivation of ``n`` for the result to satisfy Jacobi.
    """
    d = np.asarray(d, dtype=float)
    m = n.dim
    c = np.zeros((m + 1, m + 1, m + 1))
    c[1:, 1:, 1:] = n.c
    c[0, 1:, 1:] = d.T  # [y, e_j] = sum_k D[k, j] e_k
    c[1:, 0, 1:] = -d.T
    return StructureConstants(c, (label,) + tuple(n.labels))


def is_abelian(g: StructureConstants) -> bool:
    return g.scale == 0.0


# ---------------------------------------------------------------- JSON I/O

def algebra_from_dict(data: dict) -> StructureConstants:
    try:
        dim = int(data["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("algebra file needs an integer 'dim'") from exc
    if dim < 1:
        raise InputError("'dim' must be positive")
    labels = data.get("labels") or ()
    brackets = {}
    for entry in data.get("brackets", []):
        try:
            i, j = int(entry["i"]) - 1, int(entry["j"]) - 1
            coeffs = {int(k) - 1: float(v) for k, v in entry["coeffs"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"malformed bracket entry {entry!r}") from exc
        if (i, j) in brackets or (j, i) in brackets:
            other = brackets.get((i, j)) or {k: -v for k, v in brackets[(j, i)].items()}
            if other != coeffs:
                raise InputError(f"conflicting entries for bracket ({i + 1}, {j + 1})")
            continue
        brackets[(i, j)] = coeffs
    return StructureConstants.from_brackets(dim, brackets, labels)


def algebra_to_dict(g: StructureConstants) -> dict:
    entries = []
    for i, j in combinations(range(g.dim), 2):
        nz = {str(k + 1): float(v) for k, v in enumerate(g.c[i, j]) if v != 0.0}
        if nz:
            entries.append({"i": i + 1, "j": j + 1, "coeffs": nz})
    return {"dim": g.dim, "labels": list(g.labels), "brackets": entries}


def load_algebra(path) -> StructureConstants:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read algebra file {path}: {exc}") from exc
    return algebra_from_dict(data)
