"""Named numerical tolerances.

Every threshold used in a decision lives here so that the CLI can override
it with ``--tol-<name>``.
"""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-10  # relative SVD cutoff for subspaces
    antisymmetry: float = 1e-9  # scaled by (1 + max|c|)
    jacobi: float = 1e-9  # scaled by (1 + max|c|)**3
    invariance: float = 1e-9
    positive_real: float = 1e-7  # relative to spectral radius
    marginal: float = 1e-4
    commuting: float = 1e-8
    orthogonality: float = 1e-8
    randers_margin: float = 1e-9
    growth_dt: float = 0.5
    growth_steps: int = 200
    growth_ratio: float = 1e6

    def override(self, **kwargs):
        known = {f.name for f in fields(self)}
        unknown = set(kwargs) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **kwargs)


DEFAULT = Tolerances()
