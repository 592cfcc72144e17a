"""Built-in algebras with hand-computed expected verdicts, and random solvable algebras."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .lie_core import StructureConstants, algebra_from_dict, change_basis, derivations, semidirect_extension


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    algebra: StructureConstants
    expected_verdict: bool
    expected_graded_spectra: tuple = None  # tuple of tuples of complex, or None
    note: str = ""


def abelian(n) -> StructureConstants:
    return StructureConstants(np.zeros((n, n, n)))


def axb() -> StructureConstants:
    return StructureConstants.from_brackets(2, {(0, 1): {1: 1.0}})


def heisenberg3() -> StructureConstants:
    return StructureConstants.from_brackets(3, {(0, 1): {2: 1.0}})


def heisenberg5() -> StructureConstants:
    return StructureConstants.from_brackets(5, {(0, 1): {4: 1.0}, (2, 3): {4: 1.0}})


def filiform4() -> StructureConstants:
    return StructureConstants.from_brackets(4, {(0, 1): {2: 1.0}, (0, 2): {3: 1.0}})


def heintze_heis4() -> StructureConstants:
    """Basis (y, e1, e2, e3): [y,e1]=e1, [y,e2]=e2, [y,e3]=2e3, [e1,e2]=e3."""
    return StructureConstants.from_brackets(
        4,
        {(0, 1): {1: 1.0}, (0, 2): {2: 1.0}, (0, 3): {3: 2.0}, (1, 2): {3: 1.0}},
        ("y", "e1", "e2", "e3"),
    )


def rot3() -> StructureConstants:
    """Basis (y, e1, e2): [y,e1]=e2, [y,e2]=-e1."""
    return StructureConstants.from_brackets(3, {(0, 1): {2: 1.0}, (0, 2): {1: -1.0}}, ("y", "e1", "e2"))


def rh(n) -> StructureConstants:
    """Real hyperbolic model: basis (y, e1..e_{n-1}) with [y, e_i] = e_i."""
    labels = ("y",) + tuple(f"e{i}" for i in range(1, n))
    return StructureConstants.from_brackets(n, {(0, i): {i: 1.0} for i in range(1, n)}, labels)


def catalog() -> list:
    entries = [
        CatalogEntry("abelian2", abelian(2), False, None, "flat; [g,g] = 0"),
        CatalogEntry("axb", axb(), True, ((1,),), "[e1,e2]=e2"),
        CatalogEntry("heisenberg3", heisenberg3(), False, None, "codimension of [g,g] is 2"),
        CatalogEntry("heintze_heis4", heintze_heis4(), True, ((1, 1), (2,)), "Heisenberg extended by diag(1,1,2)"),
        CatalogEntry("rot3", rot3(), False, None, "ad(y) is a rotation"),
    ]
    for n in range(3, 7):
        entries.append(CatalogEntry(f"rh{n}", rh(n), True, ((1,) * (n - 1),), "real hyperbolic"))
    return entries


def get(name) -> CatalogEntry:
    for entry in catalog():
        if entry.name == name:
            return entry
    raise KeyError(name)


# nilpotent bases for random semidirect products, with a positive grading derivation each
NILPOTENT_BASES = {
    "abelian1": (lambda: abelian(1), np.eye(1)),
    "abelian2": (lambda: abelian(2), np.eye(2)),
    "abelian3": (lambda: abelian(3), np.eye(3)),
    "abelian4": (lambda: abelian(4), np.eye(4)),
    "heisenberg3": (heisenberg3, np.diag([1.0, 1.0, 2.0])),
    "heisenberg5": (heisenberg5, np.diag([1.0, 1.0, 1.0, 1.0, 2.0])),
    "filiform4": (filiform4, np.diag([1.0, 1.0, 2.0, 3.0])),
}


def random_derivation(n: StructureConstants, rng) -> np.ndarray:
    basis = derivations(n)
    coeffs = rng.normal(size=len(basis))
    return sum(a * d for a, d in zip(coeffs, basis))


def random_solvable(rng, base=None, conjugate=True) -> StructureConstants:
    """A random algebra ``n x| R D`` over a nilpotent base ``n``.

    Half of the draws add a positive multiple of the grading derivation so
    that both Heintze outcomes occur. With ``conjugate`` the result is
    expressed in a random well-conditioned basis.
    """
    names = sorted(NILPOTENT_BASES)
    name = base or names[rng.integers(len(names))]
    make, grading = NILPOTENT_BASES[name]
    n = make()
    d = random_derivation(n, rng)
    if rng.random() < 0.5:
        d = d + rng.uniform(1.0, 4.0) * (1.0 + np.linalg.norm(d, 2)) * grading
    g = semidirect_extension(n, d)
    if conjugate:
        g = change_basis(g, random_well_conditioned(g.dim, rng))
    return g


def random_well_conditioned(n, rng, max_cond=50.0) -> np.ndarray:
    while True:
        p = np.eye(n) + 0.5 * rng.normal(size=(n, n))
        if np.linalg.cond(p) < max_cond:
            return p


def fixture_names() -> list:
    return sorted(p.name for p in resources.files("negcurv").joinpath("data").iterdir()
                  if p.name.endswith(".json"))


def load_fixture(name) -> dict:
    """Raw JSON of a shipped fixture file (algebra or metric)."""
    if not name.endswith(".json"):
        name += ".json"
    path = resources.files("negcurv").joinpath("data", name)
    if not path.is_file():
        raise FileNotFoundError(name)
    return json.loads(path.read_text())


def fixture_algebra(name) -> StructureConstants:
    return algebra_from_dict(load_fixture(name))
