import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from negcurv import catalog as cat
from negcurv.errors import InputError, InvarianceError, NotNilpotentError
from negcurv.lie_core import (
    QuotientMap,
    Spectrum,
    StructureConstants,
    Subspace,
    algebra_from_dict,
    algebra_to_dict,
    bracket,
    change_basis,
    derivations,
    derived_algebra,
    descending_sequence,
    induced_endomorphism,
    is_nilpotent,
    is_solvable,
    killing_form,
    load_algebra,
    restricted_endomorphism,
    spectrum,
    validate,
)

from oracles import exact_descending_sequence


def sl2():
    return StructureConstants.from_brackets(3, {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}})


def e(n, i):
    return np.eye(n)[i]


def same_subspace(sub, exact_cols):
    if not exact_cols:
        return sub.dim == 0
    m = np.array([[float(x) for x in col] for col in exact_cols]).T
    return sub.dim == m.shape[1] and sub.residual(m) < 1e-10 and Subspace.span(m, sub.ambient_dim).residual(sub.basis) < 1e-10


# ---- bracket

def test_bracket_axb():
    assert np.array_equal(bracket(cat.axb(), e(2, 0), e(2, 1)), e(2, 1))


def test_bracket_heisenberg_antisymmetric_example():
    assert np.array_equal(bracket(cat.heisenberg3(), e(3, 1), e(3, 0)), -e(3, 2))


def test_bracket_dimension_mismatch():
    with pytest.raises(InputError):
        bracket(cat.axb(), np.ones(3), np.ones(2))


vec4 = arrays(float, 4, elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(vec4, vec4, vec4, st.floats(-5, 5))
def test_bracket_bilinear_and_alternating(x, y, z, a):
    g = cat.heintze_heis4()
    assert np.allclose(g.bracket(x, x), 0.0, atol=1e-12)
    assert np.allclose(g.bracket(x, y), -g.bracket(y, x), atol=1e-12)
    lhs = g.bracket(a * x + z, y)
    rhs = a * g.bracket(x, y) + g.bracket(z, y)
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


# ---- validate

def test_validate_heis4_passes():
    assert validate(cat.heintze_heis4()).passed


def test_validate_abelian_passes():
    assert validate(cat.abelian(3)).passed


def test_validate_antisymmetry_failure():
    c = np.zeros((4, 4, 4))
    c[1, 2, 3] = 1.0
    rep = validate(StructureConstants(c))
    assert not rep.passed
    assert rep.checks["antisymmetry_residual"] == pytest.approx(1.0)
    assert any("antisymmetry" in f for f in rep.failures)


def test_validate_jacobi_failure():
    # [e1,e2]=e3, [e1,e3]=e1 breaks Jacobi on (e1, e2, e3) with [e2,e3]=e2
    g = StructureConstants.from_brackets(3, {(0, 1): {2: 1}, (0, 2): {0: 1}, (1, 2): {1: 1}})
    rep = validate(g)
    assert not rep.passed and any("Jacobi" in f for f in rep.failures)


def test_catalog_and_random_algebras_validate(entry, rng):
    assert validate(entry.algebra).passed
    assert validate(cat.random_solvable(rng)).passed


# ---- descending sequence, against an exact rational oracle

@pytest.mark.parametrize("name", [e.name for e in cat.catalog()])
def test_descending_sequence_matches_exact_oracle(name):
    g = cat.get(name).algebra
    seq = descending_sequence(g)
    exact = exact_descending_sequence(g.c)
    assert len(seq) == len(exact)
    for sub, cols in zip(seq, exact):
        assert same_subspace(sub, cols)


def test_descending_sequence_axb():
    seq = descending_sequence(cat.axb())
    assert [s.dim for s in seq] == [1, 0]
    assert np.allclose(seq[0].basis[:, 0], e(2, 1))


def test_descending_sequence_heis4():
    seq = descending_sequence(cat.heintze_heis4())
    assert [s.dim for s in seq] == [3, 1, 0]
    assert np.allclose(seq[1].basis[:, 0], e(4, 3))
    assert same_subspace(seq[0], [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def test_descending_sequence_abelian():
    seq = descending_sequence(cat.abelian(2))
    assert [s.dim for s in seq] == [0]


def test_descending_sequence_non_nilpotent():
    with pytest.raises(NotNilpotentError, match="not nilpotent"):
        descending_sequence(sl2())


def test_descending_sequence_nested_and_bracket_closed(rng):
    for _ in range(20):
        g = cat.random_solvable(rng)
        seq = descending_sequence(g)
        l0 = seq[0]
        for prev, nxt in zip(seq, seq[1:]):
            assert prev.contains(nxt, 1e-8)
            brs = np.einsum("ia,jb,ijk->kab", l0.basis, prev.basis, g.c).reshape(g.dim, -1)
            assert nxt.residual(brs) <= 1e-8 * max(1.0, np.abs(brs).max())


# ---- solvability

@pytest.mark.parametrize("builder,expected", [
    (cat.axb, True), (cat.heintze_heis4, True), (sl2, False), (cat.heisenberg3, True), (cat.rot3, True),
])
def test_is_solvable(builder, expected):
    assert is_solvable(builder()) is expected


def test_is_nilpotent():
    assert is_nilpotent(cat.heisenberg3()) and is_nilpotent(cat.filiform4())
    assert not is_nilpotent(cat.axb())


# ---- quotients and induced endomorphisms

def test_quotient_map_invariants(rng):
    g = cat.heintze_heis4()
    seq = descending_sequence(g)
    q = QuotientMap.between(seq[0], seq[1])
    assert q.dim == 2
    assert np.abs(q.projection @ seq[1].basis).max() <= 1e-10
    assert np.linalg.matrix_rank(q.projection @ seq[0].basis) == 2
    assert np.allclose(q.projection @ q.section, np.eye(2))


def test_quotient_requires_containment():
    with pytest.raises(InputError):
        QuotientMap.between(Subspace.span([e(3, 0)], 3), Subspace.span([e(3, 1)], 3))


def test_induced_endomorphism_heis4_quotient():
    g = cat.heintze_heis4()
    seq = descending_sequence(g)
    m = induced_endomorphism(g, e(4, 0), QuotientMap.between(seq[0], seq[1]))
    assert np.allclose(m, np.eye(2), atol=1e-12)


def test_induced_endomorphism_heis4_bottom():
    g = cat.heintze_heis4()
    seq = descending_sequence(g)
    m = induced_endomorphism(g, e(4, 0), QuotientMap.between(seq[1], seq[2]))
    assert np.allclose(m, [[2.0]], atol=1e-12)


def test_induced_endomorphism_zero_y0():
    g = cat.heintze_heis4()
    seq = descending_sequence(g)
    m = induced_endomorphism(g, np.zeros(4), QuotientMap.between(seq[0], seq[1]))
    assert np.array_equal(m, np.zeros((2, 2)))


def test_induced_endomorphism_invariance_violation():
    g = sl2()
    num = Subspace.span([e(3, 1)], 3)
    with pytest.raises(InvarianceError):
        induced_endomorphism(g, e(3, 2), QuotientMap.between(num, Subspace.zero(3)))


def test_induced_endomorphism_intertwines_projection(rng):
    for _ in range(20):
        g = cat.random_solvable(rng)
        seq = descending_sequence(g)
        y0 = rng.normal(size=g.dim)
        for i in range(len(seq) - 1):
            q = QuotientMap.between(seq[i], seq[i + 1])
            m = induced_endomorphism(g, y0, q)
            v = seq[i].basis @ rng.normal(size=seq[i].dim)
            assert np.allclose(m @ q(v), q(g.bracket(y0, v)), atol=1e-8 * (1 + g.scale) * np.linalg.norm(y0))


# ---- spectra

def test_spectrum_examples():
    assert spectrum(np.diag([1.0, 1.0, 2.0])).distance([1, 1, 2]) < 1e-12
    rot = spectrum([[0.0, -1.0], [1.0, 0.0]])
    assert rot.distance([1j, -1j]) < 1e-12
    assert spectrum(np.zeros((1, 1))).distance([0]) == 0.0


def test_spectrum_multiset_and_conjugates(rng):
    for _ in range(50):
        a = rng.normal(size=(5, 5))
        s = spectrum(a)
        assert len(s) == 5
        assert s.conjugate_closed()
        assert abs(s.eigenvalues.sum() - np.trace(a)) < 1e-9 * (1 + np.abs(a).sum())


def test_spectrum_distance_size_mismatch():
    assert Spectrum([1, 2]).distance([1]) == float("inf")


def test_spectrum_all_positive_threshold():
    assert Spectrum([1 + 1j, 1 - 1j, 2]).all_positive()
    assert not Spectrum([1j, -1j]).all_positive()
    assert not Spectrum([1e-9, 1.0]).all_positive()
    assert Spectrum([]).all_positive()


def test_spectrum_rejects_nonsquare():
    with pytest.raises(InputError):
        spectrum(np.ones((2, 3)))


# ---- Killing form

def test_killing_form_axb():
    assert np.allclose(killing_form(cat.axb()), [[1.0, 0.0], [0.0, 0.0]])


def test_killing_form_heisenberg_vanishes():
    assert np.array_equal(killing_form(cat.heisenberg3()), np.zeros((3, 3)))


def test_killing_form_symmetric(entry):
    b = killing_form(entry.algebra)
    assert np.allclose(b, b.T)


# ---- basis change

def test_change_basis_axb():
    g2 = change_basis(cat.axb(), np.diag([2.0, 1.0]))
    assert np.allclose(g2.bracket(e(2, 0), e(2, 1)), 2 * e(2, 1))


def test_change_basis_singular():
    with pytest.raises(InputError, match="singular"):
        change_basis(cat.axb(), np.ones((2, 2)))


def test_change_basis_round_trip_and_spectrum_invariance(entry, rng):
    g = entry.algebra
    for _ in range(10):
        p = cat.random_well_conditioned(g.dim, rng)
        h = change_basis(g, p)
        back = change_basis(h, np.linalg.inv(p))
        assert np.allclose(back.c, g.c, atol=1e-9 * (1 + g.scale))
        assert validate(h).passed
        y = rng.normal(size=g.dim)
        # ad_h(P^-1 y) = P^-1 ad_g(y) P
        adh = h.ad(np.linalg.solve(p, y))
        assert spectrum(adh).distance(spectrum(g.ad(y))) < 1e-7 * (1 + np.abs(g.ad(y)).max())
        assert [s.dim for s in descending_sequence(h)] == [s.dim for s in descending_sequence(g)]


# ---- derivations and semidirect products

def test_derivations_of_heisenberg():
    ders = derivations(cat.heisenberg3())
    # gl(2) acting on (e1, e2) plus the 2 maps e1, e2 -> e3; trace on e3 fixed
    assert len(ders) == 6
    g = cat.heisenberg3()
    for d in ders:
        for i in range(3):
            for j in range(3):
                x, y = e(3, i), e(3, j)
                assert np.allclose(d @ g.bracket(x, y), g.bracket(d @ x, y) + g.bracket(x, d @ y), atol=1e-10)


def test_random_solvable_is_solvable(rng):
    for _ in range(20):
        g = cat.random_solvable(rng)
        assert validate(g).passed
        assert is_solvable(g)
        assert derived_algebra(g).dim < g.dim


# ---- JSON

def test_algebra_json_round_trip(tmp_path, entry):
    path = tmp_path / "alg.json"
    path.write_text(json.dumps(algebra_to_dict(entry.algebra)))
    g = load_algebra(path)
    assert np.array_equal(g.c, entry.algebra.c)
    assert g.labels == entry.algebra.labels


def test_algebra_json_one_based_and_closure():
    g = algebra_from_dict({"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": {"2": 1.0}}]})
    assert np.array_equal(g.c, cat.axb().c)


def test_algebra_json_conflict():
    data = {"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": {"2": 1.0}},
                                   {"i": 2, "j": 1, "coeffs": {"2": 1.0}}]}
    with pytest.raises(InputError, match="conflicting"):
        algebra_from_dict(data)


def test_algebra_json_consistent_duplicate_accepted():
    data = {"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": {"2": 1.0}},
                                   {"i": 2, "j": 1, "coeffs": {"2": -1.0}}]}
    assert np.array_equal(algebra_from_dict(data).c, cat.axb().c)


@pytest.mark.parametrize("bad", [{}, {"dim": 0}, {"dim": 2, "brackets": [{"i": 1}]},
                                 {"dim": 2, "brackets": [{"i": 1, "j": 3, "coeffs": {"1": 1}}]}])
def test_algebra_json_malformed(bad):
    with pytest.raises(InputError):
        algebra_from_dict(bad)


def test_restricted_endomorphism_on_l0():
    g = cat.heintze_heis4()
    m = restricted_endomorphism(g, e(4, 0), descending_sequence(g)[0])
    assert spectrum(m).distance([1, 1, 2]) < 1e-12
