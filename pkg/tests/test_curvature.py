import numpy as np
import pytest

from negcurv import catalog as cat
from negcurv.curvature import (
    FlagSpec,
    LeftInvariantMetric,
    flag_curvature,
    growth_constant_check,
    riemannian_sectional,
    scan_flags,
    u_vector,
    witness_nonnegative,
)
from negcurv.errors import DomainError, InputError, NotApplicableError, NotSolvableError
from negcurv.lie_core import StructureConstants
from negcurv.minkowski import CustomNorm, RandersNorm, RiemannianNorm

from flaggen import abelian_flags, heisenberg3_flags, rot3_flags
from oracles import koszul_sectional_bruteforce

E3 = np.eye(3)


def metric(alg, a=None, b=None):
    n = alg.dim
    a = np.eye(n) if a is None else np.asarray(a, dtype=float)
    norm = RiemannianNorm(a) if b is None else RandersNorm(a, b)
    return LeftInvariantMetric(alg, norm)


def random_spd(rng, n):
    m = rng.normal(size=(n, n))
    return m @ m.T + n * np.eye(n)


# ---- U vector and the homogeneous formula

def test_u_vector_rot3_euclidean():
    assert np.allclose(u_vector(metric(cat.rot3()), E3[1], E3[2]), 0.0, atol=1e-14)


@pytest.mark.parametrize("a,b", [(1.0, 2.0), (3.0, 0.5), (2.0, 2.0)])
def test_u_vector_rot3_diagonal(a, b):
    u = u_vector(metric(cat.rot3(), np.diag([1.0, a, b])), E3[1], E3[2])
    assert np.allclose(u, [(a - b) / 2, 0.0, 0.0], atol=1e-14)


def test_u_vector_abelian(rng):
    m = metric(cat.abelian(3), random_spd(rng, 3))
    assert np.array_equal(u_vector(m, rng.normal(size=3), rng.normal(size=3)), np.zeros(3))


def test_flag_curvature_rot3_euclidean():
    rep = flag_curvature(metric(cat.rot3()), FlagSpec(E3[1], E3[2]))
    assert rep.value == 0.0 and rep.method == "homogeneous"


def test_flag_curvature_rot3_diag112():
    rep = flag_curvature(metric(cat.rot3(), np.diag([1.0, 1.0, 2.0])), FlagSpec(E3[1], E3[2]))
    assert rep.value == pytest.approx(1 / 8, rel=1e-14)
    assert rep.numerator == pytest.approx(1 / 4) and rep.denominator == pytest.approx(2.0)


def test_flag_curvature_abelian():
    assert flag_curvature(metric(cat.abelian(2)), FlagSpec([1.0, 0.0], [0.0, 1.0])).value == 0.0


def test_flag_curvature_not_applicable_carries_residuals():
    m = metric(cat.axb())
    with pytest.raises(NotApplicableError) as info:
        flag_curvature(m, FlagSpec([1.0, 0.0], [0.0, 1.0]))
    assert info.value.residuals["commuting"] > 1e-8


def test_flag_curvature_orthogonality_violation():
    # rot3 with an off-diagonal metric: e1 is not orthogonal to [e1, y] = -e2
    a = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.3], [0.0, 0.3, 1.0]])
    with pytest.raises(NotApplicableError) as info:
        flag_curvature(metric(cat.rot3(), a), FlagSpec(E3[1], E3[2]))
    assert info.value.residuals["orthogonality"] > 1e-8


def test_flag_spec_validation():
    with pytest.raises(DomainError):
        FlagSpec([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        FlagSpec([1.0, 2.0], [2.0, 4.0])
    with pytest.raises(InputError):
        FlagSpec([1.0, 0.0], [1.0, 0.0, 0.0])


def test_metric_dimension_mismatch():
    with pytest.raises(InputError):
        LeftInvariantMetric(cat.axb(), RiemannianNorm(np.eye(3)))


def test_custom_norm_failing_audit_is_flagged_unreliable():
    quartic = CustomNorm(2, lambda y: float(np.sum(y ** 4) ** 0.25))
    m = LeftInvariantMetric(cat.abelian(2), quartic)
    assert not m.reliable
    rep = flag_curvature(m, FlagSpec([1.0, 1.0], [1.0, -1.0]))
    assert rep.value == 0.0 and not rep.reliable


# ---- oracle

def test_oracle_axb():
    assert riemannian_sectional(metric(cat.axb()), [1.0, 0.0], [0.0, 1.0]) == pytest.approx(-1.0, abs=1e-12)


def test_oracle_abelian(rng):
    m = metric(cat.abelian(3), random_spd(rng, 3))
    assert riemannian_sectional(m, rng.normal(size=3), rng.normal(size=3)) == 0.0


def test_oracle_rh3_constant(rng):
    m = metric(cat.rh(3))
    for _ in range(50):
        assert riemannian_sectional(m, rng.normal(size=3), rng.normal(size=3)) == pytest.approx(-1.0, abs=1e-10)


def test_oracle_matches_index_form(rng):
    for _ in range(30):
        g = cat.random_solvable(rng)
        a = random_spd(rng, g.dim)
        x, y = rng.normal(size=g.dim), rng.normal(size=g.dim)
        want = koszul_sectional_bruteforce(g.c, a, x, y)
        assert riemannian_sectional(metric(g, a), x, y) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_oracle_symmetries(rng):
    g = cat.heintze_heis4()
    m = metric(g, random_spd(rng, 4))
    for _ in range(20):
        x, y = rng.normal(size=4), rng.normal(size=4)
        k = riemannian_sectional(m, x, y)
        assert riemannian_sectional(m, y, x) == pytest.approx(k, abs=1e-9 * (1 + abs(k)))
        a, b, c, d = rng.normal(size=4)
        assert riemannian_sectional(m, a * x + b * y, c * x + d * y) == pytest.approx(k, abs=1e-9 * (1 + abs(k)))


def test_oracle_rejects_dependent_and_finsler():
    with pytest.raises(DomainError):
        riemannian_sectional(metric(cat.axb()), [1.0, 1.0], [2.0, 2.0])
    with pytest.raises(InputError):
        riemannian_sectional(metric(cat.axb(), b=[0.1, 0.0]), [1.0, 0.0], [0.0, 1.0])


# ---- invariants of the formula

def _rot3_metrics(rng):
    return [np.eye(3), np.diag([1.0, 1.0, 2.0]), random_spd(rng, 3)]


def test_riemannian_agreement(rng):
    for a in _rot3_metrics(rng):
        m = metric(cat.rot3(), a)
        for u, v in rot3_flags(m.norm, rng, 100):
            k = flag_curvature(m, FlagSpec(u, v)).value
            assert k == pytest.approx(riemannian_sectional(m, u, v), abs=1e-6 * (1 + abs(k)))
    m = metric(cat.abelian(3), random_spd(rng, 3))
    for u, v in abelian_flags(3, rng, 100):
        assert flag_curvature(m, FlagSpec(u, v)).value == pytest.approx(riemannian_sectional(m, u, v), abs=1e-6)


def test_randers_with_zero_b_matches_riemannian(rng):
    a = random_spd(rng, 3)
    riem = metric(cat.rot3(), a)
    rand = metric(cat.rot3(), a, np.zeros(3))
    for u, v in rot3_flags(riem.norm, rng, 30):
        k1 = flag_curvature(riem, FlagSpec(u, v)).value
        k2 = flag_curvature(rand, FlagSpec(u, v)).value
        assert k2 == pytest.approx(k1, abs=1e-9)


def test_plane_and_pole_scaling(rng):
    b = np.array([0.0, 0.2, -0.3])
    m = metric(cat.rot3(), random_spd(rng, 3), b)
    for u, v in rot3_flags(m.norm, rng, 20):
        k = flag_curvature(m, FlagSpec(u, v)).value
        for alpha in (-1.0, 0.5, 3.0):
            assert flag_curvature(m, FlagSpec(u, v + alpha * u)).value == pytest.approx(k, abs=1e-8)
        for lam in (0.5, 2.0):
            assert flag_curvature(m, FlagSpec(lam * u, v)).value == pytest.approx(k, abs=1e-8)


def test_formula_never_negative(rng):
    cases = [(cat.rot3(), rot3_flags), (cat.heisenberg3(), heisenberg3_flags)]
    for alg, gen in cases:
        for b in (None, np.array([0.1, -0.2, 0.3])):
            m = metric(alg, random_spd(rng, 3), b)
            for u, v in gen(m.norm, rng, 50):
                assert flag_curvature(m, FlagSpec(u, v)).value >= -1e-12


def test_heisenberg_formula_against_oracle(rng):
    m = metric(cat.heisenberg3())
    for u, v in heisenberg3_flags(m.norm, rng, 40):
        k = flag_curvature(m, FlagSpec(u, v)).value
        assert k == pytest.approx(riemannian_sectional(m, u, v), abs=1e-8 * (1 + abs(k)))


# ---- scans

def test_scan_axb():
    s = scan_flags(metric(cat.axb()), samples=100)
    assert s.min == pytest.approx(-1.0, abs=1e-9) and s.max == pytest.approx(-1.0, abs=1e-9)


def test_scan_heis4_negative():
    s = scan_flags(metric(cat.heintze_heis4()), samples=300)
    assert s.accepted == 300 and s.max < 0


def test_scan_rot3_formula_includes_zero():
    s = scan_flags(metric(cat.rot3()), samples=50, method="homogeneous")
    assert s.accepted > 0 and s.min == 0.0
    assert s.to_dict()["count_nonnegative"] == s.accepted


def test_scan_is_independent_of_jobs():
    m = metric(cat.rot3(), np.diag([1.0, 1.0, 2.0]), [0.0, 0.1, 0.0])
    a = scan_flags(m, samples=40, seed=3, jobs=1)
    b = scan_flags(m, samples=40, seed=3, jobs=4)
    assert np.array_equal(a.values, b.values)


def test_scan_empty_is_not_error():
    s = scan_flags(metric(cat.axb(), b=[0.1, 0.1]), samples=5)
    assert s.empty and s.to_dict()["min"] is None


def test_scan_rejects_bad_arguments():
    with pytest.raises(InputError):
        scan_flags(metric(cat.axb()), samples=0)
    with pytest.raises(InputError):
        scan_flags(metric(cat.axb(), b=[0.1, 0.1]), method="oracle")


# ---- witnesses

def test_witness_rot3_euclidean():
    w = witness_nonnegative(metric(cat.rot3()))
    assert w is not None and w.case == "b"
    assert np.allclose(w.flag.pole, E3[1]) and np.allclose(w.flag.partner, E3[2])
    assert w.report.value == 0.0


def test_witness_abelian():
    w = witness_nonnegative(metric(cat.abelian(2)))
    assert w is not None and w.report.value == 0.0
    assert np.allclose(np.abs(np.vstack([w.flag.pole, w.flag.partner])), np.eye(2))


@pytest.mark.parametrize("name", ["axb", "heintze_heis4", "rh3", "rh4", "rh5", "rh6"])
def test_no_witness_on_heintze_algebras(name):
    assert witness_nonnegative(metric(cat.get(name).algebra)) is None


@pytest.mark.parametrize("builder", [cat.rot3, cat.heisenberg3, lambda: cat.abelian(3)])
def test_witness_for_general_metrics(builder, rng):
    alg = builder()
    for b in (None, rng.uniform(-0.25, 0.25, size=3)):
        w = witness_nonnegative(metric(alg, random_spd(rng, 3), b), budget=300)
        assert w is not None and w.report.value >= -1e-12


def test_witness_rejects_non_solvable():
    sl2 = StructureConstants.from_brackets(3, {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}})
    with pytest.raises(NotSolvableError):
        witness_nonnegative(metric(sl2))


# ---- growth constant

def test_growth_axb():
    rep = growth_constant_check(metric(cat.axb()))
    assert rep.c == pytest.approx(1.0, abs=1e-9) and rep.holds and not rep.inconsistent
    assert np.allclose(rep.y0, [1.0, 0.0])


def test_growth_heis4():
    rep = growth_constant_check(metric(cat.heintze_heis4()), y0=np.eye(4)[0])
    assert rep.c == pytest.approx(1.0, abs=1e-7) and rep.holds


def test_growth_randers_holds(rng):
    m = metric(cat.rh(4), np.eye(4), [0.0, 0.3, -0.2, 0.1])
    rep = growth_constant_check(m)
    assert rep.c > 0 and rep.holds


def test_growth_refuses_rot3():
    with pytest.raises(NotApplicableError):
        growth_constant_check(metric(cat.rot3()))
