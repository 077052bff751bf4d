import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gravisat import asym
from gravisat.equilibrium import NoEquilibrium
from gravisat.model import InertiaTensor
from gravisat.rem import GMU_STABLE, UNSTABLE, regular_stability
from oracles import (
    KEPLER_XI2_LAGRANGE_R2,
    R_CRIT_LAGRANGE,
    R_CRIT_SQ_LAGRANGE,
    kepler_rate2,
    lagrange_inertia,
    rel_err,
)

LAGRANGE = (0.45, 0.25, 0.30)
PAIRS = [(r, x) for r in (1, 2, 3) for x in (1, 2, 3) if r != x]
lagrange = st.integers(0, 10**6).map(lambda s: lagrange_inertia(np.random.default_rng(s)))


def test_orthogonal_lagrange_value():
    eq = asym.solve_orthogonal(LAGRANGE, 2.0, 2, 1)
    assert eq.orbital_rate**2 == pytest.approx(KEPLER_XI2_LAGRANGE_R2, abs=1e-15)
    assert eq.residual_norm < 1e-12


@pytest.mark.parametrize("axis_R,axis_xi", PAIRS)
def test_all_six_orthogonal_at_R5(axis_R, axis_xi):
    eq = asym.solve_orthogonal(LAGRANGE, 5.0, axis_R, axis_xi)
    assert eq.residual_norm < 1e-12
    I_R = LAGRANGE[axis_R - 1]
    assert eq.orbital_rate**2 == pytest.approx(kepler_rate2(I_R, 5.0), rel=1e-8)


def test_orthogonal_rejects_spherical():
    with pytest.raises(ValueError):
        asym.solve_orthogonal((1 / 3, 1 / 3, 1 / 3), 2.0)


def test_parallel_values():
    eq = asym.solve_parallel((0.25, 0.40, 0.35), 2)
    assert eq.radius == pytest.approx(np.sqrt(0.3), abs=1e-15)
    assert eq.radius == pytest.approx(0.5477226, abs=1e-7)
    assert asym.parallel_radius2(0.34) == pytest.approx(0.03)
    assert asym.parallel_radius2(0.34) < 0.75
    with pytest.raises(NoEquilibrium):
        asym.solve_parallel((0.30, 0.30 + 1e-3, 0.40 - 1e-3), 1)


def test_conical_coefficients():
    # the example inertia (0.2, 0.5, 0.3) is outside the admissible set; the polynomial is checked on raw numbers
    for R in (0.5, 1.0, 1.7):
        A4, A2, A0 = asym.conical_coefficients(0.2, 0.5, R)
        assert A4 == pytest.approx(20.25)
        assert A2 == pytest.approx(1.8 * (19 * R * R - 12))
        assert A0 == pytest.approx((2 * R * R - 1.5) * (8 * R * R - 3.3))


def test_conical_solutions_in_window_and_absent_far_away():
    I = (0.25, 0.40, 0.35)
    found = 0
    for R in np.linspace(0.3, 0.55, 26):
        for plane in ((1, 2), (2, 3)):
            for eq in asym.solve_conical(I, R, plane):
                found += 1
                assert eq.residual_norm < 1e-10
                lo, hi = asym.conical_window(I, plane, eq.aux["psi"])
                assert lo - 1e-9 <= R <= hi + 1e-9
    assert found > 0
    assert list(asym.solve_conical(I, 10.0, (1, 2))) == []


def test_conical_window_endpoints_are_sign_changes():
    I = InertiaTensor(0.25, 0.40, 0.35)
    psi = 0.6
    lo, hi = asym.conical_window(I, (1, 2), psi)
    Ip = 0.25 * np.cos(psi) ** 2 + 0.40 * np.sin(psi) ** 2
    f = lambda R: 2 * R * R + 3 - 9 * Ip  # noqa: E731
    g = lambda R: 2 * R * R + 3 - 15 * Ip  # noqa: E731
    eps = 1e-6
    if lo > 0:
        assert f(lo - eps) < 0 < f(lo + eps)
    assert g(hi - eps) < 0 < g(hi + eps)


def test_conical_window_rejects_axisymmetric():
    with pytest.raises(ValueError):
        asym.conical_window((0.4, 0.3, 0.3), (2, 3), 0.5)


@settings(max_examples=40)
@given(lagrange, st.floats(0.3, 20.0))
def test_lagrange_signs(I, R):
    e = asym.orth_eigs_closed(I, R, 1, 2)
    assert e.A1 > 0 and e.A2 > 0 and e.S2 > 0 and e.S3 > 0


@settings(max_examples=40)
@given(lagrange)
def test_S1_positive_at_R2(I):
    assert asym.orth_eigs_closed(I, 2.0, 1, 2).S1 > 0


def test_closed_form_signs_match_engine_grid():
    I = LAGRANGE
    for R in np.linspace(1.0, 6.0, 10):
        for x, r in [(1, 2), (3, 2), (2, 1), (1, 3), (3, 1), (2, 3)][:10]:
            e = asym.orth_eigs_closed(I, R, x, r)
            eq = asym.solve_orthogonal(I, R, r, x)
            v, _ = regular_stability(eq.inertia, eq.q, eq.gen)
            closed_neg = sum(val < 0 for val in e.arnold + e.smale)
            assert closed_neg == v.negative_count


def test_r_crit_lagrange_value():
    rc = asym.r_crit(LAGRANGE)
    assert rc**2 == pytest.approx(R_CRIT_SQ_LAGRANGE, abs=1e-12)
    assert rc == pytest.approx(R_CRIT_LAGRANGE, abs=1e-4)
    # positive root of 2x^2 - 3.45x - 1.6875
    assert 2 * rc**4 - 3.45 * rc**2 - 1.6875 == pytest.approx(0.0, abs=1e-12)
    assert abs(asym.orth_eigs_closed(LAGRANGE, rc, 1, 2).S1) < 1e-10


def test_r_crit_below_two():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        assert asym.r_crit(lagrange_inertia(rng)) < 2.0


def test_r_crit_requires_lagrange():
    with pytest.raises(asym.LagrangeOrderingError):
        asym.r_crit((0.25, 0.45, 0.30))


def test_stability_flips_across_r_crit():
    rc = asym.r_crit(LAGRANGE)
    for R, expected in ((rc - 0.05, UNSTABLE), (rc + 0.05, GMU_STABLE)):
        eq = asym.solve_orthogonal(LAGRANGE, R, 2, 1)
        assert regular_stability(eq.inertia, eq.q, eq.gen)[0].classification == expected


def test_parallel_arnold_never_both_positive():
    rng = np.random.default_rng(7)
    for _ in range(200):
        I = lagrange_inertia(rng) if rng.random() < 0.5 else rng.dirichlet([4, 4, 4])
        if not np.all(I < 0.5) or I[1] <= 1 / 3 + 1e-6:
            continue
        for x in (0.1, 0.7, 2.0):
            e = asym.par_eigs_closed(I, 2, x)
            assert not (e.A1 > 0 and e.A2 > 0)


def test_parallel_degenerate_rates_zero_smale():
    I = (0.25, 0.40, 0.35)
    rates = asym.par_degenerate_rates(I, 2)
    for k, x in enumerate(rates):
        e = asym.par_eigs_closed(I, 2, x)
        assert abs((e.S1, e.S2)[k]) < 1e-10


def test_parallel_engine_agreement():
    I = (0.25, 0.40, 0.35)
    for x in (0.2, 0.9, 1.6):
        eq = asym.solve_parallel(I, 2, x)
        e = asym.par_eigs_closed(I, 2, x)
        v, sp = regular_stability(eq.inertia, eq.q, eq.gen)
        closed = sorted([e.A1, e.A2, e.S1, e.S2, e.S3], key=np.sign)
        assert sum(c < 0 for c in closed) == v.negative_count


def test_delta_orth_nonzero_under_lagrange():
    rng = np.random.default_rng(3)
    for _ in range(50):
        I = lagrange_inertia(rng)
        rc = asym.r_crit(I)
        assert asym.delta_orth(I, rc) != 0.0
        for R in np.linspace(0.7, 10, 20):
            try:
                assert asym.delta_orth(I, R) != 0.0
            except NoEquilibrium:
                pass


def test_delta_orth_zero_set():
    I = (0.2, 0.35, 0.45)
    R = np.sqrt((15 * 0.35 - 6 * 0.2 - 3) / 8)
    assert asym.kepler_xi2(0.35, R) > 0
    assert abs(asym.delta_orth(I, R)) < 1e-14
    assert abs(asym.delta_orth(I, 1.1 * R)) > 1e-6


def test_par_bifurcation_points():
    pb = asym.par_bifurcation_points((0.25, 0.40, 0.35))
    assert pb.R_star == pytest.approx(np.sqrt(0.3), abs=1e-15)
    assert (pb.alpha1, pb.alpha2, pb.alpha3) == pytest.approx((0.55, 0.40, 0.65), abs=1e-15)
    assert pb.R_star == asym.solve_parallel((0.25, 0.40, 0.35), 2).radius
    assert asym.kepler_xi2(0.40, pb.R_star) == pytest.approx(0.0, abs=1e-12)


def test_momentum_profile_identity():
    I = LAGRANGE
    rc = asym.r_crit(I)
    for R in np.linspace(0.9, 6, 40):
        m2, dm2 = asym.momentum_norm_profile(I, R)
        S1 = asym.orth_eigs_closed(I, R, 1, 2).S1
        if abs(S1) > 1e-9:
            assert np.sign(dm2) == np.sign(S1)
        # |mu|^2 agrees with the solver
        eq = asym.solve_orthogonal(I, R, 2, 1)
        assert m2 == pytest.approx(float(eq.mu @ eq.mu), rel=1e-12)
    assert abs(asym.momentum_norm_profile(I, rc)[1]) < 1e-10
    assert asym.momentum_norm_profile(I, 1e3)[0] > asym.momentum_norm_profile(I, 1e2)[0] > 10


def test_asym_diagram_junction():
    I = (0.25, 0.40, 0.35)
    d = asym.asym_diagram(I, 2.0, 30)
    j = d.junction("R*")
    assert set(j.branches) == {"Orth^1_2", "Orth^3_2", "Par_2"}
    assert j.location**2 == pytest.approx((9 * 0.40 - 3) / 2, abs=1e-12)
    for name in ("Orth^1_2", "Orth^3_2"):
        b = d.branches[name]
        assert b.params[0] == pytest.approx(j.location) and b.values[0] == 0.0
    for name, plane in (("Obl_12", (1, 2)), ("Obl_23", (2, 3))):
        b = d.branches[name]
        assert b.params, name
        for R in b.params:
            sols = asym.solve_conical(I, R, plane)
            assert any(asym.conical_window(I, plane, s.aux["psi"]) for s in sols)
