import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gravisat import axi
from gravisat.equilibrium import NoEquilibrium
from gravisat.model import AXI, GroupElement, act, adjoint
from gravisat.potential import locked_inertia
from gravisat.rem import GMU_STABLE, INCONCLUSIVE, UNSTABLE
from oracles import ALPHA_CONIC_04_03_R2, CYL_XI1_SQ, H2_PROLATE, HYP_BOUND_03, HYP_ETA, HYP_XI_MAG, ISOLATED_XI2_SQ, rel_err

OBLATE = (0.4, 0.3)
PROLATE = (0.2, 0.4)


def state(eq):
    return np.concatenate([eq.q.position, eq.gen.vector])


# --- existence ---


def test_cylindrical_value():
    eq = axi.solve_cylindrical(0.4, 0.3, 2.0, 1.0)
    assert eq.xi[0] ** 2 == pytest.approx(CYL_XI1_SQ, abs=1e-15)
    assert eq.residual_norm < 1e-12
    assert axi.solve_cylindrical(0.4, 0.3, 2.0, 0.0).eta == 0.0


@pytest.mark.parametrize("I1,I2", [OBLATE, PROLATE])
def test_cylindrical_meets_hyperbolic(I1, I2):
    cyl = axi.solve_cylindrical(I1, I2, 2.0, (I2 - I1) / I1)
    hyp = axi.solve_hyperbolic(I1, I2, 2.0, np.pi / 2 - 1e-9)
    assert np.abs(state(cyl) - state(hyp)).max() < 1e-8


def test_hyperbolic_values():
    eq = axi.solve_hyperbolic(0.4, 0.3, 2.0, np.pi / 6)
    assert np.linalg.norm(eq.xi) == pytest.approx(HYP_XI_MAG, abs=1e-7)
    assert eq.eta == pytest.approx(HYP_ETA, abs=1e-7)
    assert eq.residual_norm < 1e-12
    z = axi.solve_hyperbolic(0.4, 0.3, 2.0, 0.0)
    assert z.eta == 0.0 and z.xi[0] == 0.0 and z.xi[1] == 0.0 and z.xi[2] > 0
    with pytest.raises(ValueError):
        axi.solve_hyperbolic(0.4, 0.3, 2.0, np.pi / 2)


@given(st.floats(0.05, 1.5))
def test_hyperbolic_theta_sign_is_a_symmetry(th):
    a = axi.solve_hyperbolic(0.4, 0.3, 2.0, th)
    b = axi.solve_hyperbolic(0.4, 0.3, 2.0, -th)
    g = GroupElement.fixing_body(np.diag([1.0, 1.0, -1.0]), AXI)
    assert act(g, a.q, AXI).distance(b.q) < 1e-14
    assert np.allclose(adjoint(g, a.gen), b.gen.vector, atol=1e-15)


def test_isolated_value_and_kernel():
    eq = axi.solve_isolated(0.2, 0.4, 2.0)
    assert eq.xi[1] ** 2 == pytest.approx(ISOLATED_XI2_SQ, abs=1e-15)
    assert eq.residual_norm < 1e-12
    L = locked_inertia(eq.inertia, eq.q, AXI)
    assert np.allclose(L @ np.array([1.0, 0, 0, 1.0]), 0.0)


def test_isolated_is_conical_limit():
    lim = axi.conical_limits(0.2, 0.4, 2.0)
    assert lim.isolated_gap < 1e-6
    assert abs(lim.psi_to_0.eta) < 1e-6


def test_no_family_below_discriminant():
    with pytest.raises(NoEquilibrium):
        axi.solve_cylindrical(0.2, 0.4, 0.3, 1.0)
    with pytest.raises(NoEquilibrium):
        axi.solve_hyperbolic(0.2, 0.4, 0.3, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([OBLATE, PROLATE, (0.36, 0.32)]), st.floats(1.0, 50.0), st.floats(0.05, 1.5))
def test_conical_residual(I, R, psi):
    try:
        eq = axi.solve_conical_axi(*I, R, psi)
    except NoEquilibrium:
        return
    assert eq.residual_norm < 1e-10


def test_conical_offset_leading_term():
    I1, I2, R, psi = 0.2, 0.4, 10.0, np.pi / 4
    eq = axi.solve_conical_axi(I1, I2, R, psi)
    s2 = float(eq.q.position @ eq.xi) ** 2 / (float(eq.xi @ eq.xi) * R * R)
    lead = 9 * (I2 - I1) ** 2 * np.sin(psi) ** 2 * np.cos(psi) ** 2 / R**4
    assert lead == pytest.approx(9e-6 * (0.2 / 0.2) ** 2 * 0.25 / 0.25 * 0.04 / 0.04, rel=1e-12)
    # the next correction is relatively O(1/R^2)
    assert abs(s2 - lead) < 10 * lead / R**2


def test_conical_spin_asymptote():
    I1, I2, R, psi = 0.2, 0.4, 100.0, np.pi / 4
    eq = axi.solve_conical_axi(I1, I2, R, psi)
    lead = 4 * ((I2 - I1) / I1) * np.sin(psi) * R**-1.5
    assert abs(eq.eta - lead) < 0.1 * abs(lead)


def test_parallel_axi():
    assert axi.parallel_axi_radius2(0.4) == pytest.approx(0.3)
    for x in (0.0, 0.3, 1.2):
        eq = axi.solve_parallel_axi(0.4, 0.3, 1, x)
        assert eq.eta == 0.0 and eq.residual_norm < 1e-12
        assert eq.radius**2 == pytest.approx(0.3)
    with pytest.raises(NoEquilibrium):
        axi.solve_parallel_axi(0.4, 0.3, 2)


# --- stability ---


def test_cylindrical_example_stable():
    r = axi.cyl_classify(0.4, 0.3, 2.0, 1.0)
    assert r.classification == GMU_STABLE and r.agrees
    assert r.conditions["I1 (1+alpha) > I2"] and r.proposition == GMU_STABLE


@pytest.mark.parametrize("R", [1.0, 2.0, 5.0, 30.0])
@pytest.mark.parametrize("I", [OBLATE, PROLATE])
def test_fast_top(I, R):
    assert axi.cyl_classify(*I, R, 50.0).classification == GMU_STABLE


def test_below_p1_oblate_unstable():
    I1, I2 = OBLATE
    r = axi.cyl_classify(I1, I2, 2.0, (I2 - I1) / I1 - 1e-3)
    assert r.classification == UNSTABLE and r.verdict.negative_count == 1 and r.agrees


def test_below_p1_prolate_two_negatives():
    # A1 and S1 are both negative just below P1 for a prolate body
    I1, I2 = PROLATE
    r = axi.cyl_classify(I1, I2, 2.0, (I2 - I1) / I1 - 1e-3)
    assert r.verdict.negative_count == 2 and r.classification == INCONCLUSIVE and r.agrees


def test_cylindrical_closed_forms_match_engine_grid():
    for I in (OBLATE, PROLATE):
        for R in (1.5, 2.0, 5.0):
            for a in np.linspace(-1.5, 3.0, 10):
                pr, co, ab, sb = axi.cyl_eigs_closed(*I, R, a)
                eq = axi.solve_cylindrical(*I, R, a)
                A, S = axi._engine_on_basis(eq, ab, sb)
                assert np.allclose(np.diag(A), [co["A1"], co["A2"]], rtol=1e-6, atol=1e-12)
                assert np.allclose(np.diag(S), [co["S1"], co["S2"]], rtol=1e-6, atol=1e-12)


def test_hyp_bound():
    assert axi.hyp_bound(0.3) == pytest.approx(HYP_BOUND_03, abs=1e-5)
    assert 0.5 * (3 * 0.7 + np.sqrt(2.01)) == pytest.approx(HYP_BOUND_03, abs=1e-5)
    # the printed expression exceeds 2 for the flattest admissible bodies
    assert axi.hyp_bound(0.25) > 2.0
    assert np.isnan(axi.hyp_bound(0.32))


@given(st.floats(0.25, 0.4999))
def test_hyp_root_is_s2_sign_change_and_below_two(I2):
    r2 = axi.hyp_root(I2)
    assert r2 < 2.0
    I1 = 1 - 2 * I2
    s2 = lambda R2: 2 * R2 * R2 - 3 * R2 * (I1 + I2) + 15 * I2 * (I2 - I1)
    assert s2(r2 * (1 + 1e-6) + 1e-9) > 0
    if r2 > 0:
        assert abs(s2(r2)) < 1e-12
        assert axi.hyp_bound(I2) >= r2 or np.isnan(axi.hyp_bound(I2))


def test_hyperbolic_oblate_prolate_split():
    assert axi.hyp_classify(0.4, 0.3, 2.0, np.pi / 6).classification == GMU_STABLE
    assert axi.hyp_classify(0.3, 0.35, 2.0, np.pi / 6).classification == UNSTABLE


def test_hyperbolic_closed_forms_match_engine_grid():
    for I in (OBLATE, PROLATE):
        for R in (1.5, 2.0, 5.0):
            for th in np.linspace(0.1, 1.4, 6):
                pr, co, ab, sb = axi.hyp_eigs_closed(*I, R, th)
                eq = axi.solve_hyperbolic(*I, R, th)
                A, S = axi._engine_on_basis(eq, ab, sb)
                assert np.allclose(np.diag(A), [co["A1"], co["A2"]], rtol=1e-6, atol=1e-12)
                assert np.allclose(np.diag(S), [co["S1"], co["S2"]], rtol=1e-6, atol=1e-12)


def test_conical_prolate_stable_far_out():
    assert axi.conical_classify(0.2, 0.4, 100.0, np.pi / 4, report=False).classification == GMU_STABLE


def test_conical_oblate_unstable_far_out():
    r = axi.conical_classify(0.36, 0.32, 100.0, np.pi / 4, report=False)
    assert r.classification == UNSTABLE and r.verdict.negative_count % 2 == 1


def test_conical_determinant_asymptote():
    for I in (PROLATE, (0.36, 0.32)):
        r = axi.conical_classify(*I, 1000.0, np.pi / 4)
        lead = 4 * I[1] - 3 * I[0]
        assert abs(r.report["det_R6"] - lead) < 0.05 * abs(lead)


def test_conical_engine_negative_counts_agree():
    for I in (PROLATE, (0.36, 0.32)):
        for R in (3.0, 10.0, 50.0):
            r = axi.conical_classify(*I, R, np.pi / 4, report=False)
            assert r.verdict.negative_count == r.engine.negative_count


def test_isolated_prolate_stable():
    r = axi.isolated_classify(0.2, 0.4, 2.0)
    assert r.printed["H2"] == pytest.approx(H2_PROLATE)
    assert all(v > 0 for v in r.printed.values())
    assert r.classification == GMU_STABLE and r.agrees


def test_isolated_oblate_h2_negative():
    r = axi.isolated_classify(0.4, 0.3, 2.0)
    assert r.printed["H2"] < 0
    neg = sum(v < 0 for v in r.printed.values())
    assert r.verdict.negative_count == neg
    assert r.classification == (UNSTABLE if neg % 2 else INCONCLUSIVE)


@pytest.mark.parametrize("I", [OBLATE, PROLATE, (0.36, 0.32)])
@pytest.mark.parametrize("R", [1.5, 2.0, 6.0])
def test_isolated_closed_vs_engine(I, R):
    r = axi.isolated_classify(*I, R)
    keys = ("H1", "H2", "H3")
    assert rel_err([r.report["engine_diag"][k] for k in keys], [r.printed[k] for k in keys]) < 1e-6


# --- limits and diagrams ---


def test_alpha_conic_value_and_asymptote():
    assert axi.alpha_conic(0.4, 0.3, 2.0) == pytest.approx(ALPHA_CONIC_04_03_R2, abs=1e-12)
    assert axi.alpha_conic(0.4, 0.3, 2.0) == pytest.approx(-0.92416, abs=1e-5)
    assert axi.alpha_conic(0.4, 0.3, 1e4) == pytest.approx(4 * (0.3 - 0.4) / 0.4, rel=1e-6)


@pytest.mark.parametrize("I", [OBLATE, PROLATE])
def test_conical_limits(I):
    lim = axi.conical_limits(*I, 2.0)
    assert lim.isolated_gap < 1e-6 and lim.cylindrical_gap < 1e-6


def test_cyl_a1_zero_at_p1():
    for I1, I2 in (OBLATE, PROLATE):
        a = (I2 - I1) / I1
        assert abs(axi.cyl_eigs_closed(I1, I2, 2.0, a)[1]["A1"]) < 1e-15


@pytest.fixture(scope="module")
def diagrams():
    return {"oblate": axi.axi_diagram(0.4, 0.3, 5.0, 30), "prolate": axi.axi_diagram(0.2, 0.4, 5.0, 30)}


def test_diagram_junctions(diagrams):
    for name, (I1, I2) in (("oblate", OBLATE), ("prolate", PROLATE)):
        d = diagrams[name]
        assert {j.name for j in d.junctions} >= {"P1", "P2", "P5", "P6", "P9"}
        assert d.junction("P1").location == pytest.approx((I2 - I1) / I1, abs=1e-9)
        assert d.junction("P5").location == pytest.approx(axi.alpha_conic(I1, I2, 5.0), abs=1e-9)
        d.validate()


def test_oblate_transfer_at_p1(diagrams):
    d = diagrams["oblate"]
    p1 = d.junction("P1").location
    cyl = d.branches["cylindrical"]
    above = [s for a, s in zip(cyl.params, cyl.stability) if a > p1 + 1e-6]
    below = [s for a, s in zip(cyl.params, cyl.stability) if d.junction("P5").location < a < p1 - 1e-6]
    assert set(above) == {"stable"} and set(below) == {"unstable"}
    assert set(d.branches["hyperbolic"].stability) == {"stable"}


def test_prolate_largest_junction(diagrams):
    d = diagrams["prolate"]
    assert d.meta["largest_alpha_junction"] == "P5"
    assert d.junction("P5").location > d.junction("P1").location
