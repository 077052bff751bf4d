import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from gravisat import asym, axi
from gravisat.dynamics import (
    IntegrationError,
    State,
    energy,
    eom,
    integrate,
    linearized_spectrum,
    momentum,
    perturbation_probe,
    trajectory_csv,
    verify_relative_equilibrium,
)
from gravisat.equilibrium import ResidualTooLarge, make
from gravisat.model import Configuration, InertiaTensor, expm_so3
from oracles import kepler_rate2

LAGRANGE = (0.45, 0.25, 0.30)


@pytest.fixture(scope="module")
def orth2():
    return asym.solve_orthogonal(LAGRANGE, 2.0, 2, 1)


@pytest.fixture(scope="module")
def orth2_run(orth2):
    s0 = State.from_equilibrium(orth2)
    return s0, integrate(orth2.inertia, s0, 10 * orth2.period, orth2.period / 2000, order=2, record_every=200)


def perturbed(eq, eps=1e-2):
    s = State.from_equilibrium(eq)
    return State(s.q, s.v + eps * np.array([0.3, -0.2, 0.1, 0.5, 0.0, -0.4]))


# --- equations of motion ---


def test_energy_conserved_ten_periods(orth2, orth2_run):
    s0, tr = orth2_run
    E0 = energy(orth2.inertia, s0)
    dE = max(abs(energy(orth2.inertia, tr.state(k)) - E0) for k in range(len(tr)))
    assert dE / abs(E0) < 1e-8


def test_momentum_conserved_ten_periods(orth2, orth2_run):
    s0, tr = orth2_run
    m0 = momentum(orth2.inertia, s0)
    dm = max(np.linalg.norm(momentum(orth2.inertia, tr.state(k)) - m0) for k in range(len(tr)))
    assert dm / np.linalg.norm(m0) < 1e-8


def test_attitude_stays_orthonormal(orth2_run):
    _, tr = orth2_run
    assert max(np.abs(B.T @ B - np.eye(3)).max() for B in tr.B) < 1e-8
    assert min(np.linalg.det(B) for B in tr.B) > 0


def test_radial_rate_zero_at_orthogonal(orth2):
    s = State.from_equilibrium(orth2)
    _, Rd, Omd, Rdd = eom(orth2.inertia, s)
    assert abs(orth2.q.position @ Rd) / orth2.radius < 1e-12


@pytest.mark.parametrize("maker", [
    lambda: asym.solve_orthogonal(LAGRANGE, 2.0, 2, 1),
    lambda: axi.solve_cylindrical(0.4, 0.3, 2.0, 1.0),
    lambda: axi.solve_conical_axi(0.2, 0.4, 10.0, np.pi / 4),
])
def test_eom_at_equilibrium_is_orbit_tangent(maker):
    eq = maker()
    Bd, Rd, Omd, Rdd = eom(eq.inertia, State.from_equilibrium(eq))
    from gravisat.model import hat

    spin = hat(eq.xi) if eq.mode == "asym" else hat(eq.xi) - hat([eq.eta, 0, 0])
    assert np.abs(Bd - spin).max() < 1e-12
    if eq.mode == "asym":
        assert np.abs(np.concatenate([Rd, Omd, Rdd])).max() < 1e-12
    else:
        # body position and velocities rotate with the spin about the symmetry axis
        e1 = np.array([eq.eta, 0.0, 0.0])
        s = State.from_equilibrium(eq)
        assert np.abs(Rd - np.cross(e1, eq.q.position)).max() < 1e-12
        assert np.abs(Omd - np.cross(e1, s.omega)).max() < 1e-10
        assert np.abs(Rdd - np.cross(e1, s.rdot)).max() < 1e-10


def test_eom_rejects_origin():
    s = State(Configuration.at([0.0, 0.0, 0.0]), np.zeros(6))
    with pytest.raises(ValueError):
        eom(LAGRANGE, s)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_free_body_momentum_sphere(om):
    I = InertiaTensor(*LAGRANGE)
    s = State(Configuration.at([0.0, 3.0, 0.0]), np.r_[om, 0.0, 0.0, 0.0])
    tr = integrate(I, s, 5.0, 1e-3, potential=False, order=4, record_every=100)
    L = [np.linalg.norm(I.diag * w) for w in tr.omega]
    E = [float(I.diag @ w**2) for w in tr.omega]
    assert np.ptp(L) < 1e-10 and np.ptp(E) < 1e-10


def test_second_order_convergence(orth2):
    s = perturbed(orth2)
    T = orth2.period
    ends = []
    for dt in (T / 100, T / 200, T / 400):
        tr = integrate(orth2.inertia, s, T, dt, order=2, record_every=10**6)
        ends.append(np.r_[tr.B[-1].ravel(), tr.R[-1], tr.omega[-1], tr.rdot[-1]])
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert np.log2(ratio) >= 1.9


def test_energy_drift_scales_as_dt_squared(orth2):
    s = perturbed(orth2)
    T = orth2.period
    E0 = energy(orth2.inertia, s)
    errs = []
    for dt in (T / 200, T / 400):
        tr = integrate(orth2.inertia, s, 2 * T, dt, order=2, record_every=1)
        errs.append(max(abs(energy(orth2.inertia, tr.state(k)) - E0) for k in range(len(tr))))
    assert errs[0] / errs[1] == pytest.approx(4.0, abs=0.5)


@pytest.mark.parametrize("R", [2.0, 5.0])
def test_spherical_body_kepler_circle(R):
    I = InertiaTensor(1 / 3, 1 / 3, 1 / 3)
    w = np.sqrt(kepler_rate2(1 / 3, R))
    assert w == pytest.approx(R**-1.5, rel=1e-9)  # oracle uses a difference quotient
    s = State(Configuration.at([0.0, R, 0.0]), np.r_[0.0, 0.0, 0.0, -R * w, 0.0, 0.0])
    T = 2 * np.pi / w
    tr = integrate(I, s, T, T / 2000, order=4, record_every=100)
    for t, B, Rb in zip(tr.times, tr.B, tr.R):
        exact = expm_so3([0.0, 0.0, t * w]) @ np.array([0.0, R, 0.0])
        assert np.linalg.norm(B @ Rb - exact) < 1e-8 * R


def test_integration_error_reports_last_time():
    s = State(Configuration.at([0.0, 2.0, 0.0]), np.r_[1e200, 1e200, 0.0, 0.0, 0.0, 0.0])
    with pytest.raises(IntegrationError) as e:
        integrate(LAGRANGE, s, 1.0, 1e-3)
    assert 0.0 <= e.value.last_time < 1.0


def test_trajectory_csv(tmp_path, orth2):
    tr = integrate(orth2.inertia, State.from_equilibrium(orth2), orth2.period, orth2.period / 50, record_every=10)
    p = tmp_path / "t.csv"
    trajectory_csv(orth2.inertia, tr, p)
    lines = p.read_text().splitlines()
    head = lines[0].split(",")
    assert head[0] == "t" and "E" in head and len(head) == 1 + 9 + 3 + 3 + 3 + 1 + 3
    assert len(lines) == len(tr) + 1


# --- relative equilibria along group orbits ---


def test_verify_orthogonal(orth2):
    rep = verify_relative_equilibrium(orth2, periods=5)
    assert rep.max_drift < 1e-6
    assert rep.energy_drift < 1e-8 and rep.momentum_drift < 1e-8
    assert rep.max_drift >= 0 and rep.steps == 10000


def test_verify_conical_axi():
    eq = axi.solve_conical_axi(0.2, 0.4, 10.0, np.pi / 4)
    rep = verify_relative_equilibrium(eq, periods=3)
    assert rep.max_drift < 1e-5


def test_corrupted_generator_drifts_linearly(orth2):
    bad = make(orth2.family, orth2.inertia, orth2.q.position, 1.01 * orth2.xi)
    with pytest.raises(ResidualTooLarge):
        verify_relative_equilibrium(bad, periods=2)
    rep = verify_relative_equilibrium(bad, periods=2, strict=False)
    assert rep.max_drift > 1e-3
    t, d = rep.drift_times, rep.drift_series
    T = orth2.period
    # the deviation envelope keeps growing from one period to the next
    assert d[t <= T].max() > 1e-2
    assert d.max() > 2 * d[t <= T].max()


def test_unstable_conical_drift_is_discretization_seeded():
    # strongly unstable point: drift shrinks with the step at fourth order until roundoff dominates
    eq = asym.solve_conical((0.25, 0.40, 0.35), 0.45, (1, 2))[0]
    T = eq.period
    d = [verify_relative_equilibrium(eq, periods=5, dt=T / k).max_drift for k in (1000, 2000)]
    assert d[1] < d[0] / 8
    assert linearized_spectrum(eq).max_real * T > 4


# --- linearization ---


def test_spectrum_above_and_below_r_crit():
    rc = asym.r_crit(LAGRANGE)
    up = linearized_spectrum(asym.solve_orthogonal(LAGRANGE, rc + 0.3, 2, 1))
    down = linearized_spectrum(asym.solve_orthogonal(LAGRANGE, rc - 0.2, 2, 1))
    assert up.max_real <= 1e-6 * up.frequency and not up.unstable()
    assert down.max_real > 1e-6 and down.unstable()
    assert up.symmetry_error < 1e-6 and down.symmetry_error < 1e-6


@pytest.mark.parametrize("maker", [
    lambda: axi.solve_cylindrical(0.4, 0.3, 2.0, 1.0),
    lambda: axi.solve_hyperbolic(0.3, 0.35, 2.0, np.pi / 6),
    lambda: asym.solve_orthogonal(LAGRANGE, 3.0, 2, 1),
])
def test_complex_step_matches_differences(maker):
    eq = maker()
    a = linearized_spectrum(eq, "complex").eigenvalues
    b = linearized_spectrum(eq, "fd").eigenvalues
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    assert C[r, c].max() < 1e-5 * eq.orbital_rate
    assert linearized_spectrum(eq).symmetry_error < 1e-6


def test_stability_verdicts_match_spectrum():
    assert not linearized_spectrum(axi.solve_hyperbolic(0.4, 0.3, 2.0, np.pi / 6)).unstable()
    assert linearized_spectrum(axi.solve_hyperbolic(0.3, 0.35, 2.0, np.pi / 6)).unstable()
    assert linearized_spectrum(axi.solve_cylindrical(0.4, 0.3, 2.0, -0.25 - 1e-2)).unstable()


def test_spectrum_requires_small_residual(orth2):
    bad = make(orth2.family, orth2.inertia, orth2.q.position, 1.01 * orth2.xi)
    with pytest.raises(ResidualTooLarge):
        linearized_spectrum(bad)


# --- perturbation probe ---


def test_probe_stable_cylindrical():
    res = perturbation_probe(axi.solve_cylindrical(0.4, 0.3, 2.0, 1.0), 1e-4, samples=6)
    assert res.fraction_bounded == 1.0 and res.growth_rate == 0.0


def test_probe_unstable_hyperbolic_prolate():
    eq = axi.solve_hyperbolic(0.3, 0.35, 2.0, np.pi / 6)
    lam = linearized_spectrum(eq).max_real
    res = perturbation_probe(eq, 1e-6, samples=6)
    assert res.fraction_bounded < 1.0
    assert res.growth_rate == pytest.approx(lam, rel=0.2)


def test_probe_zero_amplitude(orth2):
    assert perturbation_probe(orth2, 0.0, periods=1, samples=2).fraction_bounded == 1.0
    with pytest.raises(ValueError):
        perturbation_probe(orth2, -1.0)


def test_probe_deterministic_by_seed():
    eq = axi.solve_hyperbolic(0.3, 0.35, 2.0, np.pi / 6)
    a = perturbation_probe(eq, 1e-6, periods=3, samples=3, seed=7)
    b = perturbation_probe(eq, 1e-6, periods=3, samples=3, seed=7)
    assert np.array_equal(a.max_distance, b.max_distance)
