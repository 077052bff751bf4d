"""Potentials, kinetic metric, locked inertia and the augmented/amended potentials.

All tangent vectors are 6-vectors ``(dtheta, dR)`` in body coordinates.
Generators and momenta are 3-vectors (asymmetric group) or 4-vectors
``(xi, eta)`` / ``(mu, nu)`` (axisymmetric group, last slot = spin about e1).
"""
from __future__ import annotations

import numpy as np

from .model import ASYM, AXI, Configuration, MassCloud, as_diag, gen_vector, hat

E1 = np.array([1.0, 0.0, 0.0])


class SingularLockedInertia(ValueError):
    """Raised when the amended potential needs a momentum outside the range of the locked inertia."""


def _norm(R) -> float:
    r = float(np.linalg.norm(R))
    if r == 0.0:
        raise ValueError("|R| = 0 is outside the domain of the potential")
    return r


def _R(q) -> np.ndarray:
    return q.position if isinstance(q, Configuration) else np.asarray(q, dtype=float)


def v2(I, R) -> float:
    """Second-order potential -1/r - 1/(2 r^3) + 3 (R.IR) / (2 r^5)."""
    R = np.asarray(R, dtype=float)
    r = _norm(R)
    d = as_diag(I)
    return -1.0 / r - 0.5 / r**3 + 1.5 * float(R @ (d * R)) / r**5


def grad_v2(I, R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    r = _norm(R)
    d = as_diag(I)
    IR = d * R
    q = float(R @ IR)
    return R / r**3 + 1.5 * R / r**5 + 3.0 * IR / r**5 - 7.5 * q * R / r**7


def hess_v2(I, R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    r = _norm(R)
    d = as_diag(I)
    IR = d * R
    q = float(R @ IR)
    Id = np.eye(3)
    RR = np.outer(R, R)
    return (
        Id / r**3
        - 3.0 * RR / r**5
        + 1.5 * (Id / r**5 - 5.0 * RR / r**7)
        + 3.0 * np.diag(d) / r**5
        - 15.0 * (np.outer(IR, R) + np.outer(R, IR)) / r**7
        - 7.5 * q * Id / r**7
        + 52.5 * q * RR / r**9
    )


def v_exact(cloud: MassCloud, R) -> float:
    """Point-cloud gravitational potential ``-sum m_k / |R + r_k|``."""
    d = np.linalg.norm(np.asarray(R, dtype=float)[None, :] + cloud.points, axis=1)
    if np.any(d == 0.0):
        raise ValueError("field point coincides with a cloud point")
    return float(-(cloud.masses / d).sum())


def body_block(I, R) -> np.ndarray:
    """``I - hat(R)^2 = I + |R|^2 Id - R R^T``."""
    R = np.asarray(R, dtype=float)
    return np.diag(as_diag(I)) + float(R @ R) * np.eye(3) - np.outer(R, R)


def kinetic_metric(I, R) -> np.ndarray:
    R = _R(R)
    G = np.zeros((6, 6))
    Rh = hat(R)
    G[:3, :3] = body_block(I, R)
    G[:3, 3:] = Rh
    G[3:, :3] = -Rh
    G[3:, 3:] = np.eye(3)
    return G


def kinetic_energy(I, R, v) -> float:
    v = np.asarray(v, dtype=float)
    return 0.5 * float(v @ kinetic_metric(I, R) @ v)


def dim_algebra(mode: str) -> int:
    return 3 if mode == ASYM else 4


def fundamental_fields(q: Configuration, mode: str = ASYM) -> np.ndarray:
    """Columns are the infinitesimal generators ``zeta_Q(q)`` of the algebra basis."""
    B, R = q.attitude, q.position
    X = np.zeros((6, dim_algebra(mode)))
    X[:3, :3] = B.T
    if mode == AXI:
        X[:3, 3] = -E1
        X[3:, 3] = np.cross(E1, R)
    return X


def locked_inertia_body(I, R, mode: str = ASYM) -> np.ndarray:
    """Locked inertia at ``B = Id``."""
    J = body_block(I, R)
    if mode == ASYM:
        return J
    i1 = as_diag(I)[0]
    L = np.zeros((4, 4))
    L[:3, :3] = J
    L[:3, 3] = -i1 * E1
    L[3, :3] = -i1 * E1
    L[3, 3] = i1
    return L


def _frame(q: Configuration, mode: str) -> np.ndarray:
    if mode == ASYM:
        return q.attitude
    E = np.eye(4)
    E[:3, :3] = q.attitude
    return E


def locked_inertia(I, q: Configuration, mode: str = ASYM) -> np.ndarray:
    E = _frame(q, mode)
    return E @ locked_inertia_body(I, q.position, mode) @ E.T


def d_body_block(R, w) -> np.ndarray:
    R = np.asarray(R)
    w = np.asarray(w)
    return 2.0 * float(R @ w) * np.eye(3) - np.outer(w, R) - np.outer(R, w)


def d2_body_block(w, z) -> np.ndarray:
    return 2.0 * float(w @ z) * np.eye(3) - np.outer(w, z) - np.outer(z, w)


def _pad(M3: np.ndarray, mode: str) -> np.ndarray:
    if mode == ASYM:
        return M3
    M = np.zeros((4, 4))
    M[:3, :3] = M3
    return M


def d_locked_inertia(I, q: Configuration, v, mode: str = ASYM) -> np.ndarray:
    """Directional derivative of the locked inertia along the body tangent ``v``."""
    v = np.asarray(v, dtype=float)
    E = _frame(q, mode)
    L = locked_inertia_body(I, q.position, mode)
    U = _pad(hat(v[:3]), mode)
    dL = U @ L - L @ U + _pad(d_body_block(q.position, v[3:]), mode)
    return E @ dL @ E.T


def momentum_of(I, q: Configuration, gen) -> np.ndarray:
    g = gen_vector(gen)
    return locked_inertia(I, q, ASYM if len(g) == 3 else AXI) @ g


def augmented_potential(I, q: Configuration, gen) -> float:
    g = gen_vector(gen)
    L = locked_inertia(I, q, ASYM if len(g) == 3 else AXI)
    return v2(I, q.position) - 0.5 * float(g @ L @ g)


def restricted_solve(L: np.ndarray, mu: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Solve ``L x = mu`` on the range of a symmetric PSD matrix ``L``."""
    w, V = np.linalg.eigh(L)
    keep = np.abs(w) > rtol * max(1.0, np.abs(w).max())
    c = V.T @ mu
    scale = max(1.0, float(np.linalg.norm(mu)))
    if np.any(np.abs(c[~keep]) > 1e-10 * scale):
        raise SingularLockedInertia(
            "momentum is not in the range of the singular locked inertia; use the singular stability method"
        )
    return V[:, keep] @ (c[keep] / w[keep])


def amended_potential(I, q: Configuration, mu) -> float:
    mu = np.asarray(mu, dtype=float)
    L = locked_inertia(I, q, ASYM if len(mu) == 3 else AXI)
    return v2(I, q.position) + 0.5 * float(mu @ restricted_solve(L, mu))


def equilibrium_residual(I, q, gen) -> np.ndarray:
    """First variation of the augmented potential at ``B = Id`` (zero at relative equilibria)."""
    g = gen_vector(gen)
    R = _R(q)
    if isinstance(q, Configuration) and np.abs(q.attitude - np.eye(3)).max() > 1e-12:
        raise ValueError("residual is defined in canonical position B = Id")
    xi = g[:3]
    top = np.cross(xi, body_block(I, R) @ xi)
    if len(g) == 4:
        top = top - np.cross(xi, as_diag(I)[0] * E1) * g[3]
    bottom = grad_v2(I, R) + xi * float(R @ xi) - R * float(xi @ xi)
    return np.concatenate([top, bottom])


# --- second variations in the exponential chart (B = exp(hat(theta)), R) at B = Id ---


def _chart_second(v3: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return 0.5 * (np.cross(u, np.cross(w, v3)) + np.cross(w, np.cross(u, v3)))


def _quadratic_chart_hessian(K, dK, d2K, m: np.ndarray) -> np.ndarray:
    """Hessian of ``0.5 * m(theta)^T K(R) m(theta)`` at theta = 0.

    ``K`` is the matrix at R, ``dK(w)`` and ``d2K(w, z)`` its derivatives.
    """
    n = len(m)
    m3 = m[:3]
    Dm = np.zeros((n, 3))
    Dm[:3] = hat(m3)
    H = np.zeros((6, 6))
    E = np.eye(3)
    Km = K @ m
    for a in range(3):
        for b in range(a, 3):
            sec = np.zeros(n)
            sec[:3] = _chart_second(m3, E[a], E[b])
            H[a, b] = H[b, a] = Dm[:, a] @ K @ Dm[:, b] + Km @ sec
    dKs = [dK(E[c]) for c in range(3)]
    for a in range(3):
        for c in range(3):
            H[a, 3 + c] = H[3 + c, a] = Dm[:, a] @ dKs[c] @ m
    for c in range(3):
        for d in range(c, 3):
            H[3 + c, 3 + d] = H[3 + d, 3 + c] = 0.5 * m @ d2K(E[c], E[d]) @ m
    return H


def hessian_augmented(I, R, gen) -> np.ndarray:
    """Second derivative of ``V_xi`` at ``(Id, R)`` in exponential coordinates."""
    g = gen_vector(gen)
    mode = ASYM if len(g) == 3 else AXI
    R = np.asarray(R, dtype=float)
    L = locked_inertia_body(I, R, mode)

    def dL(w):
        return _pad(d_body_block(R, w), mode)

    def d2L(w, z):
        return _pad(d2_body_block(w, z), mode)

    H = -_quadratic_chart_hessian(L, dL, d2L, g)
    H[3:, 3:] += hess_v2(I, R)
    return H


def hessian_amended(I, R, mu) -> np.ndarray:
    """Second derivative of ``V_mu`` at ``(Id, R)`` in exponential coordinates."""
    mu = np.asarray(mu, dtype=float)
    mode = ASYM if len(mu) == 3 else AXI
    R = np.asarray(R, dtype=float)
    K = np.linalg.inv(locked_inertia_body(I, R, mode))

    def dK(w):
        return -K @ _pad(d_body_block(R, w), mode) @ K

    def d2K(w, z):
        A = _pad(d_body_block(R, w), mode)
        C = _pad(d_body_block(R, z), mode)
        return K @ A @ K @ C @ K + K @ C @ K @ A @ K - K @ _pad(d2_body_block(w, z), mode) @ K

    H = _quadratic_chart_hessian(K, dK, d2K, mu)
    H[3:, 3:] += hess_v2(I, R)
    return H


def chart_point(R, v, t: float = 1.0) -> Configuration:
    """Point ``(exp(t hat(dtheta)), R + t dR)`` of the exponential chart."""
    from .model import expm_so3

    v = np.asarray(v, dtype=float)
    return Configuration(expm_so3(t * v[:3]), np.asarray(R, dtype=float) + t * v[3:])


def fd_chart_hessian(f, R, h: float | None = None) -> np.ndarray:
    """Richardson-refined central-difference Hessian of ``f(Configuration)`` in the chart.

    Independent numerical route used to cross-check the analytic Hessians.
    """
    R = np.asarray(R, dtype=float)
    if h is None:
        h = 1e-4 * max(1.0, float(np.linalg.norm(R)))

    def second(v, w, step):
        def F(a, b):
            return f(chart_point(R, a * v + b * w, step))

        return (F(1, 1) - F(1, -1) - F(-1, 1) + F(-1, -1)) / (4 * step * step)

    E = np.eye(6)
    H = np.zeros((6, 6))
    for i in range(6):
        for j in range(i, 6):
            d1 = second(E[i], E[j], h)
            d2 = second(E[i], E[j], h / 2)
            H[i, j] = H[j, i] = (4 * d2 - d1) / 3
    return H
