"""Reduced Energy Momentum engine.

Every evaluation is carried out at the canonical attitude ``B = Id``; a
configuration with another attitude is first moved there by the left action
``(B^T, Id)``, which leaves body-frame tangent vectors unchanged and rotates
generators and momenta by ``B^T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .model import ASYM, AXI, Configuration, gen_vector
from .potential import (
    E1,
    d_body_block,
    fundamental_fields,
    hessian_amended,
    hessian_augmented,
    kinetic_metric,
    locked_inertia_body,
)

GMU_STABLE = "GmuStable"
UNSTABLE = "Unstable"
INCONCLUSIVE = "Inconclusive"
DEGENERACY_RTOL = 1e-8
ORTHO_TOL = 1e-10
DIM_Q = 6


class SingularPathRequired(ValueError):
    """The configuration has continuous isotropy; use ``singular_stability``."""


class SingularHypothesis(ValueError):
    """A hypothesis of the singular test does not hold."""


@dataclass(frozen=True)
class REMSplitting:
    """Subspaces used by the regular test; columns are basis vectors."""

    mode: str
    R: np.ndarray
    gen: np.ndarray
    mu: np.ndarray
    g_mu: np.ndarray
    g_perp: np.ndarray
    V: np.ndarray
    V_rig: np.ndarray
    V_int: np.ndarray


@dataclass(frozen=True)
class StabilityVerdict:
    arnold_eigs: tuple[float, ...]
    smale_eigs: tuple[float, ...]
    negative_count: int
    classification: str
    method: str = "regular"
    degenerate: bool = False

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return self.arnold_eigs + self.smale_eigs

    def to_dict(self) -> dict:
        return {
            "arnold": list(self.arnold_eigs),
            "smale": list(self.smale_eigs),
            "negative_count": self.negative_count,
            "classification": self.classification,
            "method": self.method,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class SingularREMData:
    g_q: np.ndarray
    g_mu: np.ndarray
    t: np.ndarray
    q_mu: np.ndarray
    S: np.ndarray
    Sigma: np.ndarray
    corr: np.ndarray = field(repr=False)


def _mode(vec) -> str:
    return ASYM if len(vec) == 3 else AXI


def _rotate(vec: np.ndarray, Bt: np.ndarray) -> np.ndarray:
    out = np.array(vec, dtype=float)
    out[:3] = Bt @ out[:3]
    return out


def canonical(q: Configuration, *vecs):
    """Move to ``B = Id``; returns ``(R, rotated vectors...)``."""
    Bt = q.attitude.T
    return (q.position,) + tuple(_rotate(np.asarray(v, dtype=float), Bt) for v in vecs)


def _scale(x: np.ndarray) -> float:
    return max(1.0, float(np.abs(x).max())) if x.size else 1.0


def coad_matrix(mu: np.ndarray) -> np.ndarray:
    """Matrix of ``zeta -> ad*_zeta mu``; so(3) part ``mu x zeta``, spin slot inert."""
    n = len(mu)
    C = np.zeros((n, n))
    m = mu[:3]
    C[:3, :3] = np.array([[0, -m[2], m[1]], [m[2], 0, -m[0]], [-m[1], m[0], 0]])
    return C


def ad_matrix(nu: np.ndarray) -> np.ndarray:
    """Matrix of ``zeta -> ad_nu zeta``; so(3) part ``nu x zeta``."""
    n = len(nu)
    C = np.zeros((n, n))
    v = nu[:3]
    C[:3, :3] = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return C


def stabilizer_algebra(mu, mode: str | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the coadjoint stabilizer of ``mu``."""
    mu = np.asarray(mu, dtype=float)
    mode = mode or _mode(mu)
    n = 3 if mode == ASYM else 4
    if len(mu) != n:
        raise ValueError(f"momentum of length {len(mu)} does not match mode {mode!r}")
    m = mu[:3]
    nm = float(np.linalg.norm(m))
    if nm <= 1e-12 * max(1.0, float(np.linalg.norm(mu))) or nm == 0.0:
        return np.eye(n)
    if mode == ASYM:
        return (m / nm).reshape(3, 1)
    out = np.zeros((4, 2))
    out[:3, 0] = m / nm
    out[3, 1] = 1.0
    return out


def d_locked_times(I, R, gen: np.ndarray) -> np.ndarray:
    """Matrix of ``v -> D(I xi)[v]`` at ``B = Id`` (columns indexed by the 6 tangent coordinates)."""
    mode = _mode(gen)
    L = locked_inertia_body(I, R, mode)
    n = len(gen)
    out = np.zeros((n, 6))
    E = np.eye(3)
    for k in range(3):
        U = np.zeros((n, n))
        U[:3, :3] = np.array([[0, -E[k][2], E[k][1]], [E[k][2], 0, -E[k][0]], [-E[k][1], E[k][0], 0]])
        out[:, k] = (U @ L - L @ U) @ gen
        D = np.zeros((n, n))
        D[:3, :3] = d_body_block(R, E[k])
        out[:, 3 + k] = D @ gen
    return out


def _null(A: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if A.size == 0:
        return np.eye(A.shape[1])
    return null_space(A, rcond=rtol)


def build_splitting(I, q: Configuration, gen, mu=None) -> REMSplitting:
    gen = gen_vector(gen)
    mode = _mode(gen)
    if mu is None:
        mu = locked_inertia_body(I, q.position, mode) @ _rotate(gen, q.attitude.T)
        mu = _rotate(mu, q.attitude)
    R, g, m = canonical(q, gen, mu)
    X = fundamental_fields(Configuration.at(R), mode)
    if np.linalg.matrix_rank(X, tol=1e-9 * _scale(X)) < X.shape[1]:
        raise SingularPathRequired("configuration isotropy algebra is continuous")
    L = locked_inertia_body(I, R, mode)
    G = kinetic_metric(I, R)
    g_mu = stabilizer_algebra(m, mode)
    g_perp = _null(g_mu.T @ L)
    V = _null((X @ g_mu).T @ G)
    V_rig = X @ g_perp
    D = d_locked_times(I, R, g)
    C = g_perp.T @ D @ V
    V_int = V @ _null(C) if C.size else V
    return REMSplitting(mode, R, g, m, g_mu, g_perp, V, V_rig, V_int)


def arnold_form(I, q: Configuration, gen, mu=None, splitting: REMSplitting | None = None, basis=None) -> np.ndarray:
    """Arnold form on ``g_mu^perp`` from its coadjoint expression (potential-free)."""
    sp = splitting or build_splitting(I, q, gen, mu)
    L = locked_inertia_body(I, sp.R, sp.mode)
    m = sp.mu
    W = sp.g_perp if basis is None else np.asarray(basis, dtype=float)
    if W.size == 0:
        return np.zeros((0, 0))
    C = coad_matrix(m)
    xi = np.linalg.solve(L, m)
    # ad_nu(xi) = -ad_xi(nu) turns the second term into a matrix product
    A = (C @ W).T @ np.linalg.solve(L, C @ W) + (C @ W).T @ (-ad_matrix(xi)) @ W
    return 0.5 * (A + A.T)


def amended_hessian(I, q: Configuration, mu) -> np.ndarray:
    R, m = canonical(q, mu)
    return hessian_amended(I, R, m)


def restrict(H: np.ndarray, basis: np.ndarray) -> np.ndarray:
    F = basis.T @ H @ basis
    return 0.5 * (F + F.T)


def smale_form(I, q: Configuration, mu, splitting: REMSplitting | None = None, basis=None) -> np.ndarray:
    """Second variation of the amended potential on the internal variations."""
    if basis is None:
        if splitting is None:
            raise ValueError("smale_form needs a splitting or an explicit basis")
        basis = splitting.V_int
    return restrict(amended_hessian(I, q, mu), np.asarray(basis, dtype=float))


def form_eigs(F: np.ndarray) -> np.ndarray:
    if F.size == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(0.5 * (F + F.T))


def classify(arnold_eigs: Sequence[float], smale_eigs: Sequence[float], dim_G: int, dim_Q: int = DIM_Q,
             scale: float | None = None, method: str = "regular") -> StabilityVerdict:
    a = tuple(float(x) for x in arnold_eigs)
    s = tuple(float(x) for x in smale_eigs)
    allv = np.array(a + s)
    if not np.all(np.isfinite(allv)):
        raise ValueError("eigenvalues must be finite")
    ref = scale if scale is not None else (float(np.abs(allv).max()) if allv.size else 0.0)
    thr = DEGENERACY_RTOL * ref
    degenerate = bool(np.any(np.abs(allv) < thr)) if allv.size else False
    neg = int(np.sum(allv < 0))
    if neg == 0 and not degenerate and dim_G < dim_Q:
        cls = GMU_STABLE
    elif neg % 2 == 1:
        cls = UNSTABLE
    else:
        cls = INCONCLUSIVE
    return StabilityVerdict(a, s, neg, cls, method, degenerate)


def regular_stability(I, q: Configuration, gen, mu=None) -> tuple[StabilityVerdict, REMSplitting]:
    sp = build_splitting(I, q, gen, mu)
    A = arnold_form(I, q, gen, splitting=sp)
    S = smale_form(I, q, _rotate(sp.mu, q.attitude), basis=sp.V_int)
    dim_G = 3 if sp.mode == ASYM else 4
    v = classify(form_eigs(A), form_eigs(S), dim_G)
    return v, sp


def singular_data(I, q: Configuration, gen) -> SingularREMData:
    gen = gen_vector(gen)
    mode = _mode(gen)
    R, g = canonical(q, gen)
    Xq = fundamental_fields(Configuration.at(R), mode)
    n = Xq.shape[1]
    g_q = _null(Xq, 1e-9)
    if g_q.shape[1] == 0:
        raise SingularHypothesis("configuration isotropy algebra is discrete; use the regular test")
    L = locked_inertia_body(I, R, mode)
    m = L @ g
    G = kinetic_metric(I, R)
    # infinitesimal isotropy of p_q: zeta in g_q with ad*_zeta mu = 0 (the fiber momentum is fixed)
    gp = g_q @ _null(coad_matrix(m) @ g_q) if g_q.size else g_q
    if gp.shape[1] != 0:
        raise SingularHypothesis("isotropy of the phase-space point is not discrete")
    if np.linalg.matrix_rank(Xq, tol=1e-9) >= DIM_Q:
        raise SingularHypothesis("group orbit fills the configuration space")
    g_mu = _null(coad_matrix(m))
    # g = g_q + g_mu + t with t perpendicular to g_mu under L; restricted to a complement of g_q
    span = np.hstack([g_q, g_mu])
    if np.linalg.matrix_rank(span, tol=1e-9) < span.shape[1]:
        raise SingularHypothesis("g_q and g_mu intersect")
    t = _complement_in(_null(g_mu.T @ L), span)
    if span.shape[1] + t.shape[1] != n:
        raise SingularHypothesis("could not complete g_q + g_mu by an L-orthogonal subspace")
    # q^mu = {gamma in t : <ad*_gamma mu, zeta> = 0 for zeta in g_q}
    C = g_q.T @ coad_matrix(m) @ t
    q_mu = t @ _null(C) if t.shape[1] else t
    S = _null((Xq).T @ G)
    Sigma = np.hstack([Xq @ q_mu, S]) if q_mu.shape[1] else S
    W = np.hstack([g_mu, t])
    D = d_locked_times(I, R, g)
    WtD = W.T @ D
    corr = WtD.T @ np.linalg.solve(W.T @ L @ W, WtD)
    return SingularREMData(g_q, g_mu, t, q_mu, S, Sigma, 0.5 * (corr + corr.T))


def _complement_in(cand: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Subspace of ``cand`` complementary to ``span`` (within their sum)."""
    out = []
    base = span.copy()
    for k in range(cand.shape[1]):
        c = cand[:, k]
        trial = np.hstack([base, c[:, None]])
        if np.linalg.matrix_rank(trial, tol=1e-9) > base.shape[1]:
            base = trial
            out.append(c)
    return np.array(out).T if out else np.zeros((cand.shape[0], 0))


def singular_form(I, q: Configuration, gen, data: SingularREMData | None = None, basis=None) -> np.ndarray:
    data = data or singular_data(I, q, gen)
    R, g = canonical(q, gen_vector(gen))
    H = hessian_augmented(I, R, g) + data.corr
    return restrict(H, data.Sigma if basis is None else np.asarray(basis, dtype=float))


def singular_stability(I, q: Configuration, gen) -> StabilityVerdict:
    data = singular_data(I, q, gen)
    F = singular_form(I, q, gen, data)
    dim_G = 4 if len(gen_vector(gen)) == 4 else 3
    return classify((), form_eigs(F), dim_G, method="singular")
