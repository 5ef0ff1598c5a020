"""Downlink beam training with shared resources and per-user MMSE estimation.

Each user observes its dominant beams on distinct resources. Under the
graph scheme a resource also carries every other beam of the same color,
so a user's observation of beam ``i`` is contaminated by the sum of those
beams' effective channel entries.

Matrix orientation: ``B_k`` is ``M x M_k`` (dominant DFT columns), ``C_k``
is ``M_k x M`` (0/1 contamination pattern) and ``X_k = B_k + F C_k^T`` so
that ``X_k^H h = B_k^H h + C_k F^H h``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Coloring, ConflictGraph, validate_coloring
from .spectrum import DominantSupport

SCHEMES = ("orthogonal", "graph")


@dataclass
class UserPlan:
    user_index: int
    beams: np.ndarray
    selection: np.ndarray
    contamination: np.ndarray
    composite: np.ndarray

    @property
    def m_k(self) -> int:
        return len(self.beams)

    @property
    def contamination_sets(self) -> list[np.ndarray]:
        return [np.flatnonzero(row) for row in self.contamination]


@dataclass
class TrainingPlan:
    scheme: str
    m: int
    b_prime: int
    users: list[UserPlan]

    def __getitem__(self, k: int) -> UserPlan:
        return self.users[k]


def build_training_plan(
    coloring: Coloring | None,
    supports: list[DominantSupport],
    f: np.ndarray,
    scheme: str,
) -> TrainingPlan:
    """Per-user selection and contamination matrices for one scheme.

    ``orthogonal`` gives every beam its own resource (``b' = M``, no
    contamination) and ignores ``coloring``. ``graph`` shares a resource
    among all beams of a color (``b' = M_tr``) and requires a proper
    coloring of the conflict graph induced by ``supports``.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    m = f.shape[0]
    if scheme == "graph":
        if coloring is None:
            raise ValueError("graph scheme needs a coloring")
        ok, bad = validate_coloring(ConflictGraph.from_supports(supports, m), coloring)
        if not ok:
            raise ValueError(f"improper coloring, conflicting edges: {bad}")
        b_prime = coloring.m_tr
    else:
        b_prime = m

    if scheme == "graph":
        # sum of all DFT columns per color; column 0 collects uncolored beams
        color_sum = np.zeros((coloring.m_tr + 1, m), dtype=complex)
        np.add.at(color_sum, coloring.colors, f.T)

    users = []
    for sup in supports:
        beams = sup.beam_set
        sel = f[:, beams]
        c = np.zeros((len(beams), m))
        if scheme == "graph":
            own = coloring.colors[beams]
            c[:] = coloring.colors[None, :] == own[:, None]
            c[np.arange(len(beams)), beams] = 0.0
            # B_k + F C_k^T: each column is the sum over the beam's color class
            x = color_sum[own].T
        else:
            x = sel
        users.append(UserPlan(sup.user_index, beams, sel, c, x))
    return TrainingPlan(scheme, m, b_prime, users)


def simulate_pilots(h_true, plan: TrainingPlan, k: int, p_tr: float, sigma2: float, rng=None, noise=None):
    """Pilot observation ``sqrt(p_tr) X_k^H h + n`` with ``n ~ CN(0, sigma2 I)``.

    ``h_true`` is one channel ``(M,)`` or a batch ``(n, M)``. Unit-variance
    complex noise may be supplied through ``noise`` (same leading shape,
    at least ``M_k`` trailing entries; the first ``M_k`` are used) so that
    different plans can share noise draws.
    """
    u = plan[k]
    h_true = np.asarray(h_true)
    obs = np.sqrt(p_tr) * (h_true @ u.composite.conj())
    if noise is None:
        shape = obs.shape
        noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    else:
        noise = np.asarray(noise)[..., : u.m_k]
    return obs + np.sqrt(sigma2) * noise


@dataclass
class MmseFilter:
    w: np.ndarray
    x: np.ndarray
    obs_cov: np.ndarray


def mmse_filter(r: np.ndarray, plan: TrainingPlan, k: int, p_tr: float, sigma2: float) -> MmseFilter:
    u = plan[k]
    x = u.composite
    rx = r @ x
    g = p_tr * (x.conj().T @ rx) + sigma2 * np.eye(u.m_k)
    g = 0.5 * (g + g.conj().T)
    cross = np.sqrt(p_tr) * (u.selection.conj().T @ rx)
    if sigma2 > 0:
        # W = cross g^{-1}, with g Hermitian: W^H = g^{-1} cross^H
        w = np.linalg.solve(g, cross.conj().T).conj().T
    else:
        if u.m_k and np.linalg.matrix_rank(g) < u.m_k:
            warnings.warn("noiseless observation covariance is singular, using pseudo-inverse", RuntimeWarning)
        w = cross @ np.linalg.pinv(g, hermitian=True)
    return MmseFilter(w=w, x=x, obs_cov=g)


def estimate(obs, w: MmseFilter):
    """Apply ``W_k`` to one observation ``(M_k,)`` or a batch ``(n, M_k)``."""
    return np.asarray(obs) @ w.w.T


@dataclass
class MseReport:
    j: float
    tr_r_prime: float
    tr_r_hat: float


def analytic_mse(r: np.ndarray, plan: TrainingPlan, k: int, p_tr: float, sigma2: float, w: MmseFilter | None = None) -> MseReport:
    """Closed-form MSE of the measured-channel estimate, ``tr(R') - tr(R_hat')``."""
    u = plan[k]
    if w is None:
        w = mmse_filter(r, plan, k, p_tr, sigma2)
    r_prime = u.selection.conj().T @ r @ u.selection
    r_hat = w.w @ w.obs_cov @ w.w.conj().T
    tr_rp = float(np.trace(r_prime).real)
    tr_rh = float(np.trace(r_hat).real)
    return MseReport(j=max(tr_rp - tr_rh, 0.0), tr_r_prime=tr_rp, tr_r_hat=tr_rh)


def embed_estimate(h_meas, support: DominantSupport, m: int):
    """Scatter a measured-channel estimate into the full M beam dimensions.

    Works on one vector ``(M_k,)`` or a batch ``(n, M_k)``; entries off
    the support are exactly zero.
    """
    h_meas = np.asarray(h_meas)
    if h_meas.shape[-1] != support.m_k or len(support.mask) != m:
        raise ValueError("estimate length does not match the support")
    out = np.zeros(h_meas.shape[:-1] + (m,), dtype=complex)
    out[..., support.beam_set] = h_meas
    return out
