"""RZF precoding on embedded estimates, SINR, net rate and power scaling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PrecoderSet:
    """RZF precoder on stacked estimates ``h_hat`` (``M x N``).

    ``kh`` holds ``K H_hat``, the only product of ``K`` that precoding and
    SINR evaluation need.
    """

    h_hat: np.ndarray
    kh: np.ndarray
    eta: float
    f: np.ndarray
    sigma2: float
    no_inverse: bool = False

    @property
    def k(self) -> np.ndarray:
        """The explicit ``M x M`` matrix ``K``; badly conditioned when sigma2 is tiny."""
        gram = self.h_hat @ self.h_hat.conj().T + self.sigma2 * np.eye(self.h_hat.shape[0])
        return gram if self.no_inverse else np.linalg.inv(gram)

    @property
    def precoders(self) -> np.ndarray:
        """Columns ``p_k = eta K h_hat_k``, shape ``(M, N)``."""
        return self.eta * self.kh

    @property
    def n_users(self) -> int:
        return self.h_hat.shape[1]


def rzf_precoder(h_hats, sigma2: float, f: np.ndarray, no_inverse: bool = False) -> PrecoderSet:
    """Regularized zero-forcing precoder ``P = eta K H_hat``.

    ``K = (H_hat H_hat^H + sigma2 I)^{-1}``; with ``no_inverse`` the
    un-inverted bracket is used instead. ``eta`` scales the total precoded
    power through ``F`` to the number of users.

    ``K H_hat`` is formed as ``H_hat (H_hat^H H_hat + sigma2 I_N)^{-1}``.
    The two are equal, but the ``M x M`` inverse has condition number near
    ``|H_hat|^2 / sigma2`` once ``N < M`` and loses every digit at realistic
    noise powers.
    """
    h = np.column_stack(h_hats) if not isinstance(h_hats, np.ndarray) else np.asarray(h_hats)
    if h.ndim != 2 or h.shape[1] < 1:
        raise ValueError("need at least one estimate")
    m, n = h.shape
    if no_inverse:
        kh = h @ (h.conj().T @ h) + sigma2 * h
    else:
        if sigma2 <= 0 and not np.any(h):
            raise np.linalg.LinAlgError("all-zero estimates with sigma2 = 0 give a singular RZF matrix")
        small = h.conj().T @ h + sigma2 * np.eye(n)
        # kh^H = small^{-1} h^H with small Hermitian
        kh = np.linalg.solve(small, h.conj().T).conj().T
    power = float(np.sum(np.abs(f @ kh) ** 2))
    if power <= 0:
        raise ValueError("precoder has zero power: all estimates are zero")
    return PrecoderSet(h_hat=h, kh=kh, eta=float(np.sqrt(n / power)), f=f, sigma2=sigma2, no_inverse=no_inverse)


def sinr(h_physical, precoder: PrecoderSet, p_data: float, sigma2: float, h_effective=None) -> np.ndarray:
    """Per-user SINR with the estimation-error and interference terms.

    ``h_physical`` holds the true antenna-domain channels as columns
    ``(M, N)`` (or a list of vectors), in the same user order as the
    precoder's estimates.
    """
    hp = np.column_stack(h_physical) if not isinstance(h_physical, np.ndarray) else h_physical
    if h_effective is None:
        h_effective = precoder.f.conj().T @ hp
    h_hat = precoder.h_hat
    n = precoder.n_users
    kh = precoder.kh
    scale = p_data / n * precoder.eta ** 2

    signal = np.abs(np.einsum("mk,mk->k", h_hat.conj(), kh)) ** 2
    err = h_effective - h_hat
    error = np.abs(np.einsum("mk,mk->k", err.conj(), kh)) ** 2
    # cross[k, k'] = h_k^H F K h_hat_k'
    cross = np.abs(hp.conj().T @ (precoder.f @ kh)) ** 2
    interference = cross.sum(axis=1) - np.diag(cross)
    return scale * signal / (sigma2 + scale * error + scale * interference)


def rate(sinr_k, b_prime: int, t_slots: int, log_base: float = 2.0):
    """Net rate ``(1 - b'/T) log(1 + SINR)``; ``log_base`` 2 or ``np.e``."""
    if not 0 <= b_prime <= t_slots:
        raise ValueError(f"b' = {b_prime} must lie in [0, T = {t_slots}]")
    return (1.0 - b_prime / t_slots) * np.log1p(np.asarray(sinr_k)) / np.log(log_base)


def scale_power(p_tx: float, t_slots: int, m: int, b_prime: int) -> float:
    """Data power ``(T - M)/(T - b') * P_tx`` for a training length ``b'``."""
    if b_prime >= t_slots:
        raise ZeroDivisionError(f"b' = {b_prime} leaves no data slots in T = {t_slots}")
    return (t_slots - m) / (t_slots - b_prime) * p_tx
