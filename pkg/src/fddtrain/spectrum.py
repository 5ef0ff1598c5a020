"""DFT beam codebook, per-user beam gains and dominant-beam thresholding."""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

import numpy as np


def dft_codebook(m: int) -> np.ndarray:
    """Unitary M-point DFT matrix whose column ``i`` points at ``sin(theta) = 2i/m``.

    Column ``i`` has entries ``exp(j*2*pi*n*i/m)/sqrt(m)``, which matches the
    phase progression of :func:`fddtrain.env.steering_vector`.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = np.arange(m)
    return np.exp(2j * np.pi * np.outer(n, n) / m) / np.sqrt(m)


def beam_directions(m: int) -> np.ndarray:
    """Pointing angle (radians) of each DFT column, in column order."""
    u = 2.0 * np.arange(m) / m
    u[u >= 1.0] -= 2.0
    return np.arcsin(u)


def beam_gains(r: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Average beam gains ``|b_i^H R b_i|^2``.

    ``r`` may be one ``(M, M)`` covariance or a stack ``(K, M, M)``; the
    result has shape ``(M,)`` or ``(K, M)`` accordingly.
    """
    r = np.asarray(r)
    if r.shape[-2:] != (f.shape[0], f.shape[0]) or f.shape[0] != f.shape[1]:
        raise ValueError(f"covariance shape {r.shape} does not match codebook {f.shape}")
    quad = np.einsum("ni,...nm,mi->...i", f.conj(), r, f).real
    return np.abs(quad) ** 2


@dataclass
class DominantSupport:
    """Binary dominant-beam mask of one user; beam indices are 0-based."""

    user_index: int
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def beam_set(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def m_k(self) -> int:
        return int(self.mask.sum())

    @property
    def trainable(self) -> bool:
        return self.m_k > 0

    @classmethod
    def from_beams(cls, user_index: int, beams, m: int) -> "DominantSupport":
        mask = np.zeros(m, dtype=bool)
        mask[list(beams)] = True
        return cls(user_index, mask)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dominant_support(gains: np.ndarray, delta_db: float, user_index: int = 0, reference: float = 1.0) -> DominantSupport:
    """Select beams with ``gain >= reference * 10**(delta_db/10)``.

    A user with no beam above threshold comes back with ``m_k == 0``
    (``trainable`` is False); callers decide how to account for it.
    """
    threshold = reference * db_to_linear(delta_db)
    return DominantSupport(user_index, np.asarray(gains) >= threshold)


def dominant_supports(gains: np.ndarray, delta_db: float, reference: float = 1.0) -> list[DominantSupport]:
    return [dominant_support(g, delta_db, k, reference) for k, g in enumerate(gains)]


def spectra_csv(gains: np.ndarray, supports: list[DominantSupport]) -> str:
    """Rows ``user, beam, lambda, g`` for every user and beam."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user", "beam", "lambda", "g"])
    for k, sup in enumerate(supports):
        for i, lam in enumerate(gains[k]):
            w.writerow([k, i, f"{lam:.9g}", int(sup.mask[i])])
    return buf.getvalue()
