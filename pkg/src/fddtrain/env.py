"""Random scattering geometry and the per-user channel model.

A drop places the BS at the midpoint of one edge of a square area (or at
its center), and scatters MSs and single-bounce reflectors uniformly over
the square. Every user sees ``n_s`` scattered paths plus one direct path.
The BS carries a half-wavelength ULA whose axis lies along the BS edge, so
broadside points into the area.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

BS_PLACEMENTS = ("edge", "center")


@dataclass(frozen=True)
class EnvConfig:
    """Geometry and propagation parameters of one deployment."""

    area_side: float = 707.0
    n_ms: int = 100
    n_s: int = 50
    epsilon: float = 50.0
    gamma: float = 2.5
    beta: float = 0.7
    m_antennas: int = 400
    p_ref: float = 1.0
    bs_placement: str = "edge"
    seed: int = 0

    def __post_init__(self):
        if self.area_side <= 0:
            raise ValueError("area_side must be positive")
        if self.n_ms < 1:
            raise ValueError("n_ms must be >= 1")
        if self.n_s < 0:
            raise ValueError("n_s must be >= 0")
        if self.m_antennas < 2:
            raise ValueError("m_antennas must be >= 2")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.p_ref <= 0:
            raise ValueError("p_ref must be positive")
        if self.bs_placement not in BS_PLACEMENTS:
            raise ValueError(f"bs_placement must be one of {BS_PLACEMENTS}")


@dataclass
class Environment:
    """Node coordinates of one drop, in meters."""

    bs_position: np.ndarray
    ms_positions: np.ndarray
    scatterer_positions: np.ndarray

    @property
    def n_ms(self) -> int:
        return len(self.ms_positions)

    @property
    def n_s(self) -> int:
        return len(self.scatterer_positions)

    def to_text(self) -> str:
        """Serialize as a drop file: section headers, then one ``x y`` per line."""
        lines = ["BS", _fmt_point(self.bs_position), "MS"]
        lines += [_fmt_point(p) for p in self.ms_positions]
        lines.append("SCATTERER")
        lines += [_fmt_point(p) for p in self.scatterer_positions]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Environment":
        sections: dict[str, list] = {"BS": [], "MS": [], "SCATTERER": []}
        current = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line in sections:
                current = line
                continue
            if current is None:
                raise ValueError(f"coordinate before any section header: {line!r}")
            x, y = (float(v) for v in line.split())
            sections[current].append((x, y))
        if len(sections["BS"]) != 1:
            raise ValueError("drop file must contain exactly one BS coordinate")
        return cls(
            bs_position=np.array(sections["BS"][0]),
            ms_positions=np.array(sections["MS"], dtype=float).reshape(-1, 2),
            scatterer_positions=np.array(sections["SCATTERER"], dtype=float).reshape(-1, 2),
        )


def _fmt_point(p) -> str:
    return f"{float(p[0])!r} {float(p[1])!r}"


@dataclass
class PathSet:
    """Per-path amplitude, angle of departure and delay for one user.

    The first ``n_s`` entries are the scattered paths in scatterer order,
    the last entry is the direct path.
    """

    user_index: int
    gain_mag: np.ndarray
    aod: np.ndarray
    delay: np.ndarray = field(default=None)

    def __post_init__(self):
        self.gain_mag = np.asarray(self.gain_mag, dtype=float)
        self.aod = np.asarray(self.aod, dtype=float)
        if self.delay is None:
            self.delay = np.zeros_like(self.gain_mag)
        self.delay = np.asarray(self.delay, dtype=float)
        if not (self.gain_mag.shape == self.aod.shape == self.delay.shape):
            raise ValueError("gain_mag, aod and delay must have equal length")

    @property
    def n_paths(self) -> int:
        return len(self.gain_mag)

    @property
    def power(self) -> float:
        return float(np.sum(self.gain_mag ** 2))


def generate_environment(cfg: EnvConfig, rng: np.random.Generator) -> Environment:
    side = cfg.area_side
    if cfg.bs_placement == "edge":
        bs = np.array([side / 2.0, 0.0])
    else:
        bs = np.array([side / 2.0, side / 2.0])
    ms = rng.uniform(0.0, side, size=(cfg.n_ms, 2))
    scat = rng.uniform(0.0, side, size=(cfg.n_s, 2))
    return Environment(bs_position=bs, ms_positions=ms, scatterer_positions=scat)


def path_loss(d, epsilon: float, gamma: float):
    """Directional path loss ``(1 + d/epsilon)**gamma`` (a gain divisor)."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    out = (1.0 + d / epsilon) ** gamma
    return float(out) if out.ndim == 0 else out


def _aod(bs: np.ndarray, points: np.ndarray) -> np.ndarray:
    # the ULA axis is x; only sin(theta) = dx/d is observable, so
    # arcsin folds any back-plane point onto the front half-plane
    delta = np.atleast_2d(points) - bs
    dist = np.hypot(delta[:, 0], delta[:, 1])
    s = np.divide(delta[:, 0], dist, out=np.zeros_like(dist), where=dist > 0)
    theta = np.arcsin(np.clip(s, -1.0, 1.0))
    # theta = +pi/2 and -pi/2 give the same half-wavelength steering vector
    theta[theta >= np.pi / 2] = -np.pi / 2
    return theta


def derive_paths(env: Environment, k: int, cfg: EnvConfig) -> PathSet:
    if not 0 <= k < env.n_ms:
        raise IndexError(f"user index {k} out of range")
    bs = env.bs_position
    ms = env.ms_positions[k]
    scat = env.scatterer_positions.reshape(-1, 2)

    d_p = np.hypot(*(scat - bs).T)
    d_pk = np.hypot(*(scat - ms).T)
    d_k = float(np.hypot(*(ms - bs)))

    scattered = np.sqrt(
        cfg.p_ref
        / (cfg.beta * path_loss(d_p, cfg.epsilon, cfg.gamma) * path_loss(d_pk, cfg.epsilon, cfg.gamma))
    )
    direct = np.sqrt(cfg.p_ref / path_loss(d_k, cfg.epsilon, cfg.gamma))

    return PathSet(
        user_index=k,
        gain_mag=np.append(np.atleast_1d(scattered), direct),
        aod=np.append(_aod(bs, scat) if len(scat) else [], _aod(bs, ms)),
        delay=np.append((d_p + d_pk) / SPEED_OF_LIGHT, d_k / SPEED_OF_LIGHT),
    )


def steering_vector(theta, m: int) -> np.ndarray:
    """Half-wavelength ULA response, entry ``i`` equal to ``exp(j*pi*i*sin(theta))``.

    A scalar ``theta`` gives shape ``(m,)``; an array of angles gives one
    column per angle, shape ``(m, len(theta))``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    theta = np.asarray(theta, dtype=float)
    idx = np.arange(m)
    return np.exp(1j * np.pi * np.multiply.outer(idx, np.sin(theta)))


def covariance(paths: PathSet, m: int) -> np.ndarray:
    """Channel covariance ``sum_p |alpha_p|^2 a(theta_p) a(theta_p)^H``."""
    a = steering_vector(paths.aod, m)
    r = (a * paths.gain_mag ** 2) @ a.conj().T
    # exact Hermitian symmetry, rounding in the product is not symmetric
    return 0.5 * (r + r.conj().T)


def realize_channel(paths: PathSet, m: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw fading-block channel vectors with one uniform phase per path.

    Returns shape ``(m,)`` when ``size`` is None, otherwise ``(size, m)``.
    """
    a = steering_vector(paths.aod, m)
    n = 1 if size is None else size
    phi = rng.uniform(0.0, 2 * np.pi, size=(n, paths.n_paths))
    coeff = paths.gain_mag * np.exp(1j * phi)
    h = coeff @ a.T
    return h[0] if size is None else h


def all_paths(env: Environment, cfg: EnvConfig) -> list[PathSet]:
    return [derive_paths(env, k, cfg) for k in range(env.n_ms)]


def all_covariances(paths: list[PathSet], m: int) -> np.ndarray:
    """Stack of per-user covariances, shape ``(n_users, m, m)``."""
    return np.stack([covariance(p, m) for p in paths])
