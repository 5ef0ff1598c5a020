import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fddtrain import env as E


def test_config_rejects_no_users():
    with pytest.raises(ValueError):
        E.EnvConfig(n_ms=0)


@pytest.mark.parametrize(
    "kw", [dict(n_s=-1), dict(m_antennas=1), dict(epsilon=0.0), dict(gamma=-1.0), dict(beta=0.0), dict(beta=1.5), dict(bs_placement="corner")]
)
def test_config_invariants(kw):
    with pytest.raises(ValueError):
        E.EnvConfig(**kw)


def test_environment_deterministic():
    cfg = E.EnvConfig(n_ms=3, n_s=2)
    a = E.generate_environment(cfg, np.random.default_rng(11))
    b = E.generate_environment(cfg, np.random.default_rng(11))
    assert np.array_equal(a.ms_positions, b.ms_positions)
    assert np.array_equal(a.scatterer_positions, b.scatterer_positions)


def test_environment_counts_and_bounds():
    cfg = E.EnvConfig(area_side=707.0, n_ms=100, n_s=50)
    e = E.generate_environment(cfg, np.random.default_rng(0))
    assert e.ms_positions.shape == (100, 2)
    assert e.scatterer_positions.shape == (50, 2)
    pts = np.vstack([e.ms_positions, e.scatterer_positions, e.bs_position[None]])
    assert np.all((pts >= 0) & (pts <= 707.0))
    assert np.allclose(e.bs_position, [353.5, 0.0])


def test_center_placement():
    cfg = E.EnvConfig(area_side=100.0, bs_placement="center")
    e = E.generate_environment(cfg, np.random.default_rng(0))
    assert np.allclose(e.bs_position, [50.0, 50.0])


def test_drop_file_roundtrip():
    cfg = E.EnvConfig(n_ms=4, n_s=3)
    e = E.generate_environment(cfg, np.random.default_rng(5))
    text = e.to_text()
    assert text.splitlines()[0] == "BS" and "SCATTERER" in text
    back = E.Environment.from_text(text)
    assert np.array_equal(back.ms_positions, e.ms_positions)
    assert np.array_equal(back.scatterer_positions, e.scatterer_positions)
    assert np.array_equal(back.bs_position, e.bs_position)


def test_drop_file_rejects_orphan_coordinates():
    with pytest.raises(ValueError):
        E.Environment.from_text("1 2\nBS\n0 0\n")


def test_path_loss_values():
    assert E.path_loss(0.0, 20.0, 2.5) == 1.0
    assert E.path_loss(3.0, 1.0, 2.5) == pytest.approx(32.0, rel=1e-14)
    with pytest.raises(ValueError):
        E.path_loss(-1.0, 1.0, 2.5)


@given(
    eps=st.floats(0.1, 1e3),
    gamma=st.floats(0.1, 6.0),
    d1=st.floats(0.0, 1e4),
    d2=st.floats(0.0, 1e4),
)
def test_path_loss_monotone(eps, gamma, d1, d2):
    lo, hi = sorted((d1, d2))
    assert E.path_loss(lo, eps, gamma) <= E.path_loss(hi, eps, gamma)
    assert E.path_loss(10.0, eps, gamma) > E.path_loss(5.0, eps, gamma)


def _env(bs, ms, scat):
    return E.Environment(np.asarray(bs, float), np.asarray(ms, float).reshape(-1, 2), np.asarray(scat, float).reshape(-1, 2))


def test_paths_count_and_direct_gain():
    cfg = E.EnvConfig(n_ms=5, n_s=7)
    e = E.generate_environment(cfg, np.random.default_rng(2))
    for k in range(5):
        p = E.derive_paths(e, k, cfg)
        assert p.n_paths == 8
        d_k = np.hypot(*(e.ms_positions[k] - e.bs_position))
        assert p.gain_mag[-1] == pytest.approx(np.sqrt(1.0 / E.path_loss(d_k, cfg.epsilon, cfg.gamma)), rel=1e-12)
        assert np.all(p.gain_mag > 0)
        assert np.all((p.aod >= -np.pi / 2) & (p.aod < np.pi / 2))
    with pytest.raises(IndexError):
        E.derive_paths(e, 5, cfg)


def test_ms_on_scatterer():
    cfg = E.EnvConfig(beta=0.7, epsilon=20.0, gamma=2.5)
    e = _env([0, 0], [[30, 40]], [[30, 40]])
    p = E.derive_paths(e, 0, cfg)
    expect = np.sqrt(1.0 / (0.7 * E.path_loss(50.0, 20.0, 2.5)))
    assert p.gain_mag[0] == pytest.approx(expect, rel=1e-12)
    assert p.delay[0] == pytest.approx(50.0 / E.SPEED_OF_LIGHT)


def test_distance_doubling_scaling():
    # with epsilon -> 0 each hop scales as d**gamma, so doubling both hops
    # multiplies the amplitude by 2**-gamma
    cfg = E.EnvConfig(epsilon=1e-9, gamma=2.5)
    ms, scat = np.array([[120.0, 310.0]]), np.array([[60.0, 90.0], [400.0, 20.0]])
    g1 = E.derive_paths(_env([0, 0], ms, scat), 0, cfg).gain_mag[:-1]
    g2 = E.derive_paths(_env([0, 0], 2 * ms, 2 * scat), 0, cfg).gain_mag[:-1]
    assert np.allclose(g2 / g1, 2.0 ** -2.5, rtol=1e-6)


def test_aod_broadside_and_endfire():
    cfg = E.EnvConfig(n_s=0)
    e = _env([0, 0], [[0, 10], [10, 0], [-10, 0], [10, 10]], np.zeros((0, 2)))
    aods = [E.derive_paths(e, k, cfg).aod[0] for k in range(4)]
    assert aods[0] == 0.0
    assert aods[1] == -np.pi / 2  # +pi/2 folds onto -pi/2
    assert aods[2] == -np.pi / 2
    assert aods[3] == pytest.approx(np.pi / 4)


def test_steering_vector_examples():
    assert np.allclose(E.steering_vector(0.0, 5), np.ones(5))
    assert np.allclose(E.steering_vector(np.pi / 2, 2), [1, -1])
    for th in np.linspace(-1.5, 1.5, 7):
        a = E.steering_vector(th, 17)
        assert np.allclose(np.abs(a), 1.0)
        assert np.vdot(a, a).real == pytest.approx(17.0)
    assert E.steering_vector(np.array([0.1, 0.2, 0.3]), 4).shape == (4, 3)
    with pytest.raises(ValueError):
        E.steering_vector(0.0, 0)


def test_covariance_single_path():
    r = E.covariance(E.PathSet(0, [1.0], [0.0]), 6)
    assert np.allclose(r, np.ones((6, 6)))
    assert np.linalg.matrix_rank(r) == 1
    assert np.trace(r).real == pytest.approx(6.0)


def test_covariance_orthogonal_paths_eigenvalues():
    m = 16
    # sin(theta) = 0 and 2/m give orthogonal steering vectors
    paths = E.PathSet(0, [0.8, 0.3], [0.0, np.arcsin(2.0 / m)])
    ev = np.sort(np.linalg.eigvalsh(E.covariance(paths, m)))[::-1]
    assert np.allclose(ev[:2], [m * 0.64, m * 0.09], rtol=1e-10)
    assert np.allclose(ev[2:], 0.0, atol=1e-10)


def test_covariance_invariants_random_drop():
    cfg = E.EnvConfig(n_ms=10, n_s=12, m_antennas=48)
    e = E.generate_environment(cfg, np.random.default_rng(3))
    paths = E.all_paths(e, cfg)
    covs = E.all_covariances(paths, 48)
    for p, r in zip(paths, covs):
        tr = np.trace(r).real
        assert np.allclose(r, r.conj().T, rtol=0, atol=1e-12 * tr)
        assert np.linalg.eigvalsh(r).min() >= -1e-10 * tr
        assert tr == pytest.approx(48 * p.power, rel=1e-9)
        assert np.linalg.matrix_rank(r, tol=1e-9 * tr) <= p.n_paths


def test_direct_only_channel_norm():
    p = E.PathSet(0, [0.37], [0.4])
    h = E.realize_channel(p, 12, np.random.default_rng(0), size=50)
    assert np.allclose(np.sum(np.abs(h) ** 2, axis=1), 12 * 0.37 ** 2, rtol=1e-12)


def test_realize_channel_deterministic_and_shapes():
    p = E.PathSet(0, [0.5, 0.2], [0.1, -0.3])
    a = E.realize_channel(p, 8, np.random.default_rng(9))
    b = E.realize_channel(p, 8, np.random.default_rng(9))
    assert a.shape == (8,) and np.array_equal(a, b)
    assert E.realize_channel(p, 8, np.random.default_rng(9), size=3).shape == (3, 8)


def test_sample_covariance_converges():
    cfg = E.EnvConfig(n_ms=1, n_s=4, m_antennas=8)
    e = E.generate_environment(cfg, np.random.default_rng(1))
    p = E.derive_paths(e, 0, cfg)
    r = E.covariance(p, 8)
    scale = np.trace(r).real / 8
    rng = np.random.default_rng(4)

    def err(n):
        h = E.realize_channel(p, 8, rng, size=n)
        return np.max(np.abs(h.T @ h.conj() / n - r)) / scale

    e_small, e_big = err(1_000), err(100_000)
    assert e_big < e_small
    assert e_big <= 0.02


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_realize_channel_reproducible(seed):
    p = E.PathSet(0, [0.5, 0.1, 0.2], [0.0, 0.5, -0.7])
    a = E.realize_channel(p, 4, np.random.default_rng(seed), size=2)
    b = E.realize_channel(p, 4, np.random.default_rng(seed), size=2)
    assert np.array_equal(a, b)
