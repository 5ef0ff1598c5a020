"""Seeded Monte Carlo driver for threshold sweeps over both training schemes.

One drop is a geometry draw. Within a drop the fading blocks and the pilot
noise are drawn once and shared by every threshold and scheme, so the
schemes are compared on common random numbers. Drop ``d`` draws from
``SeedSequence([master_seed, d])`` and nothing else, which makes results
independent of drop execution order.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import env as envmod
from .graph import ConflictGraph, greedy_color
from .spectrum import beam_gains, dft_codebook, dominant_supports
from .training import SCHEMES, analytic_mse, build_training_plan, estimate, mmse_filter, simulate_pilots
from .txsim import rate, rzf_precoder, scale_power, sinr

log = logging.getLogger(__name__)

QUANTILES = (10, 25, 50, 75, 90)


class ConfigError(ValueError):
    pass


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    env: envmod.EnvConfig = field(default_factory=envmod.EnvConfig)
    delta_sweep_db: tuple = (-50.0, -45.0, -40.0, -35.0, -30.0, -25.0, -20.0)
    schemes: tuple = SCHEMES
    n_drops: int = 50
    n_fading_blocks: int = 20
    rho_tr_db: float = 30.0
    p_tx_dbm: float = 30.0
    sigma2_dbm: float = -94.0
    t_slots: str | int = "2M"
    log_base: float = 2.0
    delta_relative_to_max: bool = False
    rzf_no_inverse: bool = False
    output_dir: str = "results"
    master_seed: int = 0

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.delta_sweep_db)
        object.__setattr__(self, "delta_sweep_db", deltas)
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if not deltas:
            raise ConfigError("delta sweep is empty")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ConfigError("delta sweep must be strictly increasing")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be a nonempty subset of {SCHEMES}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("duplicate scheme")
        if self.n_drops < 1 or self.n_fading_blocks < 1:
            raise ConfigError("n_drops and n_fading_blocks must be >= 1")
        if self.log_base not in (2.0, float(np.e)):
            raise ConfigError("log_base must be 2 or e")
        if not (isinstance(self.t_slots, int) or self.t_slots == "2M"):
            raise ConfigError("t_slots must be '2M' or an integer")
        if self.t_slots_value <= self.env.m_antennas:
            raise ConfigError("T must exceed M, otherwise orthogonal training leaves no data slots")

    @property
    def m(self) -> int:
        return self.env.m_antennas

    @property
    def t_slots_value(self) -> int:
        return 2 * self.m if self.t_slots == "2M" else int(self.t_slots)

    @property
    def sigma2(self) -> float:
        return dbm_to_watt(self.sigma2_dbm)

    @property
    def p_tr(self) -> float:
        return 10.0 ** (self.rho_tr_db / 10.0) * self.sigma2

    @property
    def p_tx(self) -> float:
        return dbm_to_watt(self.p_tx_dbm)


def _sweep(lo: float, hi: float, step: float) -> tuple:
    return tuple(np.round(np.arange(lo, hi + step / 2, step), 6).tolist())


PRESETS = {
    "paper": ExperimentConfig(
        env=envmod.EnvConfig(area_side=707.1, n_ms=100, n_s=50, m_antennas=400),
        delta_sweep_db=_sweep(-50.0, -20.0, 5.0),
        n_drops=50,
        n_fading_blocks=20,
    ),
    "desk": ExperimentConfig(
        env=envmod.EnvConfig(area_side=707.1, n_ms=20, n_s=10, m_antennas=64),
        delta_sweep_db=_sweep(-80.0, -24.0, 4.0),
        n_drops=20,
        n_fading_blocks=10,
        t_slots=128,
    ),
}


_ENV_KEYS = {f.name for f in fields(envmod.EnvConfig)}
_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_value(key: str, raw: str, template):
    raw = raw.strip()
    if key == "delta_sweep_db":
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if key == "schemes":
        return tuple(parse_schemes(raw))
    if key == "t_slots":
        return raw if raw.upper() == "2M" else int(raw)
    if key == "log_base":
        if raw in ("e", "E"):
            return float(np.e)
        return float(raw)
    current = getattr(template, key)
    if isinstance(current, bool):
        if raw.lower() not in _BOOL:
            raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
        return _BOOL[raw.lower()]
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def parse_schemes(raw: str) -> list[str]:
    alias = {"orth": ["orthogonal"], "orthogonal": ["orthogonal"], "graph": ["graph"], "both": list(SCHEMES)}
    out: list[str] = []
    for tok in raw.replace(",", " ").split():
        if tok not in alias:
            raise ConfigError(f"unknown scheme {tok!r}")
        out += [s for s in alias[tok] if s not in out]
    return out


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply ``key = value`` lines (``#`` comments) on top of ``base``.

    Environment keys (``n_ms``, ``epsilon``, ...) and experiment keys share
    one flat namespace.
    """
    base = base or ExperimentConfig()
    env_kw, exp_kw = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _ENV_KEYS:
                env_kw[key] = _parse_value(key, value, base.env)
            elif key in {f.name for f in fields(ExperimentConfig)} and key != "env":
                exp_kw[key] = _parse_value(key, value, base)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    try:
        return replace(base, env=replace(base.env, **env_kw), **exp_kw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config_text(fh.read(), base)


# ----------------------------------------------------------------------------
# one drop


@dataclass
class DropResult:
    """Everything measured in one drop.

    Arrays are indexed ``[delta, scheme, ...]`` in config order; per-user
    arrays carry NaN for untrainable users where a value is undefined.
    """

    drop_id: int
    m_tr: np.ndarray
    b_prime: np.ndarray
    p_data: np.ndarray
    beams_per_user: np.ndarray
    untrainable: np.ndarray
    tr_r_prime: np.ndarray
    j_analytic: np.ndarray
    j_empirical: np.ndarray
    eff_mse_analytic: np.ndarray
    eff_mse_empirical: np.ndarray
    sinr: np.ndarray
    user_rate: np.ndarray

    @property
    def sum_rate(self) -> np.ndarray:
        """Sum rate per block, ``[delta, scheme, block]``."""
        return self.user_rate.sum(axis=-1)


def run_drop(cfg: ExperimentConfig, drop_id: int) -> DropResult:
    ss = np.random.SeedSequence([cfg.master_seed, drop_id])
    geo_ss, fade_ss, noise_ss = ss.spawn(3)
    m, n_users, n_blocks = cfg.m, cfg.env.n_ms, cfg.n_fading_blocks
    n_delta, n_sch = len(cfg.delta_sweep_db), len(cfg.schemes)
    sigma2, p_tr, t = cfg.sigma2, cfg.p_tr, cfg.t_slots_value

    environment = envmod.generate_environment(cfg.env, np.random.default_rng(geo_ss))
    paths = envmod.all_paths(environment, cfg.env)
    covs = envmod.all_covariances(paths, m)
    f = dft_codebook(m)
    lam = beam_gains(covs, f)
    reference = float(lam.max()) if cfg.delta_relative_to_max else 1.0

    fade_rng = np.random.default_rng(fade_ss)
    h_phys = np.stack([envmod.realize_channel(p, m, fade_rng, size=n_blocks) for p in paths], axis=1)
    h_eff = h_phys @ f.conj()  # (block, user, M) rows are F^H h
    noise_rng = np.random.default_rng(noise_ss)
    shape = (n_blocks, n_users, m)
    noise = (noise_rng.standard_normal(shape) + 1j * noise_rng.standard_normal(shape)) / np.sqrt(2)
    tr_r = np.trace(covs, axis1=1, axis2=2).real

    out = dict(
        m_tr=np.zeros(n_delta, dtype=int),
        b_prime=np.zeros((n_delta, n_sch), dtype=int),
        p_data=np.zeros((n_delta, n_sch)),
        beams_per_user=np.zeros((n_delta, n_users), dtype=int),
        untrainable=np.zeros(n_delta, dtype=int),
        tr_r_prime=np.zeros((n_delta, n_users)),
        j_analytic=np.full((n_delta, n_sch, n_users), np.nan),
        j_empirical=np.full((n_delta, n_sch, n_users), np.nan),
        eff_mse_analytic=np.zeros((n_delta, n_sch, n_users)),
        eff_mse_empirical=np.zeros((n_delta, n_sch, n_users)),
        sinr=np.zeros((n_delta, n_sch, n_blocks, n_users)),
        user_rate=np.zeros((n_delta, n_sch, n_blocks, n_users)),
    )

    for di, delta in enumerate(cfg.delta_sweep_db):
        supports = dominant_supports(lam, delta, reference)
        graph = ConflictGraph.from_supports(supports, m)
        coloring = greedy_color(graph)
        trainable = np.array([s.trainable for s in supports])
        out["m_tr"][di] = coloring.m_tr
        out["beams_per_user"][di] = [s.m_k for s in supports]
        out["untrainable"][di] = int((~trainable).sum())

        for si, scheme in enumerate(cfg.schemes):
            plan = build_training_plan(coloring if scheme == "graph" else None, supports, f, scheme)
            b_prime = plan.b_prime
            p_data = scale_power(cfg.p_tx, t, m, b_prime)
            out["b_prime"][di, si] = b_prime
            out["p_data"][di, si] = p_data

            h_hat = np.zeros((n_blocks, n_users, m), dtype=complex)
            for k, sup in enumerate(supports):
                if not sup.trainable:
                    out["eff_mse_analytic"][di, si, k] = tr_r[k]
                    continue
                w = mmse_filter(covs[k], plan, k, p_tr, sigma2)
                rep = analytic_mse(covs[k], plan, k, p_tr, sigma2, w)
                obs = simulate_pilots(h_phys[:, k], plan, k, p_tr, sigma2, noise=noise[:, k])
                est = estimate(obs, w)
                h_hat[:, k, sup.beam_set] = est
                err = h_eff[:, k, sup.beam_set] - est
                out["tr_r_prime"][di, k] = rep.tr_r_prime
                out["j_analytic"][di, si, k] = rep.j
                out["j_empirical"][di, si, k] = np.mean(np.sum(np.abs(err) ** 2, axis=-1))
                out["eff_mse_analytic"][di, si, k] = tr_r[k] - rep.tr_r_prime + rep.j

            out["eff_mse_empirical"][di, si] = np.mean(np.sum(np.abs(h_eff - h_hat) ** 2, axis=-1), axis=0)

            served = np.flatnonzero(trainable)
            if served.size == 0:
                continue
            for b in range(n_blocks):
                pre = rzf_precoder(h_hat[b, served].T, sigma2, f, no_inverse=cfg.rzf_no_inverse)
                s = sinr(h_phys[b, served].T, pre, p_data, sigma2, h_effective=h_eff[b, served].T)
                out["sinr"][di, si, b, served] = s
                out["user_rate"][di, si, b, served] = rate(s, b_prime, t, cfg.log_base)

    return DropResult(drop_id=drop_id, **out)


# ----------------------------------------------------------------------------
# aggregation


def _nanmean(x, axis):
    # all-NaN slices (every user untrainable) are expected and stay NaN
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.nanmean(x, axis=axis)


def _ci95(per_drop: np.ndarray, axis=0) -> np.ndarray:
    n = per_drop.shape[axis]
    if n < 2:
        return np.zeros(np.delete(per_drop.shape, axis))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return 1.96 * np.nanstd(per_drop, axis=axis, ddof=1) / np.sqrt(n)


@dataclass
class CellStat:
    mean: np.ndarray
    ci: np.ndarray


@dataclass
class SweepResult:
    cfg: ExperimentConfig
    drops: list[DropResult]

    def __post_init__(self):
        self.drops = sorted(self.drops, key=lambda d: d.drop_id)

    def _stack(self, name: str) -> np.ndarray:
        return np.stack([getattr(d, name) for d in self.drops])

    def _stat(self, per_drop: np.ndarray) -> CellStat:
        return CellStat(_nanmean(per_drop, 0), _ci95(per_drop))

    # every statistic below is [delta] or [delta, scheme]

    def m_tr(self) -> CellStat:
        return self._stat(self._stack("m_tr").astype(float))

    def overhead(self) -> CellStat:
        return self._stat(self._stack("b_prime") / self.cfg.m)

    def mean_beams(self) -> CellStat:
        return self._stat(self._stack("beams_per_user").mean(axis=-1))

    def untrainable(self) -> np.ndarray:
        return self._stack("untrainable").sum(axis=0)

    def b_prime(self) -> np.ndarray:
        return self._stack("b_prime").mean(axis=0)

    def p_data(self) -> np.ndarray:
        return self._stack("p_data").mean(axis=0)

    def tr_r_prime(self) -> CellStat:
        v = self._stack("tr_r_prime")
        v = np.where(self._stack("beams_per_user") > 0, v, np.nan)
        return self._stat(_nanmean(v, -1))

    def j_analytic(self) -> CellStat:
        return self._stat(_nanmean(self._stack("j_analytic"), -1))

    def j_empirical(self) -> CellStat:
        return self._stat(_nanmean(self._stack("j_empirical"), -1))

    def eff_mse_analytic(self) -> CellStat:
        return self._stat(self._stack("eff_mse_analytic").mean(axis=-1))

    def eff_mse_empirical(self) -> CellStat:
        return self._stat(self._stack("eff_mse_empirical").mean(axis=-1))

    def sum_rate(self) -> CellStat:
        return self._stat(self._stack("user_rate").sum(axis=-1).mean(axis=-1))

    def best_delta_index(self) -> np.ndarray:
        """Sum-rate-maximizing threshold index per scheme."""
        return np.argmax(self.sum_rate().mean, axis=0)

    def user_rates_at(self, di: int, si: int) -> np.ndarray:
        """Block-averaged rate of every user in every drop, shape ``(n_drops, n_ms)``."""
        return self._stack("user_rate")[:, di, si].mean(axis=1)

    def rate_quantiles(self, di: int, si: int) -> np.ndarray:
        return np.percentile(self.user_rates_at(di, si).ravel(), QUANTILES)

    def rate_quantile_se(self, di: int, si: int, n_boot: int = 200) -> np.ndarray:
        """Standard error of the pooled quantiles, bootstrapping whole drops."""
        rates = self.user_rates_at(di, si)
        rng = np.random.default_rng([self.cfg.master_seed, 0xC0F])
        idx = rng.integers(0, len(rates), size=(n_boot, len(rates)))
        boot = np.array([np.percentile(rates[i].ravel(), QUANTILES) for i in idx])
        return boot.std(axis=0, ddof=1)


def run_experiment(cfg: ExperimentConfig, write: bool = True, n_workers: int = 1) -> SweepResult:
    """Run every drop, aggregate, and (optionally) write the CSV tables."""
    if write:
        _check_writable(cfg.output_dir)
    ids = range(cfg.n_drops)
    if n_workers > 1:
        with ProcessPoolExecutor(n_workers) as pool:
            drops = list(pool.map(run_drop, [cfg] * cfg.n_drops, ids))
    else:
        drops = []
        for d in ids:
            drops.append(run_drop(cfg, d))
            log.info("drop %d/%d done", d + 1, cfg.n_drops)
    result = SweepResult(cfg, drops)
    if write:
        emit_csv(result, cfg.output_dir)
    return result


def _check_writable(path: str) -> None:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path!r} is not writable")


# ----------------------------------------------------------------------------
# CSV output


def _g(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_g(v) for v in row])
    return buf.getvalue()


def csv_tables(result: SweepResult) -> dict[str, str]:
    cfg = result.cfg
    deltas, schemes = cfg.delta_sweep_db, cfg.schemes
    cells = [(di, d, si, s) for di, d in enumerate(deltas) for si, s in enumerate(schemes)]
    tables = {}

    mtr, ovh, beams, untr = result.m_tr(), result.overhead(), result.mean_beams(), result.untrainable()
    tables["overhead.csv"] = _table(
        ["delta_db", "scheme", "mean_m_tr", "overhead_ratio", "overhead_ci95", "mean_beams", "mean_beams_ci95", "untrainable_users"],
        [
            (d, s, mtr.mean[di] if s == "graph" else cfg.m, ovh.mean[di, si], ovh.ci[di, si], beams.mean[di], beams.ci[di], untr[di])
            for di, d, si, s in cells
        ],
    )

    ja, je, trp = result.j_analytic(), result.j_empirical(), result.tr_r_prime()
    tables["mse_measured.csv"] = _table(
        ["delta_db", "scheme", "j_analytic", "j_analytic_ci95", "j_empirical", "j_empirical_ci95", "tr_r_prime"],
        [(d, s, ja.mean[di, si], ja.ci[di, si], je.mean[di, si], je.ci[di, si], trp.mean[di]) for di, d, si, s in cells],
    )

    ea, ee = result.eff_mse_analytic(), result.eff_mse_empirical()
    tables["mse_effective.csv"] = _table(
        ["delta_db", "scheme", "mse_analytic", "mse_analytic_ci95", "mse_empirical", "mse_empirical_ci95"],
        [(d, s, ea.mean[di, si], ea.ci[di, si], ee.mean[di, si], ee.ci[di, si]) for di, d, si, s in cells],
    )

    sr, bp, pd = result.sum_rate(), result.b_prime(), result.p_data()
    qcols = [f"q{q}" for q in QUANTILES]
    tables["rates.csv"] = _table(
        ["delta_db", "scheme", "mean_b_prime", "mean_p_data", "mean_sum_rate", "sum_rate_ci95", *qcols, "untrainable_users"],
        [
            (d, s, bp[di, si], pd[di, si], sr.mean[di, si], sr.ci[di, si], *result.rate_quantiles(di, si), untr[di])
            for di, d, si, s in cells
        ],
    )

    rows = []
    emitted = set()
    for selection, picks in cdf_selections(result).items():
        for si, di in picks:
            # a cell already listed under an earlier selection is not repeated
            if (si, di) in emitted:
                continue
            emitted.add((si, di))
            rates = result.user_rates_at(di, si)
            rows.append((selection, schemes[si], deltas[di], "all", "all", rates.mean()))
            for drop, row in zip(result.drops, rates):
                rows += [(selection, schemes[si], deltas[di], drop.drop_id, k, r) for k, r in enumerate(row)]
    tables["rate_cdf.csv"] = _table(["selection", "scheme", "delta_db", "drop_id", "user", "rate"], rows)

    rows = []
    for drop in result.drops:
        for di, d, si, s in cells:
            for k in range(cfg.env.n_ms):
                if drop.beams_per_user[di, k] == 0:
                    continue
                rows.append((drop.drop_id, k, s, d, drop.j_analytic[di, si, k], drop.j_empirical[di, si, k], drop.tr_r_prime[di, k]))
    tables["mse_users.csv"] = _table(["drop_id", "user", "scheme", "delta_db", "j_analytic", "j_empirical", "tr_r_prime"], rows)

    rows = []
    for drop in result.drops:
        for di, d, si, s in cells:
            with np.errstate(divide="ignore"):
                sinr_db = 10 * np.log10(drop.sinr[di, si])
            for b in range(cfg.n_fading_blocks):
                for k in range(cfg.env.n_ms):
                    rows.append((drop.drop_id, b, k, s, d, sinr_db[b, k], drop.user_rate[di, si, b, k], drop.b_prime[di, si]))
    tables["rate_users.csv"] = _table(["drop_id", "block", "user", "scheme", "delta_db", "sinr_db", "rate", "b_prime"], rows)
    return tables


def cdf_selections(result: SweepResult) -> dict[str, list[tuple[int, int]]]:
    """Which ``(scheme, delta)`` cells feed the pooled rate CDF.

    ``graph_optimal`` puts every scheme at the graph scheme's
    sum-rate-maximizing threshold; ``own_optimal`` puts each scheme at its
    own best threshold. Without a graph scheme only ``own_optimal`` exists.
    """
    best = result.best_delta_index()
    schemes = result.cfg.schemes
    out = {}
    if "graph" in schemes:
        dg = int(best[schemes.index("graph")])
        out["graph_optimal"] = [(si, dg) for si in range(len(schemes))]
    out["own_optimal"] = [(si, int(best[si])) for si in range(len(schemes))]
    return out


def emit_csv(result: SweepResult, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in csv_tables(result).items():
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written
