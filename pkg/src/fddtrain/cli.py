"""Command-line driver: ``fddtrain --preset desk --seed 7 --out results``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from . import env as envmod
from .graph import ConflictGraph, greedy_color, overhead_reduction, validate_coloring
from .harness import PRESETS, ConfigError, ExperimentConfig, load_config, parse_schemes, run_experiment
from .spectrum import DominantSupport, dft_codebook
from .training import analytic_mse, build_training_plan, estimate, mmse_filter, simulate_pilots
from .txsim import rzf_precoder

log = logging.getLogger("fddtrain")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fddtrain", description="Graph-colored downlink training sweeps.")
    p.add_argument("--config", help="key = value config file, applied on top of the preset")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a named configuration")
    p.add_argument("--delta", help="comma-separated threshold sweep in dB, overrides the config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--scheme", choices=["orth", "graph", "both"], help="training schemes to run")
    p.add_argument("--out", help="output directory for CSV tables")
    p.add_argument("--drops", type=int, help="number of geometry drops")
    p.add_argument("--blocks", type=int, help="fading blocks per drop")
    p.add_argument("--workers", type=int, default=1, help="worker processes for drops")
    p.add_argument("--validate", action="store_true", help="run invariant self-checks only")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args) -> ExperimentConfig:
    cfg = PRESETS[args.preset] if args.preset else PRESETS["desk"]
    if args.config:
        cfg = load_config(args.config, cfg)
    over = {}
    if args.delta:
        try:
            over["delta_sweep_db"] = tuple(float(v) for v in args.delta.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"--delta: {exc}") from exc
    if args.seed is not None:
        over["master_seed"] = args.seed
    if args.scheme:
        over["schemes"] = tuple(parse_schemes(args.scheme))
    if args.out:
        over["output_dir"] = args.out
    if args.drops is not None:
        over["n_drops"] = args.drops
    if args.blocks is not None:
        over["n_fading_blocks"] = args.blocks
    return replace(cfg, **over) if over else cfg


# ----------------------------------------------------------------------------
# self-checks


def _check_worked_example():
    sup = [DominantSupport.from_beams(k, b, 6) for k, b in enumerate([(0, 1, 2), (0, 2, 4), (1, 3, 5)])]
    g = ConflictGraph.from_supports(sup, 6)
    c = greedy_color(g)
    return len(g.edges()) == 8 and c.m_tr == 3 and overhead_reduction(c, 6) == 0.5


def _check_random_colorings(rng):
    for _ in range(50):
        sup = [DominantSupport(k, rng.random(64) < rng.uniform(0.02, 0.2)) for k in range(20)]
        g = ConflictGraph.from_supports(sup, 64)
        c = greedy_color(g)
        ok, _ = validate_coloring(g, c)
        if not ok or c.m_tr > g.max_degree + 1:
            return False
    return True


def _check_dft():
    f = dft_codebook(64)
    return np.max(np.abs(f.conj().T @ f - np.eye(64))) < 1e-10


def _random_drop(rng, m=32, n_ms=6, n_s=8):
    cfg = envmod.EnvConfig(n_ms=n_ms, n_s=n_s, m_antennas=m)
    e = envmod.generate_environment(cfg, rng)
    paths = envmod.all_paths(e, cfg)
    return paths, envmod.all_covariances(paths, m)


def _check_covariance(rng):
    paths, covs = _random_drop(rng)
    for p, r in zip(paths, covs):
        tr = np.trace(r).real
        if abs(tr - 32 * p.power) > 1e-9 * tr:
            return False
        if np.linalg.eigvalsh(r).min() < -1e-10 * tr:
            return False
    return True


def _check_eta(rng):
    f = dft_codebook(16)
    h = (rng.standard_normal((16, 4)) + 1j * rng.standard_normal((16, 4))) / np.sqrt(2)
    pre = rzf_precoder(h, 0.1, f)
    total = pre.eta ** 2 * np.sum(np.abs(f @ pre.kh) ** 2)
    return abs(total - 4) < 1e-9 * 4


def _check_mse_oracle(rng):
    m = 16
    paths, covs = _random_drop(rng, m=m, n_ms=1, n_s=6)
    r = covs[0] / np.trace(covs[0]).real * m
    sup = [DominantSupport(0, np.ones(m, dtype=bool))]
    plan = build_training_plan(None, sup, dft_codebook(m), "orthogonal")
    w = mmse_filter(r, plan, 0, 1.0, 1.0)
    j = analytic_mse(r, plan, 0, 1.0, 1.0, w).j
    n = 20000
    lsq = np.linalg.cholesky(r + 1e-12 * np.eye(m))
    h = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2) @ lsq.T
    est = estimate(simulate_pilots(h, plan, 0, 1.0, 1.0, rng), w)
    emp = np.mean(np.sum(np.abs(h @ plan[0].selection.conj() - est) ** 2, axis=1))
    return abs(emp - j) < 0.05 * j


def self_check(seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    checks = [
        ("worked example: 8 edges, 3 colors, overhead 0.5", _check_worked_example),
        ("greedy coloring proper and within max-degree + 1", lambda: _check_random_colorings(rng)),
        ("DFT codebook unitary (1e-10)", _check_dft),
        ("covariance PSD and trace identity (1e-9)", lambda: _check_covariance(rng)),
        ("RZF power normalization (1e-9)", lambda: _check_eta(rng)),
        ("analytic MSE matches Monte Carlo (5%)", lambda: _check_mse_oracle(rng)),
    ]
    ok = True
    for name, fn in checks:
        passed = bool(fn())
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
    print("all checks passed" if ok else "some checks FAILED")
    return ok


def _join_negative_values(argv):
    # "--delta -60,-40" would otherwise read the list as an unknown flag
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--delta":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--delta={nxt}")
        else:
            out.append(tok)
    return out


def cli_main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
        if args.validate:
            return 0 if self_check(args.seed or 0) else 2
        cfg = resolve_config(args)
    except _UsageError as exc:
        print(f"fddtrain: error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"fddtrain: config error: {exc}", file=sys.stderr)
        return 1

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        result = run_experiment(cfg, write=True, n_workers=args.workers)
    except Exception as exc:  # noqa: BLE001 - every runtime failure maps to exit 2
        print(f"fddtrain: runtime error: {exc}", file=sys.stderr)
        return 2

    best = result.best_delta_index()
    sr = result.sum_rate().mean
    for si, scheme in enumerate(cfg.schemes):
        di = best[si]
        print(f"{scheme:>10}: best delta {cfg.delta_sweep_db[di]:g} dB, mean sum rate {sr[di, si]:.4g}")
    print(f"tables written to {cfg.output_dir}")
    return 0


def main():
    sys.exit(cli_main())
