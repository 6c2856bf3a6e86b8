"""Preset experiments: run a validated config, write CSV artifacts, a manifest and a plot script."""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._numerics import normalize_log_weights
from .config import ExperimentConfig, dump_config
from .filter import conditional_mean, filter_path, posterior_probs
from .informed import (
    InformedParams,
    derived_params,
    effective_information_path,
    informed_filter_path,
    informed_posterior,
    multi_source_effective_sigma,
)
from .market import discount_factor, synthesize_paths
from .metrics import (
    InfoReport,
    delta_J,
    expected_entropy,
    info_report,
    mutual_information,
    mutual_information_direct,
    write_info_csv,
)
from .montecarlo import MCConfig, batches, mean_se
from .plotting import emit_plot_script
from .strategy import conditional_excess, pnl_backtest

OUTPUT_ENV = "INFOTRADE_OUTPUT_DIR"


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)


@dataclass
class ExperimentResult:
    name: str
    kind: str
    output_dir: Path
    artifacts: list[Path] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    manifest: Path | None = None
    plot_script: Path | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def resolve_output_dir(cfg: ExperimentConfig, override: str | os.PathLike | None = None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    return Path(env) if env else Path(cfg.output_dir)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run one experiment; every embedded check lands in ``result.checks``."""
    out = resolve_output_dir(cfg, out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = ExperimentResult(cfg.name, cfg.kind, out)
    start = time.perf_counter()
    _RUNNERS[cfg.kind](cfg, res)
    wall = time.perf_counter() - start
    res.plot_script = emit_plot_script(res.artifacts, cfg.kind, out / f"plot_{cfg.name}.py")
    res.manifest = out / "manifest.json"
    manifest = {
        "name": cfg.name,
        "kind": cfg.kind,
        "config": json.loads(dump_config(cfg)),
        "seeds": {"base_seed": None if cfg.mc is None else cfg.mc.seed,
                  "paths": None if cfg.mc is None else cfg.mc.paths,
                  "path_key": "(base_seed, path_index)"},
        "code_version": __version__,
        "wall_time_s": round(wall, 3),
        "artifacts": [p.name for p in res.artifacts],
        "plot_script": res.plot_script.name,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in res.checks],
        "passed": res.passed,
    }
    res.manifest.write_text(json.dumps(manifest, indent=2) + "\n")
    return res


def _fmt(v) -> str:
    return repr(float(v))


def _write_table(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in r])
    return path


# --- mutual-info-curve -----------------------------------------------------

def _run_mutual_info(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    spec, grid, quad = cfg.spec(), cfg.time_grid(), cfg.quad()
    T, H0 = grid.horizon, spec.prior_entropy
    times = grid.eval_times[1:]
    curves = {}
    route_gap = 0.0
    mc = cfg.mc_config()
    for sigma in cfg.sigmas():
        rows = [info_report(t, spec, sigma, T, quad) for t in times]
        route_gap = max(route_gap, max(abs(r.J - mutual_information_direct(r.t, spec, sigma, T, quad)) for r in rows))
        if mc is not None:
            eh, se = expected_entropy(times, spec, sigma, grid, mc)
            for r, m, s in zip(rows, eh, se):
                r.E_Ht, r.se_E_Ht = float(m), float(s)
            gap = np.array([abs(r.J - (H0 - r.E_Ht)) / r.se_E_Ht for r in rows if r.se_E_Ht > 0])
            res.checks.append(Check(f"identity J = H0 - E[H_t] (sigma={sigma})", bool(np.all(gap < 3)),
                                    f"max |gap|/se = {gap.max():.2f}" if gap.size else "no MC spread"))
        path = res.output_dir / f"info_sigma_{sigma:g}.csv"
        write_info_csv(path, rows)
        res.artifacts.append(path)
        J = np.array([r.J for r in rows])
        curves[sigma] = J
        res.checks.append(Check(f"terminal J within 0.01 of H0 (sigma={sigma})", abs(J[-1] - H0) < 0.01,
                                f"J(T-eps) = {J[-1]:.6f}, H0 = {H0:.6f}"))
        res.checks.append(Check(f"J nonnegative and nondecreasing (sigma={sigma})",
                                bool(J.min() >= -1e-12 and np.all(np.diff(J) >= -1e-10)), ""))
    res.checks.append(Check("routes agree within 1e-6", route_gap < 1e-6, f"max gap {route_gap:.2e}"))
    ordered = sorted(curves)
    if len(ordered) > 1:
        ok = all(curves_ordered(curves[a], curves[b], H0) for a, b in zip(ordered, ordered[1:]))
        res.checks.append(Check("curves ordered by sigma", bool(ok), f"sigmas {ordered}"))


def curves_ordered(lower, upper, H0, tol=1e-12) -> bool:
    """``upper > lower`` wherever ``lower`` has not yet saturated at ``H0``.

    Once both curves sit at ``H0`` to rounding precision only ``upper >= lower - tol`` is required.
    """
    lower, upper = np.asarray(lower), np.asarray(upper)
    live = lower < H0 - 1e-9
    return bool(np.all(upper[live] > lower[live]) and np.all(upper >= lower - tol))


# --- sample-paths ----------------------------------------------------------

def _pick_paths(spec, sigma, informed, grid, mc: MCConfig):
    """First path index (in key order) for the highest and for the lowest outcome."""
    want = {spec.n - 1: None, 0: None}
    for i in range(mc.paths):
        b = synthesize_paths(spec, sigma, informed, grid, mc.seed, i)
        if b.outcome_index in want and want[b.outcome_index] is None:
            want[b.outcome_index] = b
        if all(v is not None for v in want.values()):
            break
    return want


def _run_sample_paths(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    spec, grid, curve, mc = cfg.spec(), cfg.time_grid(), cfg.curve(), cfg.mc_config()
    for r, (sigma, informed) in enumerate(cfg.scenarios()):
        picked = _pick_paths(spec, sigma, informed, grid, mc)
        cols, header = [grid.eval_times], ["t"]
        for k, bundle in picked.items():
            if bundle is None:
                res.checks.append(Check(f"row {r}: found a path with outcome x={spec.x[k]:g}", False,
                                        f"none in {mc.paths} paths"))
                continue
            label = f"x{k + 1}"
            post = filter_path(bundle.xi, grid, spec, sigma, curve)
            post_i = informed_filter_path(bundle.xi, bundle.xi_prime, grid, spec, sigma, informed, curve)
            for p, src in ((post, "market"), (post_i, "informed")):
                path = res.output_dir / f"posterior_row{r}_{label}_{src}.csv"
                p.to_csv(path, source=src)
                res.artifacts.append(path)
            cols += [post.price, post_i.price]
            header += [f"market_{label}", f"informed_{label}"]
            recon = np.max(np.abs(bundle.xi - sigma * grid.times * bundle.outcome - bundle.beta))
            xi_hat, s_hat = effective_information_path(bundle.xi, bundle.xi_prime, sigma, informed)
            eq = np.max(np.abs(posterior_probs(xi_hat[: grid.n_eval], grid.eval_times, spec, s_hat, grid.horizon)
                               - post_i.pi))
            res.checks.append(Check(f"row {r} {label}: reconstruction and filter equivalence",
                                    recon < 1e-12 and eq < 1e-10, f"recon {recon:.1e}, equivalence {eq:.1e}"))
            P_end = post.discount[-1]
            err = max(abs(post.price[-1] / P_end - bundle.outcome), abs(post_i.price[-1] / P_end - bundle.outcome))
            res.checks.append(Check(f"row {r} {label}: valuations reach the payout at T - eps", err < 0.05,
                                    f"max |B/P - X| = {err:.2e}"))
        path = res.output_dir / f"paths_row{r}.csv"
        _write_table(path, header, np.column_stack(cols))
        res.artifacts.append(path)


# --- averaged-paths --------------------------------------------------------

def _run_averaged(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    spec, grid, curve, mc = cfg.spec(), cfg.time_grid(), cfg.curve(), cfg.mc_config()
    T, t = grid.horizon, grid.eval_times
    idx = np.array([grid.index_of(s) for s in cfg.eval_times])
    for r, (sigma, informed) in enumerate(cfg.scenarios()):
        sums = np.zeros((spec.n, 2, t.size))
        counts = np.zeros(spec.n)
        sq_diff = []
        for b in batches(spec, sigma, informed, grid, mc):
            post = filter_path(b.xi, grid, spec, sigma, curve)
            post_i = informed_filter_path(b.xi, b.xi_prime, grid, spec, sigma, informed, curve)
            for k in range(spec.n):
                sel = b.outcome_index == k
                counts[k] += sel.sum()
                sums[k, 0] += post.price[sel].sum(axis=0)
                sums[k, 1] += post_i.price[sel].sum(axis=0)
            X = b.outcome[:, None]
            sq_diff.append(np.stack([(post.mean[:, idx] - X) ** 2, (post_i.mean[:, idx] - X) ** 2]))
        sq = np.concatenate(sq_diff, axis=1)
        mse_m, mse_i = sq[0].mean(axis=0), sq[1].mean(axis=0)
        d, d_se = mean_se(sq[0] - sq[1])
        header, cols = ["t"], [t]
        for k in range(spec.n):
            if counts[k] == 0:
                continue
            header += [f"market_x{k + 1}", f"informed_x{k + 1}"]
            cols += [sums[k, 0] / counts[k], sums[k, 1] / counts[k]]
        path = res.output_dir / f"averaged_row{r}.csv"
        _write_table(path, header, np.column_stack(cols))
        res.artifacts.append(path)
        path = res.output_dir / f"mse_row{r}.csv"
        _write_table(path, ["t", "mse_market", "mse_informed", "diff", "se"],
                     np.column_stack([grid.times[idx], mse_m, mse_i, d, d_se]))
        res.artifacts.append(path)
        res.checks.append(Check(
            f"row {r} (sigma'={informed.sigma_prime}, rho={informed.rho}): informed MSE below market at every time",
            bool(np.all(mse_i < mse_m)), f"min (market - informed)/se = {np.min(d / d_se):.2f}"))


# --- delta-J-curve ---------------------------------------------------------

def _run_delta_j(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    spec, grid, mc, quad = cfg.spec(), cfg.time_grid(), cfg.mc_config(), cfg.quad()
    (sigma, informed), = cfg.scenarios()
    T = grid.horizon
    est = delta_J(cfg.eval_times, spec, sigma, informed, grid, mc)
    s_hat = derived_params(sigma, informed).sigma_hat
    rows, quad_rows = [], []
    for k, t in enumerate(est.times):
        rep = info_report(t, spec, sigma, T, quad)
        rep.E_Ht, rep.se_E_Ht = float(est.market_entropy[k]), float(est.market_se[k])
        rep.deltaJ, rep.se_deltaJ = float(est.delta[k]), float(est.se[k])
        rows.append(rep)
        J_hat = mutual_information(t, spec, s_hat, T, quad)
        quad_rows.append((t, rep.J, J_hat, J_hat - rep.J))
    path = res.output_dir / "info_deltaJ.csv"
    write_info_csv(path, rows)
    res.artifacts.append(path)
    path = res.output_dir / "deltaJ_quadrature.csv"
    _write_table(path, ["t", "J_market", "J_informed", "deltaJ"], quad_rows)
    res.artifacts.append(path)

    d, se = est.delta, est.se
    res.checks.append(Check("deltaJ >= -3 SE everywhere", bool(np.all(d >= -3 * se)),
                            f"min deltaJ/se = {np.min(d / se):.2f}"))
    interior = est.times < T - grid.eps * 1.5
    res.checks.append(Check("deltaJ > +3 SE at interior times", bool(np.all(d[interior] > 3 * se[interior])),
                            f"min interior deltaJ/se = {np.min(d[interior] / se[interior]):.2f}"))
    last = int(np.argmax(est.times))
    res.checks.append(Check("deltaJ below 0.02 at the last time", bool(d[last] < 0.02),
                            f"deltaJ(t={est.times[last]:g}) = {d[last]:.4f}"))
    mid = len(est.times) // 2
    gap = abs(d[mid] - quad_rows[mid][3])
    res.checks.append(Check(f"paired MC deltaJ matches quadrature at t={est.times[mid]:g}", bool(gap < 3 * se[mid]),
                            f"|MC - quad| = {gap:.2e}, 3 SE = {3 * se[mid]:.2e}"))


# --- pnl-backtest ----------------------------------------------------------

def _run_pnl(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    spec, grid, curve, mc = cfg.spec(), cfg.time_grid(), cfg.curve(), cfg.mc_config()
    (sigma, informed), = cfg.scenarios()
    strat = cfg.strategy.build()
    rep = pnl_backtest(spec, sigma, informed, curve, grid, strat, mc)
    path = res.output_dir / "pnl.csv"
    rep.to_csv(path)
    res.artifacts.append(path)
    rep2 = pnl_backtest(spec, sigma, informed, curve, grid, strat, MCConfig(2 * mc.paths, mc.seed, mc.chunk))
    path = res.output_dir / "pnl_doubled.csv"
    rep2.to_csv(path)
    res.artifacts.append(path)

    burn = rep.burn_in
    if burn is None:
        res.checks.append(Check("difference positive past burn-in", False, "difference never exceeds 3 SE"))
    else:
        after = rep.times >= burn
        res.checks.append(Check("difference positive past burn-in", bool(np.all(rep.diff[after] > 0)),
                                f"burn-in t = {burn:g}; min diff after = {rep.diff[after].min():.3f}"))
    res.checks.append(Check("conditional excess >= 0 on every path-time pair", rep.excess_nonnegative_fraction == 1.0,
                            f"fraction {rep.excess_nonnegative_fraction:.6f}, min {rep.excess_min:.3e}"))
    m1, s1 = rep.diff / rep.n_paths, rep.se / rep.n_paths
    m2, s2 = rep2.diff / rep2.n_paths, rep2.se / rep2.n_paths
    z = _shift_in_se(m1, m2, np.sqrt(s1**2 + s2**2))
    z2 = _shift_in_se(m1, rep.excess_mean, np.sqrt(s1**2 + rep.excess_se**2))
    res.checks.append(Check("doubling paths moves each point by < 3 combined SE", bool(np.all(z < 3)),
                            f"max shift/se = {np.max(z):.2f}"))
    res.checks.append(Check("direct and tower-property routes agree within 3 SE", bool(np.all(z2 < 3)),
                            f"max gap/se = {np.max(z2):.2f}"))


def _shift_in_se(a, b, se):
    """``|a - b| / se``; zero spread counts as agreement only when ``a == b`` exactly."""
    gap = np.abs(a - b)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = gap / se
    z = np.where(se == 0, np.where(gap == 0, 0.0, np.inf), z)
    return np.where(np.isnan(se), np.inf, z)


# --- invariant-suite -------------------------------------------------------

def invariant_checks(cfg: ExperimentConfig) -> list[Check]:
    """Cross-module property checks on the config's model (cheap, deterministic)."""
    spec, grid, curve, mc = cfg.spec(), cfg.time_grid(), cfg.curve(), cfg.mc_config()
    (sigma, informed), = cfg.scenarios()[:1]
    T = grid.horizon
    rng = np.random.default_rng(mc.seed)
    out = []

    xi = np.array([-1e6, -1e3, 0.0, 1e3, 1e6])
    pi = posterior_probs(xi, T * 0.999, spec, sigma, T)
    gap = np.max(np.abs(pi.sum(axis=-1) - 1))
    out.append(Check("posterior normalisation in far tails", bool(gap < 1e-10 and np.all(np.isfinite(pi))),
                     f"max |sum - 1| = {gap:.1e}"))

    t = rng.uniform(0, T * 0.999, 200)
    a, b = rng.normal(0, 2, 200), rng.normal(0, 2, 200)
    xi_hat, s_hat = effective_information_path(a, b, sigma, informed)
    gap = np.max(np.abs(informed_posterior(a, b, t, spec, sigma, informed, T) - posterior_probs(xi_hat, t, spec, s_hat, T)))
    out.append(Check("informed filter equals effective single-source filter", bool(gap < 1e-10), f"max gap {gap:.1e}"))

    s = rng.uniform(0.01, 2, 1000)
    sp = rng.uniform(0, 2, 1000)
    rho = rng.uniform(-0.99, 0.99, 1000)
    ok = all(derived_params(s[i], InformedParams(sp[i], rho[i])).sigma_hat >= s[i] for i in range(1000))
    out.append(Check("effective rate never below the market rate", ok, ""))
    s2 = multi_source_effective_sigma([sigma, informed.sigma_prime], [[1, informed.rho], [informed.rho, 1]])
    out.append(Check("two-source orthogonalisation matches closed form", abs(s2 - s_hat) < 1e-12,
                     f"{s2!r} vs {s_hat!r}"))

    B = rng.uniform(0, 1, 100000)
    Bt = rng.uniform(0, 1, 100000)
    P = rng.uniform(0.5, 1, 100000)
    out.append(Check("conditional excess nonnegative", bool(np.all(conditional_excess(B, Bt, P, 0.7) >= 0)), ""))

    idx = np.array([grid.n_eval // 4, grid.n_eval // 2, 3 * grid.n_eval // 4])
    tt = grid.times[idx]
    vals, ends = [], 0.0
    for bt in batches(spec, sigma, informed, grid, mc):
        vals.append(conditional_mean(posterior_probs(bt.xi[:, idx], tt, spec, sigma, T), spec))
        ends = max(ends, np.abs(bt.beta[:, [0, -1]]).max(), np.abs(bt.beta_prime[:, [0, -1]]).max())
    m, se = mean_se(np.concatenate(vals))
    z = np.abs(m - spec.mean) / se
    out.append(Check("discounted price is a martingale (3 SE)", bool(np.all(z < 3)), f"max z = {z.max():.2f}"))
    out.append(Check("bridges pinned at both ends", ends == 0.0, f"max |endpoint| = {ends:.1e}"))

    quad = cfg.quad()
    gaps = [abs(mutual_information(tq, spec, sigma, T, quad) - mutual_information_direct(tq, spec, sigma, T, quad))
            for tq in (0.1 * T, 0.5 * T, 0.9 * T)]
    out.append(Check("mutual information routes agree", max(gaps) < 1e-6, f"max gap {max(gaps):.1e}"))
    P0 = discount_factor(curve, 0.0, T)
    out.append(Check("discount factor in (0, 1]", 0 < P0 <= 1, f"P_0T = {P0:.6f}"))
    soft = normalize_log_weights(np.array([[1e308, -1e308, 0.0]]))
    out.append(Check("log-weight normalisation is overflow-free", bool(np.all(np.isfinite(soft))), ""))
    return out


def _run_invariants(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    res.checks.extend(invariant_checks(cfg))
    path = res.output_dir / "invariants.csv"
    _write_table(path, ["check", "passed", "detail"], [(c.name, str(c.passed), c.detail) for c in res.checks])
    res.artifacts.append(path)


_RUNNERS = {
    "mutual-info-curve": _run_mutual_info,
    "sample-paths": _run_sample_paths,
    "averaged-paths": _run_averaged,
    "delta-J-curve": _run_delta_j,
    "pnl-backtest": _run_pnl,
    "invariant-suite": _run_invariants,
}
