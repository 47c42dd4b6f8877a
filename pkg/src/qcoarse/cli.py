"""Experiment harness: reproducible numerical runs with CSV/JSON artifacts.

Every experiment is seeded, writes its table(s) under the output directory,
and drops a ``run_record.json`` describing the run.  Exit codes: 0 on
success, 1 for configuration problems, 2 when a numerical tolerance or a
decomposition check fails.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (DecompositionError, bipartition_algebra,
                      bipartition_from_shapes, close_algebra, verify_algebra,
                      wedderburn_decompose)
from .channel import apply_cir, lift, verify_jaynes
from .ensembles import (energy_window_ensemble, haar_sector_ensemble,
                        measure_eth_stats, pairwise_reduced_distances,
                        rotated_pair)
from .extremes import fit_suppression_curve, forecast_suppression
from .grover import (GroverPlan, bbbv_deviation, distinguish_sim,
                     grover_search_2d, grover_search_full, plan_distinguish,
                     pure_pair_at_distance)
from .qcore import (DensityMatrix, Operator, RngStream, haar_unitary,
                    trace_distance, trace_distance_variational,
                    von_neumann_entropy)

EXPERIMENTS = ("decompose", "channel-check", "page-scaling", "suppression-scan",
               "converse-check", "grover-search", "grover-distinguish", "bbbv")

_DEFAULT_DIMS = {
    "page-scaling": [(2, 4), (2, 8), (2, 16), (2, 32), (2, 64), (2, 128), (2, 256)],
    "suppression-scan": [(2, 8), (2, 16), (2, 32), (2, 64), (2, 128), (2, 256)],
    "converse-check": [(2, 8), (2, 16), (2, 32), (2, 64)],
    "channel-check": [(2, 2), (2, 4), (3, 3)],
}

_CONFIG_KEYS = ("experiment", "seed", "dims", "samples", "envelope_f",
                "energy_window", "energy_slope", "output_dir", "plots", "extras")


class ConfigError(ValueError):
    """Bad configuration: unknown keys, malformed values, missing inputs."""


class ToleranceFailure(RuntimeError):
    """A numerical check exceeded its stated tolerance."""


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 1905
    dims: list = field(default_factory=list)
    samples: int = 50
    envelope_f: float = 1.0
    energy_window: float = 0.0
    energy_slope: float = 0.0
    output_dir: str = "out"
    plots: bool = False
    extras: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose one of {', '.join(EXPERIMENTS)}")
        if self.samples < 1:
            raise ConfigError(f"samples must be positive, got {self.samples}")
        if self.envelope_f < 0:
            raise ConfigError("envelope_f must be nonnegative")
        if self.energy_window < 0:
            raise ConfigError("energy_window must be nonnegative")
        if not self.dims and self.experiment in _DEFAULT_DIMS:
            self.dims = list(_DEFAULT_DIMS[self.experiment])
        for pair in self.dims:
            if len(pair) != 2 or int(pair[0]) < 1 or int(pair[1]) < 1:
                raise ConfigError(f"bad dimension pair {pair!r}")
        self.dims = [(int(a), int(b)) for a, b in self.dims]


@dataclass
class RunRecord:
    experiment: str
    seed: int
    version: str
    config: dict
    results: list
    summary: dict
    artifacts: list = field(default_factory=list)
    wall_clock_s: float = 0.0


def _record(cfg: ExperimentConfig, rows, summary) -> RunRecord:
    return RunRecord(experiment=cfg.experiment, seed=cfg.seed,
                     version=__version__, config=_jsonable(asdict(cfg)),
                     results=_jsonable(rows), summary=_jsonable(summary))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, fieldnames, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in fieldnames])


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _complex_nested(mat: np.ndarray) -> list:
    """Complex matrix as nested [re, im] pairs (JSON has no complex type)."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat)]


def _nested_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ConfigError("matrices must be nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# ----------------------------------------------------------------- experiments


def run_page_scaling(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    rows = []
    counter = 0
    for d1, d2 in cfg.dims:
        dists = np.empty(cfg.samples)
        eye = np.eye(d1) / d1
        for rep in range(cfg.samples):
            g = RngStream(cfg.seed, counter).generator()
            counter += 1
            psi = g.standard_normal(d1 * d2) + 1j * g.standard_normal(d1 * d2)
            psi /= np.linalg.norm(psi)
            m = psi.reshape(d1, d2)
            dists[rep] = trace_distance(m @ m.conj().T, eye)
        rows.append({"d1": d1, "d2": d2, "sample_mean_D": float(dists.mean()),
                     "bound": 0.5 * np.sqrt(d1 / d2), "n_samples": cfg.samples})
    _write_csv(outdir / "page_scaling.csv",
               ["d1", "d2", "sample_mean_D", "bound", "n_samples"], rows)
    below = all(r["sample_mean_D"] <= r["bound"] for r in rows)
    summary = {"all_below_bound": below,
               "mean_to_bound_ratio": [r["sample_mean_D"] / r["bound"] for r in rows]}
    d2s = np.array([r["d2"] for r in rows], dtype=float)
    if np.unique(d2s).size >= 2:
        means = np.array([r["sample_mean_D"] for r in rows])
        slope = np.polyfit(np.log(d2s), np.log(means), 1)[0]
        summary["loglog_slope_vs_d2"] = float(slope)
    if not below:
        raise ToleranceFailure("sample mean exceeded the (d1/2)e^{-S/2} bound")
    return _record(cfg, rows, summary)


def run_suppression_scan(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    rows = []
    counter = 0
    for d1, d2 in cfg.dims:
        bp = bipartition_from_shapes([(d1, d2)])
        dim = d1 * d2
        s_val = float(np.log(dim))
        means, maxes = [], []
        var_check = np.nan
        for rep in range(cfg.samples):
            rng = RngStream(cfg.seed, counter)
            counter += 1
            if cfg.energy_window > 0:
                n_states = max(2, min(d2, 32))
                ens, _ = energy_window_ensemble(bp, 0, n_states, cfg.energy_window,
                                                cfg.energy_slope, rng)
            else:
                ens = haar_sector_ensemble(bp, 0, dim, rng)
            pd = pairwise_reduced_distances(ens)
            means.append(float(pd.mean()))
            maxes.append(float(pd.max()))
            if rep == 0:
                var_check = _variational_spot_check(ens, bp)
        fc = forecast_suppression(s_val, cfg.envelope_f, n_pairs=dim)
        rows.append({"S": s_val, "d1": d1, "d2": d2,
                     "mean_pair_D": float(np.mean(means)),
                     "max_pair_D": float(np.mean(maxes)),
                     "forecast_D": fc.predicted_D,
                     "variational_D": var_check})
    _write_csv(outdir / "suppression_scan.csv",
               ["S", "d1", "d2", "mean_pair_D", "max_pair_D", "forecast_D",
                "variational_D"], rows)
    summary = {}
    if len(rows) >= 3:
        summary["fit_mean"] = fit_suppression_curve(
            [(r["S"], r["mean_pair_D"]) for r in rows])
        summary["fit_max"] = fit_suppression_curve(
            [(r["S"], r["max_pair_D"]) for r in rows])
    return _record(cfg, rows, summary)


def _variational_spot_check(ens, bp) -> float:
    """Mean pairwise distance through the sector algebra, independent path.

    Uses the first few states only; the variational form needs a full-space
    eigen-decomposition per pair, so this stays a spot check.
    """
    alg = bipartition_algebra(bp)
    take = min(ens.n_states, 6)
    vals = []
    for i in range(take):
        rho_i = np.outer(ens.states[i].amplitudes, ens.states[i].amplitudes.conj())
        for j in range(i + 1, take):
            rho_j = np.outer(ens.states[j].amplitudes, ens.states[j].amplitudes.conj())
            vals.append(trace_distance_variational(rho_i, rho_j, alg))
    return float(np.mean(vals)) if vals else np.nan


def run_converse_check(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    n_probes = int(cfg.extras.get("probes", 4))
    rows = []
    counter = 0
    worst_a = 0.0
    for d1, d2 in cfg.dims:
        bp = bipartition_from_shapes([(d1, d2)])
        dim = d1 * d2
        s_val = float(np.log(dim))
        rng = RngStream(cfg.seed, counter)
        counter += 1
        if cfg.energy_window > 0:
            n_states = max(2, min(d2, 32))
            ens, _ = energy_window_ensemble(bp, 0, n_states, cfg.energy_window,
                                            cfg.energy_slope, rng)
        else:
            ens = haar_sector_ensemble(bp, 0, dim, rng)
        rot_d = _rotated_pair_spread(ens, bp)
        for probe in range(n_probes):
            g = RngStream(cfg.seed, counter).generator()
            counter += 1
            h = g.standard_normal((d1, d1)) + 1j * g.standard_normal((d1, d1))
            h = h + h.conj().T
            h /= np.linalg.norm(h, ord=2)
            obs = bp.sectors[0].iso @ np.kron(h, np.eye(d2)) @ bp.sectors[0].iso.conj().T
            stats = measure_eth_stats(Operator(obs, hermitian=True), ens)
            max_a = float(np.max(np.abs(stats.raw_A)))
            worst_a = max(worst_a, max_a)
            rows.append({"S": s_val, "d1": d1, "d2": d2, "probe": probe,
                         "max_abs_A": max_a,
                         "offdiag_env": stats.fitted_envelope,
                         "diag_spread_scaled": stats.diag_spread * np.exp(s_val / 2),
                         "max_rotated_pair_D": rot_d})
    _write_csv(outdir / "converse_check.csv",
               ["S", "d1", "d2", "probe", "max_abs_A", "offdiag_env",
                "diag_spread_scaled", "max_rotated_pair_D"], rows)
    summary = {"worst_max_abs_A": worst_a, "bound": 10.0,
               "window": cfg.energy_window, "slope": cfg.energy_slope}
    if cfg.energy_window == 0 and worst_a > 10.0:
        raise ToleranceFailure(f"scaled matrix element {worst_a:.3g} exceeds 10 "
                               "for a structureless ensemble")
    return _record(cfg, rows, summary)


def _rotated_pair_spread(ens, bp) -> float:
    """Largest IR distance between +/- superpositions of the same state pair."""
    s = bp.sectors[ens.sector]
    worst = 0.0
    take = min(ens.n_states, 4)
    for i in range(take):
        for j in range(i + 1, take):
            red = {}
            for sign in (1, -1):
                amp = rotated_pair(ens, i, j, sign).amplitudes
                m = (s.iso.conj().T @ amp).reshape(s.d1, s.d2)
                red[sign] = m @ m.conj().T
            worst = max(worst, trace_distance(red[1], red[-1]))
    return worst


def run_grover_search(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    n_list = [int(n) for n in cfg.extras.get("n_list", [4, 16, 64, 256, 1024])]
    rows = []
    worst = 0.0
    for n in n_list:
        bits = int(np.log2(n))
        if 2 ** bits != n:
            raise ConfigError(f"search space size {n} is not a power of two")
        for m in sorted({1, max(1, n // 4), max(1, n // 2)}):
            plan = GroverPlan.for_search(n, m)
            marked = list(range(m))
            for k in range(plan.predicted_R + 3):
                p2 = grover_search_2d(plan, k)
                pf = grover_search_full(bits, marked, k)
                diff = abs(p2 - pf)
                worst = max(worst, diff)
                rows.append({"N": n, "M": m, "theta": plan.theta,
                             "predicted_R": plan.predicted_R, "k": k,
                             "p_rotation": p2, "p_statevector": pf,
                             "abs_diff": diff})
    _write_csv(outdir / "grover_search.csv",
               ["N", "M", "theta", "predicted_R", "k", "p_rotation",
                "p_statevector", "abs_diff"], rows)
    summary = {"worst_abs_diff": worst, "tolerance": 1e-10}
    if worst > 1e-10:
        raise ToleranceFailure(f"rotation picture and statevector disagree "
                               f"by {worst:.3e} > 1e-10")
    return _record(cfg, rows, summary)


def run_grover_distinguish(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    d0_list = [float(x) for x in cfg.extras.get(
        "d0_list", [0.1, 0.05, 0.02, 0.01, 0.005, 0.001])]
    rows = []
    worst_gap = 0
    for d0 in d0_list:
        plan = plan_distinguish(d0)
        r, s = pure_pair_at_distance(d0)
        sim = distinguish_sim(r, s)
        gap = abs(sim["iters_to_success"] - int(np.ceil(plan.predicted_iters)))
        worst_gap = max(worst_gap, gap)
        rows.append({"D0": d0, "theta_rs_exact": plan.theta_rs,
                     "theta_rs_smallangle": plan.theta_rs_smallangle,
                     "predicted_iters": plan.predicted_iters,
                     "simulated_iters": sim["iters_to_success"]})
    _write_csv(outdir / "grover_distinguish.csv",
               ["D0", "theta_rs_exact", "theta_rs_smallangle",
                "predicted_iters", "simulated_iters"], rows)
    ratios = []
    for a in rows:
        for b in rows:
            if (abs(a["D0"] / b["D0"] - 10.0) < 1e-9
                    and a["simulated_iters"] > 0):
                ratios.append(b["simulated_iters"] / a["simulated_iters"])
    summary = {"worst_iter_gap": worst_gap, "tenfold_ratios": ratios}
    if worst_gap > 1:
        raise ToleranceFailure(f"simulated iteration count strays {worst_gap} "
                               "from the 1/D0 prediction (allowed: 1)")
    return _record(cfg, rows, summary)


def run_bbbv(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    n_list = [int(n) for n in cfg.extras.get("n_list", [16, 64, 256])]
    k_max = int(cfg.extras.get("k_max", 20))
    drivers = list(cfg.extras.get("drivers", ["grover", "random"]))
    rows = []
    counter = 0
    try:
        for n in n_list:
            bits = int(np.log2(n))
            if 2 ** bits != n:
                raise ConfigError(f"search space size {n} is not a power of two")
            for driver in drivers:
                trace = bbbv_deviation(bits, driver=driver, k_max=k_max,
                                       rng=RngStream(cfg.seed, counter))
                counter += 1
                for k, dk in zip(trace.k_values, trace.D_k):
                    bound = 4.0 * float(k) ** 2
                    rows.append({"N": n, "driver": driver, "k": int(k),
                                 "D_k": float(dk), "bound_4k2": bound,
                                 "ratio": float(dk) / bound if k else 0.0})
        ident = bbbv_deviation(2, driver="identity", k_max=1)
        one_query = float(ident.D_k[1])
    except ValueError as exc:
        raise ToleranceFailure(str(exc)) from exc
    _write_csv(outdir / "bbbv.csv",
               ["N", "driver", "k", "D_k", "bound_4k2", "ratio"], rows)
    summary = {"identity_one_query_deviation": one_query,
               "max_bound_ratio": max(r["ratio"] for r in rows)}
    if abs(one_query - 4.0) > 1e-9:
        raise ToleranceFailure(f"single-query deviation {one_query!r} != 4")
    return _record(cfg, rows, summary)


def run_channel_check(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    rows = []
    counter = 0
    worst = {"linearity": 0.0, "trace": 0.0, "negativity": 0.0,
             "jaynes": 0.0, "entropy": 0.0, "contraction": 0.0}
    for d1, d2 in cfg.dims:
        bp = bipartition_from_shapes([(d1, d2)])
        dim = d1 * d2
        for rep in range(cfg.samples):
            g = RngStream(cfg.seed, counter).generator()
            counter += 1
            rho = _random_density(dim, g)
            sig = _random_density(dim, g)
            a = g.uniform(0.2, 0.8)
            mix = DensityMatrix.from_matrix(a * rho.mat + (1 - a) * sig.mat)
            l_rho = lift(apply_cir(rho, bp), bp)
            l_sig = lift(apply_cir(sig, bp), bp)
            l_mix = lift(apply_cir(mix, bp), bp)
            lin = float(np.max(np.abs(l_mix.mat - a * l_rho.mat
                                      - (1 - a) * l_sig.mat)))
            cs = apply_cir(rho, bp)
            tr_err = abs(float(np.sum(cs.sector_weights)) + cs.null_weight - 1.0)
            neg = max(0.0, -float(np.linalg.eigvalsh(l_rho.mat).min()))
            jay = verify_jaynes(rho, bp)["max_abs_deviation"]
            ent_err = abs(von_neumann_entropy(l_rho) - _blockwise_entropy(cs, bp))
            contraction = (trace_distance(l_rho, l_sig)
                           - trace_distance(rho, sig))
            worst["linearity"] = max(worst["linearity"], lin)
            worst["trace"] = max(worst["trace"], tr_err)
            worst["negativity"] = max(worst["negativity"], neg)
            worst["jaynes"] = max(worst["jaynes"], jay)
            worst["entropy"] = max(worst["entropy"], ent_err)
            worst["contraction"] = max(worst["contraction"], contraction)
            rows.append({"d1": d1, "d2": d2, "rep": rep, "linearity": lin,
                         "trace_err": tr_err, "negativity": neg,
                         "jaynes_dev": jay, "entropy_err": ent_err,
                         "contraction_slack": contraction})
    _write_csv(outdir / "channel_check.csv",
               ["d1", "d2", "rep", "linearity", "trace_err", "negativity",
                "jaynes_dev", "entropy_err", "contraction_slack"], rows)
    limits = {"linearity": 1e-10, "trace": 1e-10, "negativity": 1e-10,
              "jaynes": 1e-7, "entropy": 1e-8, "contraction": 1e-9}
    summary = {"worst": worst, "limits": limits}
    for key, lim in limits.items():
        if worst[key] > lim:
            raise ToleranceFailure(f"channel {key} residual {worst[key]:.3e} "
                                   f"exceeds {lim:.1e}")
    return _record(cfg, rows, summary)


def _random_density(dim: int, g: np.random.Generator) -> DensityMatrix:
    m = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
    m = m @ m.conj().T
    return DensityMatrix.from_matrix(m / np.trace(m).real)


def _blockwise_entropy(cs, bp) -> float:
    """Entropy of the lifted state from the block data alone."""
    total = 0.0
    for w, st, s in zip(cs.sector_weights, cs.sector_states, bp.sectors):
        if st is None or w <= 0.0:
            continue
        total += -w * np.log(w) + w * (von_neumann_entropy(st) + np.log(s.d2))
    if cs.null_state is not None and cs.null_weight > 0.0:
        w = cs.null_weight
        total += -w * np.log(w) + w * von_neumann_entropy(cs.null_state)
    return total


def run_decompose(cfg: ExperimentConfig, outdir: Path) -> RunRecord:
    gen_path = cfg.extras.get("generators")
    if gen_path:
        try:
            payload = json.loads(Path(gen_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read generators file {gen_path}: {exc}")
        if not isinstance(payload, list) or not payload:
            raise ConfigError("generators file must hold a nonempty list of matrices")
        gens = [_nested_complex(m) for m in payload]
        dims = {m.shape for m in gens}
        if len(dims) != 1 or any(m.shape[0] != m.shape[1] for m in gens):
            raise ConfigError("generators must be square matrices of one size")
        algebra = close_algebra(gens)
    else:
        shapes = [tuple(int(x) for x in p) for p in cfg.extras.get("shapes", [[2, 2]])]
        null_dim = int(cfg.extras.get("null_dim", 0))
        dim = sum(a * b for a, b in shapes) + null_dim
        u = haar_unitary(dim, RngStream(cfg.seed, 0)) if cfg.extras.get("rotate", True) else None
        bp_true = bipartition_from_shapes(shapes, null_dim=null_dim, unitary=u)
        algebra = bipartition_algebra(bp_true)
    checks = verify_algebra(algebra)
    if not checks["ok"]:
        raise ConfigError(f"input does not close into an operator algebra: {checks}")
    bp = wedderburn_decompose(algebra, rng=RngStream(cfg.seed, 1))
    doc = {
        "ambient_dim": bp.ambient_dim,
        "sectors": [{"d1": s.d1, "d2": s.d2, "iso": _complex_nested(s.iso)}
                    for s in bp.sectors],
        "null_dim": bp.null_dim,
    }
    with open(outdir / "decomposition.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    summary = {"ambient_dim": bp.ambient_dim,
               "sector_dims": [list(p) for p in bp.sector_dims],
               "null_dim": bp.null_dim,
               "algebra_dim": bp.algebra_dim,
               "commutant_dim": bp.commutant_dim,
               "algebra_checks": checks}
    rows = [{"sector": i, "d1": s.d1, "d2": s.d2}
            for i, s in enumerate(bp.sectors)]
    return _record(cfg, rows, summary)


_RUNNERS = {
    "decompose": run_decompose,
    "channel-check": run_channel_check,
    "page-scaling": run_page_scaling,
    "suppression-scan": run_suppression_scan,
    "converse-check": run_converse_check,
    "grover-search": run_grover_search,
    "grover-distinguish": run_grover_distinguish,
    "bbbv": run_bbbv,
}


# ----------------------------------------------------------------------- plots


def _maybe_plot(cfg: ExperimentConfig, outdir: Path) -> list:
    if not cfg.plots:
        return []
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigError("plots requested but matplotlib is not installed; "
                          "install the 'plots' extra") from exc
    made = []
    csvs = {p.stem: p for p in outdir.glob("*.csv")}

    def _load(stem):
        with open(csvs[stem]) as fh:
            return list(csv.DictReader(fh))

    if "page_scaling" in csvs:
        data = _load("page_scaling")
        fig, ax = plt.subplots()
        d2 = [float(r["d2"]) for r in data]
        ax.loglog(d2, [float(r["sample_mean_D"]) for r in data], "o-", label="mean D")
        ax.loglog(d2, [float(r["bound"]) for r in data], "k--", label="(d1/2)e^{-S/2}")
        ax.set_xlabel("d2")
        ax.set_ylabel("trace distance to maximally mixed")
        ax.legend()
        fig.savefig(outdir / "page_scaling.png", dpi=150)
        plt.close(fig)
        made.append("page_scaling.png")
    if "suppression_scan" in csvs:
        data = _load("suppression_scan")
        fig, ax = plt.subplots()
        s = [float(r["S"]) for r in data]
        for col, style in (("mean_pair_D", "o-"), ("max_pair_D", "s-"),
                           ("forecast_D", "k--")):
            ax.semilogy(s, [float(r[col]) for r in data], style, label=col)
        ax.set_xlabel("S")
        ax.set_ylabel("pairwise distance")
        ax.legend()
        fig.savefig(outdir / "suppression_scan.png", dpi=150)
        plt.close(fig)
        made.append("suppression_scan.png")
    if "grover_distinguish" in csvs:
        data = _load("grover_distinguish")
        fig, ax = plt.subplots()
        d0 = [float(r["D0"]) for r in data]
        ax.loglog(d0, [float(r["simulated_iters"]) for r in data], "o", label="simulated")
        ax.loglog(d0, [float(r["predicted_iters"]) for r in data], "k--",
                  label="pi/(16 D0)")
        ax.set_xlabel("initial trace distance")
        ax.set_ylabel("iterations to O(1) distinguishability")
        ax.legend()
        fig.savefig(outdir / "grover_distinguish.png", dpi=150)
        plt.close(fig)
        made.append("grover_distinguish.png")
    if "bbbv" in csvs:
        data = _load("bbbv")
        fig, ax = plt.subplots()
        for key in sorted({(r["N"], r["driver"]) for r in data}):
            pts = [r for r in data if (r["N"], r["driver"]) == key]
            ks = [int(r["k"]) for r in pts]
            ax.plot(ks, [float(r["D_k"]) for r in pts], "o-",
                    label=f"N={key[0]} {key[1]}")
        ks = sorted({int(r["k"]) for r in data})
        ax.plot(ks, [4.0 * k ** 2 for k in ks], "k--", label="4k^2")
        ax.set_xlabel("queries k")
        ax.set_ylabel("cumulative deviation")
        ax.legend(fontsize=7)
        fig.savefig(outdir / "bbbv.png", dpi=150)
        plt.close(fig)
        made.append("bbbv.png")
    return made


# ------------------------------------------------------------------ entrypoint


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); config errors are exit 1
        raise ConfigError(message)


def _parse_dims(text: str) -> list:
    out = []
    for chunk in text.split(","):
        parts = chunk.strip().lower().split("x")
        if len(parts) != 2:
            raise ConfigError(f"bad dims entry {chunk!r}; expected d1xd2")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ConfigError(f"bad dims entry {chunk!r}; expected d1xd2")
    return out


def _build_parser() -> _Parser:
    parser = _Parser(prog="qcoarse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON config file; flags override its values")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--plots", action="store_true", default=None,
                        help="also write PNG figures (needs matplotlib)")
    dimmed = argparse.ArgumentParser(add_help=False)
    dimmed.add_argument("--dims", type=str, default=None,
                        help="comma-separated d1xd2 pairs, e.g. 2x8,2x16")
    windowed = argparse.ArgumentParser(add_help=False)
    windowed.add_argument("--envelope", type=float, default=None)
    windowed.add_argument("--window", type=float, default=None)
    windowed.add_argument("--slope", type=float, default=None)

    p = sub.add_parser("decompose", parents=[common],
                       help="block-decompose an operator algebra")
    p.add_argument("--generators", type=str, default=None,
                   help="JSON file with generator matrices as [re,im] pairs")
    p.add_argument("--shapes", type=str, default=None,
                   help="synthesize a rotated block algebra, e.g. 2x2,1x3")
    p.add_argument("--null-dim", type=int, default=None)
    sub.add_parser("channel-check", parents=[common, dimmed],
                   help="linearity/positivity/Jaynes checks of the channel")
    sub.add_parser("page-scaling", parents=[common, dimmed],
                   help="mean distance of reduced states to maximally mixed")
    sub.add_parser("suppression-scan", parents=[common, dimmed, windowed],
                   help="pairwise IR distances against entropy")
    sub.add_parser("converse-check", parents=[common, dimmed, windowed],
                   help="matrix-element statistics of random IR observables")
    p = sub.add_parser("grover-search", parents=[common],
                       help="rotation picture vs statevector simulation")
    p.add_argument("--n-list", type=str, default=None)
    p = sub.add_parser("grover-distinguish", parents=[common],
                       help="queries needed to tell two close states apart")
    p.add_argument("--d0-list", type=str, default=None)
    p = sub.add_parser("bbbv", parents=[common],
                       help="cumulative query deviation against the 4k^2 bound")
    p.add_argument("--n-list", type=str, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--drivers", type=str, default=None)
    return parser


def _load_config(args) -> ExperimentConfig:
    data = {"experiment": args.experiment}
    if args.config is not None:
        try:
            file_data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(file_data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_data) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if file_data.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config file is for {file_data['experiment']!r}, "
                              f"not {args.experiment!r}")
        data.update(file_data)
        data["experiment"] = args.experiment
    extras = dict(data.get("extras", {}))
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["output_dir"] = args.out
    if args.samples is not None:
        data["samples"] = args.samples
    if args.plots is not None:
        data["plots"] = args.plots
    if getattr(args, "dims", None) is not None:
        data["dims"] = _parse_dims(args.dims)
    if getattr(args, "envelope", None) is not None:
        data["envelope_f"] = args.envelope
    if getattr(args, "window", None) is not None:
        data["energy_window"] = args.window
    if getattr(args, "slope", None) is not None:
        data["energy_slope"] = args.slope
    if getattr(args, "generators", None) is not None:
        extras["generators"] = args.generators
    if getattr(args, "shapes", None) is not None:
        extras["shapes"] = [list(p) for p in _parse_dims(args.shapes)]
    if getattr(args, "null_dim", None) is not None:
        extras["null_dim"] = args.null_dim
    if getattr(args, "n_list", None) is not None:
        extras["n_list"] = [int(x) for x in args.n_list.split(",")]
    if getattr(args, "d0_list", None) is not None:
        extras["d0_list"] = [float(x) for x in args.d0_list.split(",")]
    if getattr(args, "k_max", None) is not None:
        extras["k_max"] = args.k_max
    if getattr(args, "drivers", None) is not None:
        extras["drivers"] = [d.strip() for d in args.drivers.split(",")]
    data["extras"] = extras
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc))
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"qcoarse: config error: {exc}", file=sys.stderr)
        return 1
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        record = _RUNNERS[cfg.experiment](cfg, outdir)
        plots = _maybe_plot(cfg, outdir)
    except ConfigError as exc:
        print(f"qcoarse: config error: {exc}", file=sys.stderr)
        return 1
    except (ToleranceFailure, DecompositionError) as exc:
        print(f"qcoarse: FAILED: {exc}", file=sys.stderr)
        return 2
    record.wall_clock_s = time.perf_counter() - start
    record.artifacts = sorted(p.name for p in outdir.iterdir() if p.is_file())
    with open(outdir / "run_record.json", "w") as fh:
        json.dump(asdict(record), fh, indent=2, sort_keys=True)
    print(f"{cfg.experiment}: ok ({record.wall_clock_s:.2f}s)")
    for key, val in record.summary.items():
        print(f"  {key}: {val}")
    if plots:
        print(f"  figures: {', '.join(plots)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
