"""Config-driven experiment runners and their on-disk artifacts.

Every runner is deterministic given the resolved config (which embeds the
master seed): per-run seeds derive from SeedSequence tuples, reductions are
fixed-order, and worker threads only parallelize independent ensemble
members collected by index.  CSV floats are written as shortest
round-trip decimals.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .adadelta import run_sgd
from .config import ConfigError, build_field, build_psd, opt_params
from .contdrive import (
    ContinuousProtocol,
    cd_loss_and_gradient,
    cd_sensitivity,
)
from .fields import MultiToneField
from .glass import ProtocolTrajectory, ensemble_delta, fit_growth
from .noise import build_pool, draw_minibatch, synthesis_grid
from .pipulse import (
    PiPulseProtocol,
    cp_protocol,
    pi_sensitivity,
    pi_sensitivity_gradient,
    project_pulse_times,
)
from .pumpprobe import (
    PumpProbeConfig,
    cp_probe,
    default_pump_schedule,
    front_loaded_probe,
    optimize_pump,
    pump_sensitivity,
    reference_cp_inverse_sensitivity,
)

# Adadelta epsilon defaults, matched to the parameter scale: sqrt(eps) sets
# the first step size (seconds for timing-valued protocols, radians for
# phase-valued ones).
EPSILON_TIME = 1e-16
EPSILON_ANGLE = 1e-6

_POOL_TAG = 90001
_FAMILY_TAG = {"pi_pulses": 11, "continuous": 22, "pump": 33}


def derive_seed(master: int, *tags: int) -> int:
    return int(np.random.SeedSequence((int(master),) + tuple(int(t) for t in tags)).generate_state(1)[0])


def _fmt(x) -> str:
    return repr(float(x))


def thread_count(explicit=None) -> int:
    if explicit:
        return max(1, int(explicit))
    env = os.environ.get("SENSEOPT_THREADS")
    return max(1, int(env)) if env else 1


def _run_indexed(worker, count: int, threads: int):
    """Run ``worker(i)`` for i in range(count); results ordered by index."""
    if threads <= 1 or count <= 1:
        return [worker(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(count)))


# ---------------------------------------------------------------------------
# single-run optimizations
# ---------------------------------------------------------------------------


def run_pi_optimization(
    field: MultiToneField,
    psd,
    n_pulses: int,
    sensing_time: float,
    iterations: int,
    *,
    momentum: float = 0.95,
    epsilon: float = EPSILON_TIME,
    seed: int = 0,
    init_jitter: float = 0.0,
    record_stride: int = 1,
):
    """Adadelta on pulse timings from the evenly spaced start.

    Returns a dict with the RunRecord ('record'), initial/final protocols,
    and initial/best inverse sensitivities.
    """
    theta0 = cp_protocol(n_pulses, sensing_time).pulse_times.copy()
    if init_jitter > 0.0:
        jit = np.random.default_rng(seed).uniform(-init_jitter, init_jitter, theta0.size)
        theta0, _ = project_pulse_times(theta0 + jit, sensing_time)

    def loss_and_grad(theta, rng):
        prot = PiPulseProtocol(theta, sensing_time)
        return pi_sensitivity(prot, field, psd), pi_sensitivity_gradient(prot, field, psd)

    record, theta = run_sgd(
        loss_and_grad,
        theta0,
        iterations,
        momentum=momentum,
        epsilon=epsilon,
        project=lambda th: project_pulse_times(th, sensing_time),
        to_sigma=lambda th: np.diff(th, prepend=0.0),
        seed=seed,
        record_stride=record_stride,
    )
    losses = np.asarray(record.losses)
    return {
        "record": record,
        "initial_protocol": PiPulseProtocol(theta0, sensing_time),
        "final_protocol": PiPulseProtocol(theta, sensing_time),
        "eta_init": float(losses[0]),
        "eta_best": float(losses.min()),
        "improvement": float(losses[0] / losses.min()),
    }


def run_continuous_optimization(
    field: MultiToneField,
    psd,
    sensing_time: float,
    iterations: int,
    *,
    dt: float = 50e-9,
    pool_size: int = 20000,
    minibatch: int = 100,
    init_range: float = np.pi / 10.0,
    momentum: float = 0.95,
    epsilon: float = EPSILON_ANGLE,
    seed: int = 0,
    pool_seed=None,
    record_stride: int = 1,
    pool=None,
    checkpoint_stride: int = 250,
):
    """Adadelta on interleaved per-step angles with pool-minibatch gradients.

    Every ``checkpoint_stride`` iterations the current protocol is scored on
    the full pool; the best checkpoint is reported alongside the final
    iterate (minibatch losses fluctuate, and long Adadelta runs can wander
    off a good protocol once step sizes have grown).
    """
    n_steps = int(round(sensing_time / dt))
    if abs(n_steps * dt - sensing_time) > 1e-9 * sensing_time:
        raise ValueError("sensing_time must be a multiple of dt")
    if pool is None:
        pool_seed = derive_seed(seed, _POOL_TAG) if pool_seed is None else pool_seed
        pool = build_pool(psd, sensing_time, dt, pool_size, pool_seed, minibatch)
    b = field.amplitude_ut

    theta0 = np.random.default_rng(seed).uniform(-init_range, init_range, 2 * n_steps)
    counter = {"n": 0}
    best = {"eta": np.inf, "theta": theta0.copy(), "iteration": 0}

    def loss_and_grad(theta, rng):
        prot = ContinuousProtocol(theta[0::2], theta[1::2], dt)
        idx = draw_minibatch(pool, rng)
        eta, gx, gy = cd_loss_and_gradient(prot, b, field, pool.traces[idx, :n_steps])
        grad = np.empty_like(theta)
        grad[0::2] = gx
        grad[1::2] = gy
        n = counter["n"]
        counter["n"] += 1
        if checkpoint_stride and n % checkpoint_stride == 0 and n > 0:
            eta_full = cd_sensitivity(prot, b, field, pool)
            if eta_full < best["eta"]:
                best.update(eta=eta_full, theta=theta.copy(), iteration=n)
        return float(eta), grad, {"minibatch_indices": idx}

    def project(theta):
        return np.clip(theta, -np.pi, np.pi), None

    record, theta = run_sgd(
        loss_and_grad,
        theta0,
        iterations,
        momentum=momentum,
        epsilon=epsilon,
        project=project,
        seed=seed,
        record_stride=record_stride,
    )
    init_prot = ContinuousProtocol(theta0[0::2], theta0[1::2], dt)
    final_prot = ContinuousProtocol(theta[0::2], theta[1::2], dt)
    eta_init = cd_sensitivity(init_prot, b, field, pool)
    eta_final = cd_sensitivity(final_prot, b, field, pool)
    if eta_final < best["eta"]:
        best.update(eta=eta_final, theta=theta.copy(), iteration=len(record.losses) - 1)
    best_prot = ContinuousProtocol(best["theta"][0::2], best["theta"][1::2], dt)
    return {
        "record": record,
        "pool": pool,
        "initial_protocol": init_prot,
        "final_protocol": final_prot,
        "best_protocol": best_prot,
        "eta_init_fullpool": float(eta_init),
        "eta_final_fullpool": float(eta_final),
        "eta_best_fullpool": float(best["eta"]),
        "best_iteration": int(best["iteration"]),
        "eta_best_minibatch": float(np.min(record.losses)),
    }


def run_pump_optimization(
    psd,
    iterations: int,
    *,
    total_time: float,
    t0: float,
    pump_tau: float,
    probe_mode: str = "front_loaded",
    probe_tau: float = None,
    b_max_mg: float = 0.5016,
    tau_rise: float = 1.3e-6,
    momentum: float = 0.95,
    epsilon: float = EPSILON_TIME,
    seed: int = 0,
    init_jitter: float = 0.0,
    record_stride: int = 1,
):
    """Pump-only Adadelta run plus the evenly spaced reference point."""
    probe_tau = pump_tau if probe_tau is None else probe_tau
    if probe_mode == "front_loaded":
        probe = front_loaded_probe(total_time, t0)
    elif probe_mode == "cp":
        probe = cp_probe(total_time, t0, probe_tau)
    else:
        raise ConfigError(f"probe.mode must be front_loaded or cp, got {probe_mode!r}")
    config = PumpProbeConfig(
        pump=default_pump_schedule(total_time, pump_tau),
        probe=probe,
        t0=t0,
        total_time=total_time,
        b_max_mg=b_max_mg,
        tau_rise=tau_rise,
    )
    record, final_cfg = optimize_pump(
        config,
        psd,
        iterations,
        momentum=momentum,
        epsilon=epsilon,
        seed=seed,
        init_jitter=init_jitter,
        record_stride=record_stride,
    )
    losses = np.asarray(record.losses)
    reference = reference_cp_inverse_sensitivity(config, psd)
    return {
        "record": record,
        "initial_config": config,
        "final_config": final_cfg,
        "eta_init": float(losses[0]),
        "eta_best": float(losses.min()),
        "eta_inverse_reference_cp": float(reference),
        "improvement_vs_reference": float((1.0 / losses.min()) / reference),
        "improvement_vs_init": float(losses[0] / losses.min()),
    }


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------


def write_manifest(out_dir: Path, resolved_cfg: dict, seed: int, threads: int):
    manifest = {
        "resolved_config": resolved_cfg,
        "seed": int(seed),
        "threads": int(threads),
        "versions": {
            "senseopt": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def write_trajectory_csv(path: Path, record, param_header, sigma_to_params):
    """iteration, eta_inverse, then the protocol parameters of that iterate.

    Rows shrink if the feasibility projection annihilated parameters;
    missing trailing columns are left empty.
    """
    lines = [",".join(["iteration", "eta_inverse"] + list(param_header))]
    width = len(param_header)
    for i, (loss, sigma) in enumerate(zip(record.losses, record.snapshots)):
        params = list(sigma_to_params(np.asarray(sigma)))
        row = [str(i * record.record_stride), _fmt(1.0 / loss)]
        row += [_fmt(v) for v in params] + [""] * (width - len(params))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_snapshots_npz(path: Path, record, kind: str):
    dims = np.array([len(s) for s in record.snapshots], dtype=int)
    width = int(dims.max()) if dims.size else 0
    sigma = np.full((len(record.snapshots), width), np.nan)
    for i, s in enumerate(record.snapshots):
        sigma[i, : len(s)] = s
    np.savez(
        path,
        sigma=sigma,
        dims=dims,
        losses=np.asarray(record.losses),
        kind=np.array(kind),
        seed=np.array(record.seed),
        record_stride=np.array(record.record_stride),
    )


def load_trajectory_npz(path) -> ProtocolTrajectory:
    """Rebuild a trajectory from a snapshots file, truncating at the first
    dimension change (the autocorrelation needs fixed N)."""
    with np.load(path, allow_pickle=False) as data:
        sigma = data["sigma"]
        dims = data["dims"]
        kind = str(data["kind"])
    keep = int(np.argmax(dims != dims[0])) if np.any(dims != dims[0]) else dims.size
    return ProtocolTrajectory(sigma[:keep, : dims[0]], kind)


def write_delta_csv(path: Path, lags, mean, stderr):
    lines = ["n,delta_mean,delta_stderr"]
    for n, m, s in zip(lags, mean, stderr):
        lines.append(f"{int(n)},{_fmt(m)},{_fmt(s)}")
    path.write_text("\n".join(lines) + "\n")


def write_fit_json(path: Path, fit: dict):
    flat = {
        "alpha": fit["power_law"]["exponent"],
        "prefactor": fit["power_law"]["prefactor"],
        "log_slope": fit["logarithmic"]["slope"],
        "log_intercept": fit["logarithmic"]["intercept"],
        "r2_power": fit["power_law"]["r2"],
        "r2_log": fit["logarithmic"]["r2"],
        "preferred": fit["preferred"],
        "n_points": fit["n_points"],
        "plateau_cut": fit["plateau_cut"],
        "excluded_nonpositive": fit["excluded_nonpositive"],
    }
    path.write_text(json.dumps(flat, indent=2, sort_keys=True) + "\n")
    return flat


# ---------------------------------------------------------------------------
# config-driven experiment entry points
# ---------------------------------------------------------------------------


def _protocol_section(cfg: dict) -> dict:
    return cfg.get("protocol", {})


def run_optimize_pi(cfg: dict, out_dir: Path, seed: int, threads: int = 1):
    field = build_field(cfg)
    psd = build_psd(cfg)
    prot = _protocol_section(cfg)
    if prot.get("type", "pi_pulses") != "pi_pulses":
        raise ConfigError("optimize_pi needs protocol.type = 'pi_pulses'")
    opts = opt_params(cfg, EPSILON_TIME)
    result = run_pi_optimization(
        field,
        psd,
        n_pulses=int(prot.get("n_pulses", 50)),
        sensing_time=1e-6 * float(prot.get("sensing_time_us", 50.0)),
        iterations=opts["iterations"],
        momentum=opts["momentum"],
        epsilon=opts["epsilon"],
        seed=seed,
        init_jitter=1e-9 * float(prot.get("init_jitter_ns", 0.0)),
        record_stride=opts["record_stride"],
    )
    n0 = result["initial_protocol"].n_pulses
    write_trajectory_csv(
        out_dir / "trajectory.csv",
        result["record"],
        [f"t_{j + 1}" for j in range(n0)],
        np.cumsum,
    )
    write_snapshots_npz(out_dir / "snapshots.npz", result["record"], "pi_gaps")
    summary = {
        "eta_init": result["eta_init"],
        "eta_best": result["eta_best"],
        "eta_inverse_init": 1.0 / result["eta_init"],
        "eta_inverse_best": 1.0 / result["eta_best"],
        "improvement": result["improvement"],
        "final_n_pulses": result["final_protocol"].n_pulses,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_optimize_continuous(cfg: dict, out_dir: Path, seed: int, threads: int = 1):
    field = build_field(cfg)
    psd = build_psd(cfg)
    prot = _protocol_section(cfg)
    if prot.get("type", "continuous") != "continuous":
        raise ConfigError("optimize_continuous needs protocol.type = 'continuous'")
    opts = opt_params(cfg, EPSILON_ANGLE)
    result = run_continuous_optimization(
        field,
        psd,
        sensing_time=1e-6 * float(prot.get("sensing_time_us", 50.0)),
        iterations=opts["iterations"],
        dt=1e-9 * float(prot.get("dt_ns", 50)),
        pool_size=int(prot.get("pool_size", 20000)),
        minibatch=int(prot.get("minibatch", 100)),
        init_range=float(prot.get("init_range_rad", np.pi / 10.0)),
        momentum=opts["momentum"],
        epsilon=opts["epsilon"],
        seed=seed,
        record_stride=opts["record_stride"],
    )
    n = result["final_protocol"].n_steps
    header = []
    for k in range(n):
        header += [f"phi_x_{k}", f"phi_y_{k}"]
    write_trajectory_csv(out_dir / "trajectory.csv", result["record"], header, lambda s: s)
    write_snapshots_npz(out_dir / "snapshots.npz", result["record"], "continuous_phases")
    summary = {
        "eta_init_fullpool": result["eta_init_fullpool"],
        "eta_final_fullpool": result["eta_final_fullpool"],
        "eta_best_fullpool": result["eta_best_fullpool"],
        "best_iteration": result["best_iteration"],
        "eta_inverse_init": 1.0 / result["eta_init_fullpool"],
        "eta_inverse_final": 1.0 / result["eta_final_fullpool"],
        "eta_inverse_best": 1.0 / result["eta_best_fullpool"],
        "eta_best_minibatch": result["eta_best_minibatch"],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _pump_kw(cfg: dict, seed: int):
    pump = cfg.get("pump", {})
    probe = cfg.get("probe", {})
    opts = opt_params(cfg, EPSILON_TIME)
    return dict(
        iterations=opts["iterations"],
        total_time=1e-6 * float(cfg.get("sensing_time_us", 121.6)),
        t0=1e-6 * float(cfg.get("t0_us", 0.897)),
        pump_tau=1e-6 * float(pump.get("tau_us", 7.6)),
        probe_mode=probe.get("mode", "front_loaded"),
        probe_tau=1e-6 * float(probe.get("tau_us", pump.get("tau_us", 7.6))),
        b_max_mg=float(cfg.get("bmax_mg", 0.5016)),
        tau_rise=1e-6 * float(cfg.get("tau_rise_us", 1.3)),
        momentum=opts["momentum"],
        epsilon=opts["epsilon"],
        seed=seed,
        init_jitter=1e-9 * float(pump.get("init_jitter_ns", 0.0)),
        record_stride=opts["record_stride"],
    )


def run_optimize_pump(cfg: dict, out_dir: Path, seed: int, threads: int = 1):
    psd = build_psd(cfg)
    result = run_pump_optimization(psd, **_pump_kw(cfg, seed))
    n0 = result["initial_config"].pump.n_switches
    write_trajectory_csv(
        out_dir / "trajectory.csv",
        result["record"],
        [f"tau_{j + 1}" for j in range(n0)],
        lambda s: s,
    )
    write_snapshots_npz(out_dir / "snapshots.npz", result["record"], "pump_timings")
    summary = {k: v for k, v in result.items() if isinstance(v, (int, float))}
    summary["eta_inverse_best"] = 1.0 / result["eta_best"]
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _glass_generate(cfg: dict, out_dir: Path, seed: int, threads: int):
    """Run the configured ensembles and return {family: [trajectory, ...]}."""
    glass_cfg = cfg.get("glass", {})
    families = glass_cfg.get("families", ["pi_pulses", "continuous"])
    runs = int(glass_cfg.get("runs", 10))
    prot = _protocol_section(cfg)
    rec_dir = out_dir / "records"
    rec_dir.mkdir(exist_ok=True)
    trajectories = {}
    for family in families:
        iters = int(
            glass_cfg.get(
                "iterations_pi" if family == "pi_pulses" else "iterations_continuous",
                cfg.get("opt", {}).get("iterations", 400),
            )
        )
        tag = _FAMILY_TAG["pi_pulses" if family == "pi_pulses" else "continuous"]

        if family == "pi_pulses":
            field = build_field(cfg)
            psd = build_psd(cfg)
            opts = opt_params(cfg, EPSILON_TIME)

            def worker(r, _f=field, _p=psd, _o=opts, _iters=iters, _tag=tag):
                res = run_pi_optimization(
                    _f,
                    _p,
                    n_pulses=int(prot.get("n_pulses", 50)),
                    sensing_time=1e-6 * float(prot.get("sensing_time_us", 50.0)),
                    iterations=_iters,
                    momentum=_o["momentum"],
                    epsilon=_o["epsilon"],
                    seed=derive_seed(seed, _tag, r),
                    init_jitter=1e-9 * float(prot.get("init_jitter_ns", 0.0)),
                )
                return res["record"], "pi_gaps"

        elif family == "continuous":
            field = build_field(cfg)
            psd = build_psd(cfg)
            opts = opt_params(cfg, EPSILON_ANGLE)
            sensing = 1e-6 * float(prot.get("sensing_time_us", 50.0))
            dt = 1e-9 * float(prot.get("dt_ns", 50))
            pool = build_pool(
                psd,
                sensing,
                dt,
                int(prot.get("pool_size", 20000)),
                derive_seed(seed, _POOL_TAG),
                int(prot.get("minibatch", 100)),
            )

            def worker(r, _f=field, _p=psd, _o=opts, _iters=iters, _tag=tag, _pool=pool,
                       _sensing=sensing, _dt=dt):
                res = run_continuous_optimization(
                    _f,
                    _p,
                    sensing_time=_sensing,
                    iterations=_iters,
                    dt=_dt,
                    init_range=float(prot.get("init_range_rad", np.pi / 10.0)),
                    momentum=_o["momentum"],
                    epsilon=_o["epsilon"],
                    seed=derive_seed(seed, _tag, r),
                    pool=_pool,
                )
                return res["record"], "continuous_phases"

        elif family == "pump":
            psd = build_psd(cfg)

            def worker(r, _p=psd, _iters=iters, _tag=tag):
                kw = _pump_kw(cfg, derive_seed(seed, _tag, r))
                kw["iterations"] = _iters
                res = run_pump_optimization(_p, **kw)
                return res["record"], "pump_timings"

        else:
            raise ConfigError(f"unknown glass family {family!r}")

        results = _run_indexed(worker, runs, threads)
        trajs = []
        for r, (record, kind) in enumerate(results):
            write_snapshots_npz(rec_dir / f"{family}_{r:02d}.npz", record, kind)
            trajs.append(ProtocolTrajectory.from_record(record, kind))
        trajectories[family] = trajs
    return trajectories


def run_glass_analyze(cfg: dict, out_dir: Path, seed: int, threads: int = 1):
    glass_cfg = cfg.get("glass", {})
    n_w = int(glass_cfg.get("n_w", 5))
    if "records" in glass_cfg:
        trajectories = {"records": []}
        for pattern in glass_cfg["records"]:
            hits = sorted(Path().glob(pattern)) if not Path(pattern).is_file() else [Path(pattern)]
            if not hits:
                raise ConfigError(f"glass.records pattern {pattern!r} matched no files")
            trajectories["records"] += [load_trajectory_npz(p) for p in hits]
    else:
        trajectories = _glass_generate(cfg, out_dir, seed, threads)
    report = {}
    for family, trajs in trajectories.items():
        lags, mean, stderr = ensemble_delta(trajs, n_w)
        write_delta_csv(out_dir / f"delta_{family}.csv", lags, mean, stderr)
        fit = fit_growth(lags, mean)
        report[family] = write_fit_json(out_dir / f"fit_{family}.json", fit)
    return report


def run_noise_check(cfg: dict, out_dir: Path, seed: int, threads: int = 1):
    psd = build_psd(cfg)
    sec = cfg.get("noise_check", {})
    n_omega = int(sec.get("n_omega", 2001))
    n_traces = int(sec.get("traces", 2000))
    sensing = 1e-6 * float(sec.get("sensing_time_us", 50.0))
    dt = 1e-9 * float(sec.get("dt_ns", 50))
    omegas = np.linspace(0.0, psd.band_limit(dt), n_omega)
    lines = ["omega,s_value"]
    for w, s in zip(omegas, psd.evaluate(omegas)):
        lines.append(f"{_fmt(w)},{_fmt(s)}")
    (out_dir / "psd.csv").write_text("\n".join(lines) + "\n")

    pool = build_pool(psd, sensing, dt, n_traces, derive_seed(seed, _POOL_TAG), min(100, n_traces))
    grid, domega = synthesis_grid(psd, sensing, dt)
    target = float(np.sum(psd.evaluate(grid)) * domega / np.pi)
    per_trace = np.mean(pool.traces**2, axis=1)
    empirical = float(per_trace.mean())
    stderr = float(per_trace.std(ddof=1) / np.sqrt(pool.size))
    report = {
        "target_variance": target,
        "empirical_variance": empirical,
        "stderr": stderr,
        "z_score": (empirical - target) / stderr if stderr else np.nan,
        "traces": pool.size,
    }
    (out_dir / "noise_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


RUNNERS = {
    "optimize_pi": run_optimize_pi,
    "optimize_continuous": run_optimize_continuous,
    "optimize_pump": run_optimize_pump,
    "glass_analyze": run_glass_analyze,
    "noise_check": run_noise_check,
}


def run_experiment(cfg: dict, out_dir, seed=None, threads=None) -> dict:
    """Dispatch a validated config; writes manifest plus artifacts to out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    master = int(seed) if seed is not None else int(cfg.get("opt", {}).get("seed", 0))
    nthreads = thread_count(threads)
    resolved = dict(cfg)
    resolved.setdefault("opt", {})
    resolved["opt"] = dict(resolved["opt"])
    resolved["opt"]["seed"] = master
    write_manifest(out_dir, resolved, master, nthreads)
    return RUNNERS[cfg["experiment"]](cfg, out_dir, master, nthreads)
