"""Experiment harness: reproducible CSV/SVG sweeps over the shipped protocols.

Every experiment is driven by an ExperimentConfig and writes its outputs
under the configured directory. Float cells use shortest round-trip
formatting, rows end with a bare newline, and all randomness is seeded, so
rerunning a configuration reproduces files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .channels import amplitude_damping, apply_channel, choi_state
from .protocols import (bell_state, channel_output, channel_sim_trained,
                        dejmps, discrimination_success, distill_stats,
                        distillation_ansatz, generalized_dejmps_4copy_oracle,
                        isotropic, learned_isotropic_4copy, learned_s_state,
                        qsd_ansatz, qsd_pair, qsd_protocol, s_state,
                        stack_copies, standard_teleportation)
from .qmath import DensityState, PureState, state_fidelity
from .trainer import (Discrimination, DistillInfidelity, OptimizerConfig,
                      export_trace_csv, train)

EXPERIMENTS = ("s-distill", "iso-distill", "qsd", "channel-sim", "train")
TRAIN_TASKS = ("s-distill", "iso-distill", "qsd", "channel-sim")
FORMATS = ("csv", "csv+svg")

_DEFAULT_GRIDS = {
    "s-distill": (0.05, 0.95, 19),
    "iso-distill": (0.05, 0.95, 19),
    "qsd": (0.0, 1.0, 21),
}


class ConfigError(ValueError):
    """An experiment configuration is invalid."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: tuple[float, float, int] | None = None
    gamma: float | None = None
    p: float | None = None
    samples: int = 1000
    seed: int = 0
    restarts: int = 8
    out_dir: str = "out"
    fmt: str = "csv+svg"
    task: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.grid is not None:
            start, stop, points = self.grid
            if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
                raise ConfigError(f"grid bounds {start}:{stop} outside [0, 1]")
            if start >= stop:
                raise ConfigError("grid start must be below stop")
            if int(points) < 2:
                raise ConfigError("grid needs at least 2 points")
            object.__setattr__(self, "grid",
                               (float(start), float(stop), int(points)))
        for name in ("gamma", "p"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= float(v) <= 1.0:
                raise ConfigError(f"{name} {v} outside [0, 1]")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.restarts < 1:
            raise ConfigError("restarts must be positive")
        if self.experiment == "train":
            if self.task not in TRAIN_TASKS:
                raise ConfigError(f"train needs --task from {TRAIN_TASKS}")


def parse_grid(text: str) -> tuple[float, float, int]:
    """Parse a start:stop:points grid specification."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} is not start:stop:points")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"grid {text!r} is not numeric")


def _grid_values(cfg: ExperimentConfig) -> np.ndarray:
    grid = cfg.grid or _DEFAULT_GRIDS.get(cfg.experiment)
    if grid is None:
        raise ConfigError(f"{cfg.experiment} needs --grid or --gamma")
    start, stop, points = grid
    return np.linspace(start, stop, points)


def _worker_count(num_items: int) -> int:
    env = os.environ.get("LOCC_LAB_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"LOCC_LAB_THREADS={env!r} is not an integer")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, num_items))


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Map preserving order; thread count is capped by LOCC_LAB_THREADS."""
    items = list(items)
    workers = _worker_count(len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def random_pure_state(rng: np.random.Generator) -> PureState:
    """Haar-random qubit state from a pair of standard complex Gaussians."""
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return PureState(z / np.linalg.norm(z))


# --- output writers ----------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def write_line_svg(path: Path, title: str, xlabel: str,
                   series: Sequence[tuple[str, Sequence[float], Sequence[float]]]) -> None:
    """Minimal standalone SVG line plot; one polyline per named series."""
    width, height = 640, 420
    left, right, top, bottom = 70, 20, 40, 50
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
             f'font-family="sans-serif" font-size="14">{title}</text>']
    axis = (f'M {left} {top} L {left} {height - bottom} '
            f'L {width - right} {height - bottom}')
    parts.append(f'<path d="{axis}" stroke="black" fill="none"/>')
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        yv = y0 + i * (y1 - y0) / 4
        parts.append(f'<line x1="{px(xv):.1f}" y1="{height - bottom}" '
                     f'x2="{px(xv):.1f}" y2="{height - bottom + 4}" stroke="black"/>')
        parts.append(f'<text x="{px(xv):.1f}" y="{height - bottom + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{xv:.2f}</text>')
        parts.append(f'<line x1="{left - 4}" y1="{py(yv):.1f}" x2="{left}" '
                     f'y2="{py(yv):.1f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{py(yv) + 4:.1f}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{yv:.4g}</text>')
    parts.append(f'<text x="{(left + width - right) / 2:.1f}" '
                 f'y="{height - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">{xlabel}</text>')
    for k, (label, xs, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = top + 16 * k
        parts.append(f'<line x1="{width - right - 150}" y1="{ly}" '
                     f'x2="{width - right - 130}" y2="{ly}" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{width - right - 124}" y="{ly + 4}" '
                     f'font-family="sans-serif" font-size="11">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def _emit(cfg: ExperimentConfig, name: str, header: Sequence[str],
          rows: Sequence[Sequence], plot_skip: Sequence[str] = ()) -> list[Path]:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    write_csv(csv_path, header, rows)
    written = [csv_path]
    if cfg.fmt == "csv+svg":
        xs = [row[0] for row in rows]
        series = []
        for col in range(1, len(header)):
            if header[col] in plot_skip:
                continue
            series.append((header[col], xs, [row[col] for row in rows]))
        svg_path = out_dir / f"{name}.svg"
        write_line_svg(svg_path, name, header[0], series)
        written.append(svg_path)
    return written


# --- experiments --------------------------------------------------------------

def _s_distill_row(p: float) -> tuple:
    pairs = stack_copies(s_state(p), 2)
    learned = distill_stats(learned_s_state(p), pairs)
    standard = distill_stats(dejmps(), pairs)
    return (p, learned.fidelity, learned.p_succ,
            standard.fidelity, standard.p_succ)


def _iso_distill_row(p: float) -> tuple:
    stats = distill_stats(learned_isotropic_4copy(), stack_copies(isotropic(p), 4))
    fid_ref, psucc_ref = generalized_dejmps_4copy_oracle(p)
    return (p, stats.fidelity, stats.p_succ, fid_ref, psucc_ref)


def _qsd_row(gamma: float) -> tuple:
    phi0, phi1 = qsd_pair(gamma)
    tuned = discrimination_success(qsd_protocol(gamma), phi0, phi1)
    untuned = discrimination_success(qsd_protocol(0.0), phi0, phi1)
    return (gamma, tuned, untuned)


def channel_sim_fidelities(named, gamma: float, samples: int,
                           seed: int) -> np.ndarray:
    """Fidelities of the simulated channel against the target on Haar states."""
    channel = amplitude_damping(gamma)
    resource = choi_state(channel)
    rng = np.random.default_rng(seed)
    fids = np.empty(samples)
    for i in range(samples):
        psi = random_pure_state(rng).to_density()
        target = apply_channel(channel, psi, (0,))
        fids[i] = state_fidelity(target, channel_output(named, resource, psi))
    return fids


def _channel_sim_row(gamma: float, cfg: ExperimentConfig) -> tuple:
    trained, _ = channel_sim_trained(
        gamma, OptimizerConfig(seed=cfg.seed, restarts=cfg.restarts))
    fid_trained = channel_sim_fidelities(trained, gamma, cfg.samples, cfg.seed)
    fid_teleport = channel_sim_fidelities(standard_teleportation(), gamma,
                                          cfg.samples, cfg.seed)
    return (gamma, float(fid_trained.mean()), float(fid_teleport.mean()),
            float(fid_trained.std()), float(fid_teleport.std()))


def _train_setup(cfg: ExperimentConfig):
    if cfg.task in ("s-distill", "iso-distill"):
        if cfg.p is None:
            raise ConfigError(f"train --task {cfg.task} needs --p")
        copies = 2 if cfg.task == "s-distill" else 4
        source = s_state(cfg.p) if cfg.task == "s-distill" else isotropic(cfg.p)
        protocol = distillation_ansatz(copies)
        spec = DistillInfidelity(bell_state("phi_plus"), protocol.success)
        return spec, protocol, stack_copies(source, copies), {"p": cfg.p}
    if cfg.gamma is None:
        raise ConfigError("train --task qsd needs --gamma")
    phi0, phi1 = qsd_pair(cfg.gamma)
    return Discrimination(phi0, phi1), qsd_ansatz(), None, {"gamma": cfg.gamma}


def _run_train(cfg: ExperimentConfig) -> list[Path]:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    opt = OptimizerConfig(seed=cfg.seed, restarts=cfg.restarts)
    if cfg.task == "channel-sim":
        if cfg.gamma is None:
            raise ConfigError("train --task channel-sim needs --gamma")
        _, trace = channel_sim_trained(cfg.gamma, opt)
        inputs = {"gamma": cfg.gamma}
        metric = {"mean_training_fidelity": -trace.best_loss / 4.0}
    else:
        spec, protocol, input_state, inputs = _train_setup(cfg)
        trace = train(spec, protocol, input_state, opt)
        if cfg.task == "qsd":
            metric = {"success_probability": 1.0 - trace.best_loss / 2.0}
        else:
            metric = {"fidelity": 1.0 - trace.best_loss}
    trace_path = out_dir / f"train_{cfg.task}_trace.csv"
    export_trace_csv(trace, trace_path)
    result = {"task": cfg.task, "inputs": inputs,
              "best_loss": trace.best_loss,
              "best_restart": trace.best_restart,
              "diverged_restarts": list(trace.diverged_restarts),
              "params": [float(v) for v in trace.best_params], **metric}
    result_path = out_dir / f"train_{cfg.task}_result.json"
    with open(result_path, "w", newline="") as fh:
        json.dump(result, fh, indent=1)
        fh.write("\n")
    return [trace_path, result_path]


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """Run one configured experiment; returns the written file paths."""
    if cfg.experiment == "s-distill":
        rows = parallel_map(_s_distill_row, _grid_values(cfg))
        return _emit(cfg, "s-distill",
                     ("p", "fidelity_learned", "p_succ_learned",
                      "fidelity_dejmps", "p_succ_dejmps"), rows)
    if cfg.experiment == "iso-distill":
        rows = parallel_map(_iso_distill_row, _grid_values(cfg))
        return _emit(cfg, "iso-distill",
                     ("p", "fidelity_learned", "p_succ_learned",
                      "fidelity_generalized_dejmps",
                      "p_succ_generalized_dejmps"), rows)
    if cfg.experiment == "qsd":
        gammas = [cfg.gamma] if cfg.gamma is not None else _grid_values(cfg)
        rows = parallel_map(_qsd_row, gammas)
        return _emit(cfg, "qsd",
                     ("gamma", "p_succ_tuned", "p_succ_noiseless_angles"), rows)
    if cfg.experiment == "channel-sim":
        if cfg.gamma is not None:
            gammas = [cfg.gamma]
        elif cfg.grid is not None:
            gammas = list(_grid_values(cfg))
        else:
            raise ConfigError("channel-sim needs --gamma or --grid")
        rows = parallel_map(lambda g: _channel_sim_row(g, cfg), gammas)
        return _emit(cfg, "channel-sim",
                     ("gamma", "mean_fidelity_trained", "mean_fidelity_teleport",
                      "std_fidelity_trained", "std_fidelity_teleport"), rows,
                     plot_skip=("std_fidelity_trained", "std_fidelity_teleport"))
    return _run_train(cfg)


# --- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locc-lab",
        description="Simulate and train small LOCC protocols; write CSV/SVG sweeps.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    descriptions = {
        "s-distill": "two-copy distillation sweep over the source parameter",
        "iso-distill": "four-copy isotropic distillation sweep",
        "qsd": "noisy Bell-state discrimination sweep",
        "channel-sim": "train and score amplitude-damping channel simulation",
        "train": "train one protocol family at a single operating point",
    }
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=descriptions[name])
        sp.add_argument("--grid", type=str, default=None,
                        help="sweep grid start:stop:points")
        sp.add_argument("--samples", type=int, default=None,
                        help="Monte Carlo sample count (channel-sim)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--restarts", type=int, default=None,
                        help="training restarts")
        sp.add_argument("--out", type=str, default=None, help="output directory")
        sp.add_argument("--format", type=str, default=None, choices=FORMATS)
        sp.add_argument("--config", type=str, default=None,
                        help="JSON file with the same keys; flags override it")
        if name in ("qsd", "channel-sim", "train"):
            sp.add_argument("--gamma", type=float, default=None,
                            help="noise strength in [0, 1]")
        if name == "train":
            sp.add_argument("--task", type=str, default=None, choices=TRAIN_TASKS)
            sp.add_argument("--p", type=float, default=None,
                            help="source parameter for distillation tasks")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values = {}
    if args.config is not None:
        with open(args.config) as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise ConfigError(f"config file {args.config} is not a mapping")

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_values.get(key, default)

    grid = pick(args.grid, "grid", None)
    if isinstance(grid, str):
        grid = parse_grid(grid)
    elif isinstance(grid, (list, tuple)):
        if len(grid) != 3:
            raise ConfigError(f"grid {grid!r} is not [start, stop, points]")
        grid = (float(grid[0]), float(grid[1]), int(grid[2]))
    return ExperimentConfig(
        experiment=args.experiment,
        grid=grid,
        gamma=pick(getattr(args, "gamma", None), "gamma", None),
        p=pick(getattr(args, "p", None), "p", None),
        samples=int(pick(args.samples, "samples", 1000)),
        seed=int(pick(args.seed, "seed", 0)),
        restarts=int(pick(args.restarts, "restarts", 8)),
        out_dir=str(pick(args.out, "out", "out")),
        fmt=str(pick(args.format, "format", "csv+svg")),
        task=pick(getattr(args, "task", None), "task", None),
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        written = run_experiment(cfg)
    except (ConfigError, OSError, ValueError, RuntimeError) as exc:
        print(f"locc-lab: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
