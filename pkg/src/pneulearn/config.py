"""YAML experiment configuration: parsing, validation with field-path
messages, defaults, and round-tripping of the tuned controller genes.

Every physical constant and every knob the underlying modules expose lives
here; nothing numerical is hard-coded in the simulation paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .fuzzy import GENE_NAMES, FuzzyPdConfig, SfDcGenes, build_memberships
from .ga import GaConfig
from .ilc import DisturbanceSpec, TrialSetup
from .pid import PidGains, ZnSearchConfig
from .plant import PlantParams
from .signals import Signal
from .wavelets import WaveletConfig


class ConfigError(ValueError):
    """Invalid configuration; message lists every offending field."""


DEFAULT_GENES = {
    "S_I1": 0.21943, "S_I2": 0.26153, "S_O1": 0.9749,
    "D_I1": 0.82935, "D_I2": 0.64842, "D_O1": 0.64076,
}

DEFAULT_CONFIG = {
    "seed": 2024,
    "output_dir": "runs/out",
    "sample_period": 1.0e-3,
    "plant": {
        "M": 5.0, "b": 50.0,
        "A_a": 4.9e-4, "A_b": 4.2e-4,
        "V_a0": 2.0e-5, "V_b0": 2.0e-5,
        "R": 287.0, "T": 293.0, "gamma": 1.4, "beta": 1.0,
        "k_v": 2.0e-4, "tau": 5.0e-3,
        "C_d": 0.8, "w": 5.0e-3, "P_cr": 0.528,
        "P_s": 6.0e5, "P_atm": 1.013e5,
        "L": 0.5, "x_v_max": 2.0e-3, "F_L": 0.0,
        "friction": {"F_c": 20.0, "F_s": 30.0, "v_s": 0.01},
    },
    "trajectory": {
        "kind": "sine", "center": 0.25, "amplitude": 0.1,
        "frequency": 0.5, "duration": 4.0,
    },
    "controller": {
        "type": "fuzzy",
        "genes": dict(DEFAULT_GENES),
        "universes": {"e": 0.5, "de": 0.05, "out": 1.0},
    },
    "ilc": {
        "alpha": 1.0, "wavelet": "db4", "level": 8,
        "boundary": "symmetric", "iterations": 8,
        "pid_bootstrap": False, "u_limit": 1.0, "substeps": 1,
    },
    "bootstrap": {
        "mode": "zn",
        "step_start_fraction": 0.25, "step_fraction": 0.5,
        "K_lo": 0.5, "K_hi": 400.0, "horizon": 20.0,
    },
    "disturbance": {"nonrepeatable_std": 0.0},
    "ga": {
        "population_size": 20, "generations": 5,
        "crossover_rate": 0.9, "blend_alpha": 0.5,
        "mutation_rate": 0.1, "mutation_std": 0.1,
        "elitism_count": 1, "tournament_size": 3,
        "fitness_iterations": 3,
    },
}


@dataclass(frozen=True)
class TrajectorySpec:
    kind: str = "sine"
    center: float = 0.25
    amplitude: float = 0.1
    frequency: float = 0.5
    duration: float = 4.0
    start: float = 0.0
    end: float = 0.3


@dataclass
class ExperimentConfig:
    seed: int
    output_dir: str
    T_s: float
    plant: PlantParams
    trajectory: TrajectorySpec
    controller_type: str
    genes: Optional[SfDcGenes]
    universes: tuple
    pid_gains: Optional[PidGains]
    alpha: float
    wavelet: WaveletConfig
    iterations: int
    pid_bootstrap: bool
    u_limit: float
    substeps: int
    bootstrap_mode: str
    bootstrap_gains: Optional[PidGains]
    zn_search: ZnSearchConfig
    zn_step_start: float
    zn_step_to: float
    disturbance: DisturbanceSpec
    ga: GaConfig

    def fuzzy_config(self) -> FuzzyPdConfig:
        if self.genes is None:
            raise ConfigError("controller.genes: required for a fuzzy controller")
        return build_memberships(self.genes, *self.universes)

    def feedback(self):
        if self.controller_type == "fuzzy":
            return self.fuzzy_config()
        return self.pid_gains


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in (override or {}).items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


class _Checker:
    def __init__(self):
        self.errors = []

    def number(self, section, key, path, lo=None, hi=None):
        v = section.get(key)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            self.errors.append(f"{path}: expected a number, got {v!r}")
            return None
        v = float(v)
        if lo is not None and v < lo:
            self.errors.append(f"{path}: {v} below minimum {lo}")
            return None
        if hi is not None and v > hi:
            self.errors.append(f"{path}: {v} above maximum {hi}")
            return None
        return v

    def integer(self, section, key, path, lo=None):
        v = section.get(key)
        if not isinstance(v, int) or isinstance(v, bool):
            self.errors.append(f"{path}: expected an integer, got {v!r}")
            return None
        if lo is not None and v < lo:
            self.errors.append(f"{path}: {v} below minimum {lo}")
            return None
        return v

    def choice(self, section, key, path, allowed):
        v = section.get(key)
        if v not in allowed:
            self.errors.append(f"{path}: {v!r} not one of {sorted(allowed)}")
            return None
        return v

    def raise_if_any(self):
        if self.errors:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(self.errors))


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read a YAML file (or use defaults), merge overrides, validate."""
    raw = {}
    if path is not None:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    data = _merge(DEFAULT_CONFIG, raw)
    if overrides:
        data = _merge(data, overrides)
    return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    chk = _Checker()
    seed = chk.integer(data, "seed", "seed", lo=0)
    output_dir = data.get("output_dir", "runs/out")
    T_s = chk.number(data, "sample_period", "sample_period", lo=1e-6)

    plant_data = data.get("plant", {})
    try:
        plant = PlantParams.from_dict(plant_data)
    except (TypeError, ValueError) as err:
        chk.errors.append(f"plant: {err}")
        plant = None

    traj_data = data.get("trajectory", {})
    kind = chk.choice(traj_data, "kind", "trajectory.kind", {"sine", "quintic"})
    traj = TrajectorySpec(
        kind=kind or "sine",
        center=traj_data.get("center", 0.25),
        amplitude=traj_data.get("amplitude", 0.1),
        frequency=traj_data.get("frequency", 0.5),
        duration=chk.number(traj_data, "duration", "trajectory.duration", lo=1e-3) or 4.0,
        start=traj_data.get("start", 0.0),
        end=traj_data.get("end", 0.3))
    if T_s is not None:
        n_float = traj.duration / T_s
        if abs(n_float - round(n_float)) > 1e-6:
            chk.errors.append(
                f"trajectory.duration: {traj.duration} is not a whole number "
                f"of sample periods ({T_s})")

    ctrl = data.get("controller", {})
    ctrl_type = chk.choice(ctrl, "type", "controller.type", {"fuzzy", "pid"})
    genes = None
    if isinstance(ctrl.get("genes"), dict):
        gd = ctrl["genes"]
        missing = [g for g in GENE_NAMES if g not in gd]
        if missing:
            chk.errors.append(f"controller.genes: missing {missing}")
        else:
            try:
                genes = SfDcGenes(**{g: float(gd[g]) for g in GENE_NAMES})
            except (TypeError, ValueError) as err:
                chk.errors.append(f"controller.genes: {err}")
    uni = ctrl.get("universes", {})
    universes = (
        chk.number(uni, "e", "controller.universes.e", lo=1e-12) or 1.0,
        chk.number(uni, "de", "controller.universes.de", lo=1e-12) or 1.0,
        chk.number(uni, "out", "controller.universes.out", lo=1e-12) or 1.0)
    pid_gains = None
    if isinstance(ctrl.get("pid"), dict):
        pd = ctrl["pid"]
        pid_gains = PidGains(K_p=float(pd.get("K_p", 0.0)),
                             K_i=float(pd.get("K_i", 0.0)),
                             K_D=float(pd.get("K_D", 0.0)))
    if ctrl_type == "fuzzy" and genes is None:
        chk.errors.append("controller.genes: required when controller.type is fuzzy")
    if ctrl_type == "pid" and pid_gains is None:
        chk.errors.append("controller.pid: required when controller.type is pid")

    ilc = data.get("ilc", {})
    alpha = chk.number(ilc, "alpha", "ilc.alpha", lo=0.0, hi=2.0)
    if alpha is not None and alpha >= 2.0:
        chk.errors.append(f"ilc.alpha: {alpha} outside the stable range (0, 2)")
    iterations = chk.integer(ilc, "iterations", "ilc.iterations", lo=1)
    level = chk.integer(ilc, "level", "ilc.level", lo=1)
    u_limit = chk.number(ilc, "u_limit", "ilc.u_limit", lo=1e-9)
    substeps = chk.integer(ilc, "substeps", "ilc.substeps", lo=1)
    try:
        wavelet = WaveletConfig(wavelet_name=ilc.get("wavelet", "db4"),
                                level=level or 8,
                                boundary=ilc.get("boundary", "symmetric"))
    except ValueError as err:
        chk.errors.append(f"ilc.wavelet: {err}")
        wavelet = WaveletConfig()

    boot = data.get("bootstrap", {})
    boot_mode = chk.choice(boot, "mode", "bootstrap.mode", {"zn", "explicit"})
    boot_gains = None
    if isinstance(boot.get("gains"), dict):
        bg = boot["gains"]
        boot_gains = PidGains(K_p=float(bg.get("K_p", 0.0)),
                              K_i=float(bg.get("K_i", 0.0)),
                              K_D=float(bg.get("K_D", 0.0)))
    if boot_mode == "explicit" and boot_gains is None:
        chk.errors.append("bootstrap.gains: required when bootstrap.mode is explicit")
    step_start_fraction = chk.number(
        boot, "step_start_fraction", "bootstrap.step_start_fraction", lo=0.0, hi=1.0)
    step_fraction = chk.number(
        boot, "step_fraction", "bootstrap.step_fraction", lo=-1.0, hi=1.0)

    dist = data.get("disturbance", {})
    std = chk.number(dist, "nonrepeatable_std", "disturbance.nonrepeatable_std", lo=0.0)

    ga_data = data.get("ga", {})
    try:
        ga_cfg = GaConfig(
            population_size=ga_data.get("population_size", 20),
            generations=ga_data.get("generations", 5),
            crossover_rate=ga_data.get("crossover_rate", 0.9),
            blend_alpha=ga_data.get("blend_alpha", 0.5),
            mutation_rate=ga_data.get("mutation_rate", 0.1),
            mutation_std=ga_data.get("mutation_std", 0.1),
            elitism_count=ga_data.get("elitism_count", 1),
            tournament_size=ga_data.get("tournament_size", 3),
            seed=seed if seed is not None else 0,
            fitness_iterations=ga_data.get("fitness_iterations", 3),
            early_stop_fitness=ga_data.get("early_stop_fitness"))
    except (TypeError, ValueError) as err:
        chk.errors.append(f"ga: {err}")
        ga_cfg = GaConfig()

    chk.raise_if_any()

    # cross-field checks that need the parsed values
    stroke = plant.L
    if traj.kind == "sine":
        lo = traj.center - abs(traj.amplitude)
        hi = traj.center + abs(traj.amplitude)
    else:
        lo = min(traj.start, traj.end)
        hi = max(traj.start, traj.end)
    if lo < 0.0 or hi > stroke:
        raise ConfigError(
            f"trajectory: range [{lo:.4g}, {hi:.4g}] leaves the stroke "
            f"[0, {stroke}]")

    zn_search = ZnSearchConfig(
        K_lo=boot.get("K_lo", 0.5), K_hi=boot.get("K_hi", 400.0),
        horizon=boot.get("horizon", 20.0), T_s=T_s)
    zn_step_start = step_start_fraction * stroke
    zn_step_to = zn_step_start + step_fraction * stroke
    if not 0.0 <= zn_step_to <= stroke:
        raise ConfigError("bootstrap.step_fraction: step target leaves the stroke")

    return ExperimentConfig(
        seed=seed, output_dir=output_dir, T_s=T_s, plant=plant,
        trajectory=traj, controller_type=ctrl_type, genes=genes,
        universes=universes, pid_gains=pid_gains, alpha=alpha,
        wavelet=wavelet, iterations=iterations,
        pid_bootstrap=bool(ilc.get("pid_bootstrap", False)),
        u_limit=u_limit, substeps=substeps,
        bootstrap_mode=boot_mode, bootstrap_gains=boot_gains,
        zn_search=zn_search, zn_step_start=zn_step_start, zn_step_to=zn_step_to,
        disturbance=DisturbanceSpec(nonrepeatable_std=std, seed=seed),
        ga=ga_cfg)


def generate_trajectory(spec: TrajectorySpec, T_s: float) -> Signal:
    """Reference position profile, one of:

    * ``sine``: center + amplitude * sin(2*pi*f*t), starting at the center;
    * ``quintic``: smooth point-to-point move (zero end velocity and
      acceleration), held at the endpoint for the rest of the trial.
    """
    n = int(round(spec.duration / T_s))
    if n < 1:
        raise ValueError("trajectory duration shorter than one sample")
    t = np.arange(n) * T_s
    if spec.kind == "sine":
        y = spec.center + spec.amplitude * np.sin(2.0 * math.pi * spec.frequency * t)
    elif spec.kind == "quintic":
        tau = np.clip(t / spec.duration, 0.0, 1.0)
        s = 10.0 * tau ** 3 - 15.0 * tau ** 4 + 6.0 * tau ** 5
        y = spec.start + (spec.end - spec.start) * s
    else:
        raise ValueError(f"unknown trajectory kind {spec.kind!r}")
    return Signal(y, T_s)


def build_setup(cfg: ExperimentConfig,
                bootstrap_gains: Optional[PidGains] = None) -> TrialSetup:
    """Assemble the learning-run setup from a parsed configuration."""
    reference = generate_trajectory(cfg.trajectory, cfg.T_s)
    gains = bootstrap_gains if bootstrap_gains is not None else cfg.bootstrap_gains
    return TrialSetup(
        reference=reference,
        plant=cfg.plant,
        feedback=cfg.feedback(),
        alpha=cfg.alpha,
        wavelet=cfg.wavelet,
        iterations=cfg.iterations,
        disturbance=cfg.disturbance,
        bootstrap_pid=gains,
        use_pid_bootstrap=cfg.pid_bootstrap and gains is not None,
        u_limit=cfg.u_limit,
        substeps=cfg.substeps)


def dump_genes(genes: SfDcGenes, universes: tuple, path: str) -> None:
    """Write a tuned controller as a reusable controller section."""
    doc = {"controller": {
        "type": "fuzzy",
        "genes": {k: float(v) for k, v in genes.to_dict().items()},
        "universes": {"e": universes[0], "de": universes[1], "out": universes[2]},
    }}
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)


def save_config(data: dict, path: str) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)
