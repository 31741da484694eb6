"""Trial-to-trial learning engine.

Each trial runs the plant over the full reference with total control
u = u_l + u_f: a feedforward table u_l held fixed within the trial plus a
feedback correction u_f from the configured controller.  Between trials the
feedforward table absorbs the low-pass (learnable) part of the previous
feedback effort:

    u_l[k] = u_l[k-1] + alpha * lowpass(u_f[k-1])

so repeatable error sources migrate into u_l across iterations while
non-repeatable content is filtered out of the update and left to feedback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .fuzzy import FuzzyPdConfig, delta_error, fuzzy_pd
from .linear import LinearPlantParams, LinearSimulator
from .pid import PidGains, PidState, pid_control
from .plant import PlantParams, PneumaticSimulator
from .signals import Signal, rms, two_norm
from .wavelets import WaveletConfig, wfilter

DIVERGENCE_FACTOR = 1e3


class DivergenceError(RuntimeError):
    """A trial's rms error blew past the divergence guard."""

    def __init__(self, iteration: int, rms_value: float, threshold: float):
        super().__init__(
            f"iteration {iteration} diverged: rms {rms_value:.6g} exceeds "
            f"guard {threshold:.6g}")
        self.iteration = iteration
        self.rms_value = rms_value
        self.threshold = threshold


@dataclass(frozen=True)
class DisturbanceSpec:
    """Per-trial piston force disturbance (input-additive on the linear plant).

    ``repeatable`` is added identically every trial; ``nonrepeatable_std``
    scales differenced white noise (high-pass, so it is unlearnable by
    construction) drawn fresh per trial from (seed, trial index).
    """

    repeatable: Optional[Signal] = None
    nonrepeatable_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.nonrepeatable_std < 0:
            raise ValueError("noise standard deviation must be >= 0")

    def force(self, n: int, trial_index: int) -> Optional[np.ndarray]:
        out = None
        if self.repeatable is not None:
            if len(self.repeatable) != n:
                raise ValueError(
                    f"repeatable disturbance length {len(self.repeatable)} "
                    f"does not match trial length {n}")
            out = self.repeatable.samples.copy()
        if self.nonrepeatable_std > 0.0:
            rng = np.random.default_rng([self.seed, trial_index])
            w = rng.standard_normal(n + 1)
            noise = (w[1:] - w[:-1]) * (self.nonrepeatable_std / math.sqrt(2.0))
            out = noise if out is None else out + noise
        return out


@dataclass
class TrialSetup:
    """Everything one learning run needs."""

    reference: Signal
    plant: Union[PlantParams, LinearPlantParams]
    feedback: Union[FuzzyPdConfig, PidGains]
    alpha: float = 1.0
    wavelet: Optional[WaveletConfig] = field(default_factory=WaveletConfig)
    iterations: int = 8
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    bootstrap_pid: Optional[PidGains] = None
    use_pid_bootstrap: bool = False
    u_limit: float = 1.0
    substeps: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha < 2.0:
            raise ValueError(f"learning gain must lie in [0, 2), got {self.alpha}")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.use_pid_bootstrap and self.bootstrap_pid is None:
            raise ValueError("bootstrap mode requires bootstrap_pid gains")

    @property
    def T_s(self) -> float:
        return self.reference.T_s

    def effective_wavelet(self) -> Optional[WaveletConfig]:
        if self.wavelet is None:
            return None
        return self.wavelet.reduced_for_length(len(self.reference))


@dataclass
class IterationRecord:
    """Per-trial traces plus the trial rms."""

    k: int
    y_k: Signal
    e_k: Signal
    u_l: Signal
    u_f: Signal
    u_total: Signal
    rms: float
    aux: dict = field(default_factory=dict)


@dataclass
class LearningCurve:
    records: list
    ratios: list

    def rms_history(self) -> np.ndarray:
        return np.array([r.rms for r in self.records])

    def best_rms(self) -> float:
        return float(min(r.rms for r in self.records))


def make_simulator(plant, substeps: int = 1):
    if isinstance(plant, PlantParams):
        return PneumaticSimulator(plant, substeps=substeps)
    if isinstance(plant, LinearPlantParams):
        return LinearSimulator(plant)
    raise TypeError(f"unsupported plant spec {type(plant).__name__}")


def _feedback_fn(feedback, T_s: float, u_limit: float):
    """Per-trial feedback closure over (e, de) -> u_f."""
    if isinstance(feedback, FuzzyPdConfig):
        def fn(e, de):
            return fuzzy_pd(e, de, feedback)
        return fn
    if isinstance(feedback, PidGains):
        state = PidState()

        def fn(e, de):
            nonlocal state
            u, state = pid_control(e, state, T_s, feedback, u_limit=u_limit)
            return u
        return fn
    raise TypeError(f"unsupported feedback spec {type(feedback).__name__}")


def run_trial(setup: TrialSetup, u_l: Signal, trial_index: int,
              feedback=None) -> IterationRecord:
    """One pass over the reference from the canonical initial state.

    The recorded u_f is the raw controller output (what the learning update
    consumes); u_total is the actuator-clamped value the plant received.
    """
    y_d = setup.reference.samples
    n = len(y_d)
    if len(u_l) != n:
        raise ValueError(f"feedforward length {len(u_l)} != trial length {n}")
    T_s = setup.T_s
    sim = make_simulator(setup.plant, setup.substeps)
    y = sim.reset(y_d[0])
    fb = _feedback_fn(setup.feedback if feedback is None else feedback,
                      T_s, setup.u_limit)
    dist = setup.disturbance.force(n, trial_index)

    u_l_arr = u_l.samples
    y_arr = np.empty(n)
    e_arr = np.empty(n)
    uf_arr = np.empty(n)
    ut_arr = np.empty(n)
    aux_keys = tuple(sim.aux().keys())
    aux = {key: np.empty(n) for key in aux_keys}
    lim = setup.u_limit

    e_prev = y_d[0] - y
    for i in range(n):
        e = y_d[i] - y
        de = delta_error(e, e_prev)
        u_f = fb(e, de)
        u_tot = u_l_arr[i] + u_f
        if u_tot > lim:
            u_tot = lim
        elif u_tot < -lim:
            u_tot = -lim
        y_arr[i] = y
        e_arr[i] = e
        uf_arr[i] = u_f
        ut_arr[i] = u_tot
        if aux_keys:
            a = sim.aux()
            for key in aux_keys:
                aux[key][i] = a[key]
        f_ext = dist[i] if dist is not None else 0.0
        y = sim.step(u_tot, T_s, f_ext)
        e_prev = e

    return IterationRecord(
        k=trial_index,
        y_k=Signal(y_arr, T_s),
        e_k=Signal(e_arr, T_s),
        u_l=Signal(u_l_arr.copy(), T_s),
        u_f=Signal(uf_arr, T_s),
        u_total=Signal(ut_arr, T_s),
        rms=rms(e_arr),
        aux=aux)


def update_feedforward(u_l_prev: Signal, u_f_prev: Signal, alpha: float,
                       cfg: Optional[WaveletConfig]) -> Signal:
    """Between-trial table update: add alpha times the filtered feedback.

    With cfg None the feedback passes unfiltered (ablation path for showing
    why the filter is needed under non-repeatable disturbances).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"learning gain must lie in (0, 2), got {alpha}")
    if len(u_l_prev) != len(u_f_prev):
        raise ValueError(
            f"length mismatch: {len(u_l_prev)} vs {len(u_f_prev)}")
    if cfg is None:
        filtered = u_f_prev.samples
    else:
        filtered = wfilter(u_f_prev, cfg.reduced_for_length(len(u_f_prev))).samples
    return Signal(u_l_prev.samples + alpha * filtered, u_l_prev.T_s)


def convergence_ratio(e_k: Signal, e_prev: Signal) -> float:
    """Two-norm ratio of successive per-trial errors."""
    denom = two_norm(e_prev)
    if denom == 0.0:
        raise ZeroDivisionError("previous trial error is identically zero")
    return two_norm(e_k) / denom


def run_learning(setup: TrialSetup) -> LearningCurve:
    """Run the full iteration schedule and collect the learning curve.

    Iteration 1 runs under the bootstrap PID when the setup asks for it
    (tuning mode, which equalizes the first-trial rms across candidate
    controllers); otherwise it runs the configured feedback with a zero
    feedforward table.  Later iterations update the table from the previous
    trial's feedback, then run.
    """
    n = len(setup.reference)
    u_l = Signal(np.zeros(n), setup.T_s)
    cfg = setup.effective_wavelet()
    records = []
    ratios = []
    threshold = math.inf
    for k in range(1, setup.iterations + 1):
        feedback = None
        if k == 1 and setup.use_pid_bootstrap:
            feedback = setup.bootstrap_pid
        if k >= 2 and setup.alpha > 0.0:
            u_l = update_feedforward(u_l, records[-1].u_f, setup.alpha, cfg)
        rec = run_trial(setup, u_l, k, feedback=feedback)
        if k == 1 and rec.rms > 0.0:
            threshold = DIVERGENCE_FACTOR * rec.rms
        if rec.rms > threshold:
            raise DivergenceError(k, rec.rms, threshold)
        if records:
            ratios.append(convergence_ratio(rec.e_k, records[-1].e_k))
        records.append(rec)
    return LearningCurve(records=records, ratios=ratios)
