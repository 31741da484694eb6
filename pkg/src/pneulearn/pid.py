"""First-iteration PID bootstrap: discrete PID with anti-windup, gains from
the stability-limit rule, and the ultimate-gain search that feeds it.

The search closes a proportional-only loop around a simulator, steps the
reference, and bisects the gain between decaying and growing oscillations.
"Sustained" means the last few error-peak amplitude ratios sit inside a
narrow band around one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PidGains:
    K_p: float
    K_i: float = 0.0
    K_D: float = 0.0


@dataclass(frozen=True)
class UltimatePoint:
    """Proportional gain at the stability limit and the oscillation period."""

    K_u: float
    T_u: float

    def __post_init__(self):
        if self.K_u <= 0 or self.T_u <= 0:
            raise ValueError("ultimate gain and period must be positive")


def zn_tune(up: UltimatePoint) -> PidGains:
    """Gains from the stability-limit rule: 0.6*K_u, 1.2*K_u/T_u, 0.075*K_u*T_u."""
    return PidGains(K_p=0.6 * up.K_u,
                    K_i=1.2 * up.K_u / up.T_u,
                    K_D=0.075 * up.K_u * up.T_u)


@dataclass
class PidState:
    integral: float = 0.0
    e_prev: float = 0.0
    primed: bool = False


def pid_control(e: float, state: PidState, T_s: float, gains: PidGains,
                u_limit: float = 1.0):
    """One discrete PID update: trapezoidal integral, backward-difference
    derivative, output clamp with the integrator frozen while clamped.

    Returns (u, new_state); states are values, never shared between loops.
    """
    if T_s <= 0:
        raise ValueError(f"T_s must be positive, got {T_s}")
    e_prev = e if not state.primed else state.e_prev
    integral = state.integral + 0.5 * T_s * (e + e_prev)
    u = gains.K_p * e + gains.K_i * integral + gains.K_D * (e - e_prev) / T_s
    if abs(u) > u_limit:
        integral = state.integral  # anti-windup: hold the integral
        u = gains.K_p * e + gains.K_i * integral + gains.K_D * (e - e_prev) / T_s
        u = min(max(u, -u_limit), u_limit)
    return u, PidState(integral=integral, e_prev=e, primed=True)


class UltimateGainNotFound(RuntimeError):
    """The proportional loop never reached sustained oscillation in range."""


@dataclass(frozen=True)
class ZnSearchConfig:
    K_lo: float = 0.1
    K_hi: float = 400.0
    horizon: float = 20.0         # seconds simulated per candidate gain
    T_s: float = 1e-3
    settle_fraction: float = 0.25  # leading transient discarded before peaks
    peak_band: tuple = (0.95, 1.05)
    n_peaks: int = 4
    max_iter: int = 40
    tol_rel: float = 0.01
    u_limit: float = 1.0

    def __post_init__(self):
        if not 0 < self.K_lo < self.K_hi:
            raise ValueError("need 0 < K_lo < K_hi")
        if self.horizon <= 0 or self.T_s <= 0:
            raise ValueError("horizon and T_s must be positive")


def _peak_stats(errors, T_s: float, settle_fraction: float):
    """Positive-peak amplitudes/times of the detrended steady error tail."""
    start = int(len(errors) * settle_fraction)
    tail = errors[start:]
    mean = sum(tail) / len(tail)
    peaks, times = [], []
    for i in range(1, len(tail) - 1):
        v = tail[i] - mean
        if v > 0.0 and tail[i] >= tail[i - 1] and tail[i] > tail[i + 1]:
            peaks.append(v)
            times.append((start + i) * T_s)
    return peaks, times


def _classify(make_sim, K: float, y_start: float, step_ref: float,
              cfg: ZnSearchConfig):
    """Run the P-only loop; returns (verdict, T_u) with verdict in
    {'decaying', 'sustained', 'growing'}.

    A response that rides the actuator clamp (or the piston end stops) is a
    saturated limit cycle, not the stability limit, so it counts as growing:
    the classical experiment raises the gain only while the oscillation stays
    in the linear range.
    """
    plant = make_sim()
    y = plant.reset(y_start)
    n = int(round(cfg.horizon / cfg.T_s))
    tail_start = int(n * cfg.settle_fraction)
    errors = []
    clamped = 0
    hit_stop = False
    stroke = getattr(getattr(plant, "params", None), "L", None)
    for i in range(n):
        e = step_ref - y
        errors.append(e)
        u_raw = K * e
        u = min(max(u_raw, -cfg.u_limit), cfg.u_limit)
        if i >= tail_start and u != u_raw:
            clamped += 1
        y = plant.step(u, cfg.T_s)
        if stroke is not None and (y <= 1e-9 or y >= stroke - 1e-9):
            hit_stop = True
    saturated = hit_stop or clamped > 0.05 * (n - tail_start)
    peaks, times = _peak_stats(errors, cfg.T_s, cfg.settle_fraction)
    if len(peaks) < cfg.n_peaks + 1:
        return ("growing", None) if saturated else ("decaying", None)
    last = peaks[-(cfg.n_peaks + 1):]
    ratios = [last[i + 1] / last[i] for i in range(len(last) - 1) if last[i] > 0]
    if not ratios:
        return ("growing", None) if saturated else ("decaying", None)
    gmean = math.exp(sum(math.log(r) for r in ratios) / len(ratios))
    t_last = times[-(cfg.n_peaks + 1):]
    T_u = (t_last[-1] - t_last[0]) / (len(t_last) - 1)
    lo, hi = cfg.peak_band
    if saturated or gmean > hi:
        return "growing", T_u
    if all(lo <= r <= hi for r in ratios):
        return "sustained", T_u
    if gmean < lo:
        return "decaying", T_u
    return "sustained", T_u


def find_ultimate_gain(make_sim, step_ref: float,
                       cfg: ZnSearchConfig = ZnSearchConfig(),
                       y_start: float = 0.0) -> UltimatePoint:
    """Bisect the proportional gain to the stability limit.

    ``make_sim`` builds a fresh simulator (reset(y0) / step(u, dt) -> y); the
    loop starts at ``y_start`` and steps the reference to ``step_ref``.
    Raises UltimateGainNotFound when the top of the range still decays.
    """
    verdict_lo, _ = _classify(make_sim, cfg.K_lo, y_start, step_ref, cfg)
    if verdict_lo == "growing":
        raise UltimateGainNotFound(
            f"loop already grows at K_lo={cfg.K_lo}; lower the search range")
    verdict_hi, T_hi = _classify(make_sim, cfg.K_hi, y_start, step_ref, cfg)
    if verdict_hi == "decaying":
        raise UltimateGainNotFound(
            f"no sustained oscillation found for K in [{cfg.K_lo}, {cfg.K_hi}]")
    if verdict_hi == "sustained":
        return UltimatePoint(cfg.K_hi, T_hi)

    lo, hi = cfg.K_lo, cfg.K_hi
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        verdict, T_u = _classify(make_sim, mid, y_start, step_ref, cfg)
        if verdict == "sustained":
            return UltimatePoint(mid, T_u)
        if verdict == "decaying":
            lo = mid
        else:
            hi = mid
        if (hi - lo) < cfg.tol_rel * mid:
            break
    # interval collapsed without landing in the sustained band; measure the
    # period just above the boundary
    _, T_u = _classify(make_sim, hi, y_start, step_ref, cfg)
    if T_u is None:
        raise UltimateGainNotFound(
            f"could not measure an oscillation period near K={hi}")
    return UltimatePoint(0.5 * (lo + hi), T_u)
