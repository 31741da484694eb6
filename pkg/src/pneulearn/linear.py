"""Linear diagnostic plant: a rational transfer function simulated with the
same fixed-step RK4 as the pneumatic model, plus frequency-response helpers
for predicting per-iteration error ratios analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearPlantParams:
    """Transfer function num(s)/den(s), coefficients in descending powers."""

    num: tuple
    den: tuple

    def __post_init__(self):
        num = tuple(float(c) for c in self.num)
        den = tuple(float(c) for c in self.den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        if len(den) < 2 or den[0] == 0.0:
            raise ValueError("denominator must have order >= 1 with nonzero lead")
        if len(num) > len(den):
            raise ValueError("transfer function must be proper")


def frequency_response(params: LinearPlantParams, omega: float) -> complex:
    """G(j*omega) for the diagnostic plant."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    s = 1j * omega
    den = np.polyval(params.den, s)
    if abs(den) < 1e-12 * max(1.0, float(np.max(np.abs(params.den)))):
        raise ZeroDivisionError(f"pole on the imaginary axis near omega={omega}")
    return complex(np.polyval(params.num, s) / den)


def real_part_crossover(params: LinearPlantParams, omega_lo: float = 1e-3,
                        omega_hi: float = 1e3, n_grid: int = 20000) -> float | None:
    """Lowest frequency where Re G(j*omega) crosses zero, or None if it never
    does on the swept grid (then any finite cutoff satisfies positivity)."""
    omegas = np.geomspace(omega_lo, omega_hi, n_grid)
    prev_w, prev_re = None, None
    for w in omegas:
        re = frequency_response(params, float(w)).real
        if prev_re is not None and prev_re > 0.0 >= re:
            # bisect the bracketing interval
            lo, hi = prev_w, float(w)
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if frequency_response(params, mid).real > 0.0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        prev_w, prev_re = float(w), re
    return None


def _tf_to_ss(num, den):
    """Controllable canonical state-space (A, B, C, D) for a proper TF."""
    den = np.asarray(den, dtype=float)
    num = np.asarray(num, dtype=float)
    den = den / den[0]
    n = len(den) - 1
    num = np.concatenate([np.zeros(n + 1 - len(num)), num / 1.0])
    d0 = num[0]
    num_sp = num[1:] - d0 * den[1:]  # strictly proper remainder
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros(n)
    B[0] = 1.0
    C = num_sp.copy()
    return A, B, C, d0


class LinearSimulator:
    """RK4-stepped state-space realization with the trial-loop interface."""

    def __init__(self, params: LinearPlantParams):
        self.params = params
        self.A, self.B, self.C, self.D = _tf_to_ss(params.num, params.den)
        self._x = np.zeros(self.A.shape[0])

    def reset(self, y0: float = 0.0) -> float:
        # the diagnostic plant always starts relaxed; y0 is accepted for
        # interface parity and must match the relaxed output
        self._x = np.zeros(self.A.shape[0])
        return float(self.C @ self._x)

    @property
    def output(self) -> float:
        return float(self.C @ self._x + 0.0)

    def step(self, u: float, dt: float, f_ext: float = 0.0) -> float:
        """One RK4 step; f_ext adds to the plant input."""
        uin = u + f_ext
        A, B = self.A, self.B
        x = self._x
        k1 = A @ x + B * uin
        k2 = A @ (x + 0.5 * dt * k1) + B * uin
        k3 = A @ (x + 0.5 * dt * k2) + B * uin
        k4 = A @ (x + dt * k3) + B * uin
        self._x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return float(self.C @ self._x + self.D * uin)

    def aux(self) -> dict:
        return {}


def predicted_error_ratio(params: LinearPlantParams, K_p: float, omega: float,
                          K_D: float = 0.0, T_s: float = 0.0,
                          alpha: float = 1.0) -> float:
    """Per-iteration error-norm ratio for P(D) feedback at one frequency.

    ratio = |1 + (1 - alpha) * G*K| / |1 + G*K| with K the feedback transfer
    K_p + K_D * (1 - z^-1) evaluated at z = exp(j*omega*T_s).  With alpha = 1
    this reduces to 1 / |1 + G*K|.
    """
    G = frequency_response(params, omega)
    K = complex(K_p)
    if K_D != 0.0:
        if T_s <= 0:
            raise ValueError("T_s required for a derivative term")
        K += K_D * (1.0 - np.exp(-1j * omega * T_s))
    loop = G * K
    return abs(1.0 + (1.0 - alpha) * loop) / abs(1.0 + loop)


def integrator_chain_ultimate(a1: float, a2: float):
    """Analytic ultimate gain/period for G(s) = 1 / (s*(s+a1)*(s+a2)).

    Routh: K_u = a1*a2*(a1+a2), crossover omega^2 = a1*a2.
    """
    K_u = a1 * a2 * (a1 + a2)
    omega = math.sqrt(a1 * a2)
    return K_u, 2.0 * math.pi / omega


def integrator_chain(a1: float, a2: float) -> LinearPlantParams:
    """The matching plant for :func:`integrator_chain_ultimate`."""
    return LinearPlantParams(num=(1.0,),
                             den=(1.0, a1 + a2, a1 * a2, 0.0))
