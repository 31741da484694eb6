"""Nonlinear five-state pneumatic servo: rodded cylinder, proportional valve.

States: piston position and velocity, the two chamber absolute pressures, and
the valve spool position (first-order valve).  Chamber charging/discharging is
compressible orifice flow with a choked/subsonic branch split; the piston sees
viscous damping plus a Coulomb/stiction/Stribeck dry-friction force.

Everything here is a pure function of value types, so independent simulations
can run in parallel and identical inputs give bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class FrictionParams:
    """Dry friction: Coulomb level, stiction peak, Stribeck velocity scale."""

    F_c: float = 20.0
    F_s: float = 30.0
    v_s: float = 0.01

    def __post_init__(self):
        if not (self.F_s >= self.F_c >= 0.0):
            raise ValueError("need F_s >= F_c >= 0")
        if self.v_s <= 0:
            raise ValueError("Stribeck velocity v_s must be positive")


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the cylinder, valve, and air supply (SI units)."""

    M: float = 5.0            # moved mass, kg
    b: float = 50.0           # viscous damping, N*s/m
    A_a: float = 4.9e-4       # cap-side piston area, m^2
    A_b: float = 4.2e-4       # rod-side piston area, m^2 (unsymmetrical)
    V_a0: float = 2.0e-5      # dead volume at x_p = 0, m^3
    V_b0: float = 2.0e-5      # dead volume at x_p = L, m^3
    R: float = 287.0          # gas constant, J/(kg*K)
    T: float = 293.0          # supply temperature, K
    gamma: float = 1.4        # specific-heat ratio
    beta: float = 1.0         # compressibility work-process correction
    k_v: float = 2.0e-4       # spool gain, m per control unit
    tau: float = 5.0e-3       # valve time constant, s
    C_d: float = 0.8          # discharge coefficient
    w: float = 5.0e-3         # orifice area gradient, m
    P_cr: float = 0.528       # critical pressure ratio
    P_s: float = 6.0e5        # supply pressure, Pa
    P_atm: float = 1.013e5    # exhaust pressure, Pa
    L: float = 0.5            # stroke, m
    x_v_max: float = 2.0e-3   # spool travel limit, m
    F_L: float = 0.0          # external load force, N
    friction: FrictionParams = field(default_factory=FrictionParams)

    def __post_init__(self):
        positive = ("M", "b", "A_a", "A_b", "V_a0", "V_b0", "R", "T", "k_v",
                    "tau", "C_d", "w", "P_s", "P_atm", "L", "x_v_max")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 1.0 < self.gamma <= 5.0 / 3.0:
            raise ValueError(f"gamma must lie in (1, 5/3], got {self.gamma}")
        if not 0.0 < self.P_cr < 1.0:
            raise ValueError(f"P_cr must lie in (0, 1), got {self.P_cr}")
        if not 0.0 < self.beta <= self.gamma:
            raise ValueError(f"beta must lie in (0, gamma], got {self.beta}")
        if self.P_atm >= self.P_s:
            raise ValueError("supply pressure must exceed exhaust pressure")

    @property
    def pressure_floor(self) -> float:
        return self.P_atm * 1e-2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PlantParams":
        data = dict(data)
        fr = data.pop("friction", {})
        if not isinstance(fr, FrictionParams):
            fr = FrictionParams(**fr)
        return cls(friction=fr, **data)


@dataclass(frozen=True)
class PlantState:
    """Piston position/velocity, chamber pressures, spool position."""

    x_p: float
    v_p: float
    P_a: float
    P_b: float
    x_v: float

    def as_tuple(self):
        return (self.x_p, self.v_p, self.P_a, self.P_b, self.x_v)


def initial_state(params: PlantParams, x_p0: float) -> PlantState:
    """Canonical trial start: at rest, both chambers at 3x exhaust pressure."""
    if not 0.0 <= x_p0 <= params.L:
        raise ValueError(f"start position {x_p0} outside stroke [0, {params.L}]")
    return PlantState(x_p=x_p0, v_p=0.0, P_a=3.0 * params.P_atm,
                      P_b=3.0 * params.P_atm, x_v=0.0)


def flow_constant(gamma: float, R: float) -> float:
    """Orifice flow constant sqrt((gamma/R) * (2/(gamma+1))^((gamma+1)/(gamma-1)))."""
    if gamma < 1.01:
        raise ValueError(f"gamma must be >= 1.01, got {gamma}")
    if R <= 0:
        raise ValueError(f"gas constant must be positive, got {R}")
    return math.sqrt((gamma / R) * (2.0 / (gamma + 1.0)) ** ((gamma + 1.0) / (gamma - 1.0)))


def valve_mass_flow(x_v: float, P_u: float, P_d: float,
                    params: PlantParams) -> float:
    """Mass flow through one valve orifice, caller-oriented upstream/downstream.

    Choked when P_d/P_u <= P_cr, subsonic above; the two branches agree at the
    boundary so the flow is continuous in the pressure ratio.
    """
    if P_u <= 0:
        raise ValueError(f"upstream pressure must be positive, got {P_u}")
    P_d = min(max(P_d, 0.0), P_u)
    x_v = max(x_v, 0.0)
    c1 = flow_constant(params.gamma, params.R)
    base = c1 * params.C_d * params.w * x_v * P_u / math.sqrt(params.T)
    ratio = P_d / P_u
    if ratio <= params.P_cr:
        return base
    frac = (ratio - params.P_cr) / (1.0 - params.P_cr)
    return base * math.sqrt(max(1.0 - frac * frac, 0.0))


def _signed_orifice_flow(opening: float, p_from: float, p_to: float,
                         params: PlantParams) -> float:
    """Flow from port 1 to port 2, negative when the gradient is reversed."""
    if p_from >= p_to:
        return valve_mass_flow(opening, p_from, p_to, params)
    return -valve_mass_flow(opening, p_to, p_from, params)


def friction_force(v_p: float, F_applied: float, params: FrictionParams) -> float:
    """Stribeck-type dry friction; at rest it clamps the applied force."""
    if v_p == 0.0:
        return min(max(F_applied, -params.F_s), params.F_s)
    mag = params.F_c + (params.F_s - params.F_c) * math.exp(-(v_p / params.v_s) ** 2)
    return math.copysign(mag, v_p)


def _derivatives(x_p: float, v_p: float, P_a: float, P_b: float, x_v: float,
                 u: float, p: PlantParams, f_ext: float = 0.0):
    """Right-hand side on plain floats; f_ext is an extra piston force."""
    V_a = p.V_a0 + p.A_a * x_p
    V_b = p.V_b0 + p.A_b * (p.L - x_p)
    if V_a <= 0 or V_b <= 0:
        raise ValueError(f"non-positive chamber volume at x_p={x_p}")

    # spool sign routes the flow paths; positive spool charges chamber a
    if x_v > 0.0:
        mdot_a = _signed_orifice_flow(x_v, p.P_s, P_a, p)      # into a
        mdot_b = _signed_orifice_flow(x_v, P_b, p.P_atm, p)    # out of b
    elif x_v < 0.0:
        mdot_a = -_signed_orifice_flow(-x_v, P_a, p.P_atm, p)  # out of a
        mdot_b = -_signed_orifice_flow(-x_v, p.P_s, P_b, p)    # into b
    else:
        mdot_a = mdot_b = 0.0  # closed-center valve

    F_pneu = p.A_a * P_a - p.A_b * P_b - p.F_L + f_ext
    F_f = friction_force(v_p, F_pneu, p.friction)

    gRT = p.gamma * p.R * p.T
    bg = p.beta * p.gamma
    return (
        v_p,
        (-p.b * v_p + F_pneu - F_f) / p.M,
        (gRT * mdot_a - bg * P_a * p.A_a * v_p) / V_a,
        (-gRT * mdot_b + bg * P_b * p.A_b * v_p) / V_b,
        -(x_v - p.k_v * u) / p.tau,
    )


def derivatives(state: PlantState, u: float, params: PlantParams,
                f_ext: float = 0.0) -> PlantState:
    """Time derivative of every state, packaged in PlantState order."""
    return PlantState(*_derivatives(*state.as_tuple(), u, params, f_ext))


def _rk4(s, u: float, dt: float, p: PlantParams, f_ext: float):
    k1 = _derivatives(*s, u, p, f_ext)
    k2 = _derivatives(*(si + 0.5 * dt * ki for si, ki in zip(s, k1)), u, p, f_ext)
    k3 = _derivatives(*(si + 0.5 * dt * ki for si, ki in zip(s, k2)), u, p, f_ext)
    k4 = _derivatives(*(si + dt * ki for si, ki in zip(s, k3)), u, p, f_ext)
    return tuple(si + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                 for si, a, b, c, d in zip(s, k1, k2, k3, k4))


def _clamp_state(s, p: PlantParams):
    x_p, v_p, P_a, P_b, x_v = s
    if x_p < 0.0:
        x_p, v_p = 0.0, 0.0  # plastic end-stop impact
    elif x_p > p.L:
        x_p, v_p = p.L, 0.0
    floor = p.pressure_floor
    P_a = max(P_a, floor)
    P_b = max(P_b, floor)
    x_v = min(max(x_v, -p.x_v_max), p.x_v_max)
    return (x_p, v_p, P_a, P_b, x_v)


def step(state: PlantState, u: float, dt: float, params: PlantParams,
         substeps: int = 1, f_ext: float = 0.0) -> PlantState:
    """Advance one control sample with fixed-step RK4 (optionally substepped).

    End stops are plastic (velocity zeroed), the spool is clamped to its
    travel, and pressures are floored well below exhaust to avoid blowups.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    s = state.as_tuple()
    h = dt / substeps
    for _ in range(substeps):
        s = _clamp_state(_rk4(s, u, h, params, f_ext), params)
    return PlantState(*s)


class PneumaticSimulator:
    """Stateful stepping wrapper used by the trial loops."""

    def __init__(self, params: PlantParams, substeps: int = 1):
        self.params = params
        self.substeps = substeps
        self._s = None

    def reset(self, y0: float) -> float:
        self._s = initial_state(self.params, y0).as_tuple()
        return self._s[0]

    @property
    def output(self) -> float:
        return self._s[0]

    def state(self) -> PlantState:
        return PlantState(*self._s)

    def step(self, u: float, dt: float, f_ext: float = 0.0) -> float:
        h = dt / self.substeps
        s = self._s
        for _ in range(self.substeps):
            s = _clamp_state(_rk4(s, u, h, self.params, f_ext), self.params)
        self._s = s
        return s[0]

    def aux(self) -> dict:
        return {"x_v": self._s[4], "P_a": self._s[2], "P_b": self._s[3]}


def adiabatic_invariants(state: PlantState, params: PlantParams):
    """Per-chamber P*V^(beta*gamma); conserved while the valve is closed."""
    V_a = params.V_a0 + params.A_a * state.x_p
    V_b = params.V_b0 + params.A_b * (params.L - state.x_p)
    e = params.beta * params.gamma
    return state.P_a * V_a ** e, state.P_b * V_b ** e
