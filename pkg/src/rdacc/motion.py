"""Target kinematics: exact two-way delay, the per-pulse linearized delay,
its error bounds, and the acceleration-ratio loss predictor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KinematicsError, ParameterError

C0 = 299_792_458.0


@dataclass(frozen=True)
class RadarParams:
    fc: float
    B: float
    Tpri: float
    Tp: float
    Np: int
    fs: float
    c0: float = C0

    def __post_init__(self):
        if not (0 < self.Tp < self.Tpri):
            raise ParameterError("need 0 < Tp < Tpri")
        if int(self.Np) != self.Np or self.Np < 1:
            raise ParameterError("Np must be a positive integer")
        if self.B <= 0 or self.fs < self.B:
            raise ParameterError("need 0 < B <= fs")
        if self.fc <= self.B / 2:
            raise ParameterError("carrier must exceed B/2")
        if self.c0 <= 0:
            raise ParameterError("c0 must be positive")

    @property
    def wavelength(self) -> float:
        return self.c0 / self.fc

    @property
    def Tcpi(self) -> float:
        return self.Np * self.Tpri

    @property
    def v_amb(self) -> float:
        """Velocity span of one Doppler ambiguity, ``lambda / (2 Tpri)``."""
        return self.wavelength / (2 * self.Tpri)

    def pulse_time(self, m):
        """Transmit time of pulse ``m`` (1-based)."""
        return (np.asarray(m) - 1) * self.Tpri


@dataclass(frozen=True)
class TargetTruth:
    r0: float
    v0: float
    a0: float = 0.0

    def range_at(self, t):
        return range_at(self, t)

    def velocity_at(self, t):
        return self.v0 + self.a0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class PulseKinematics:
    m: int
    T_m: float
    r_m: float
    v_m: float
    phi_m: float
    gamma_m: float
    rho_m: float
    zeta_m: float


@dataclass(frozen=True)
class EpsilonBounds:
    eps1: float
    eps2: float
    eps3: float
    threshold: float
    fraction: float
    pass_: bool

    @property
    def total(self) -> float:
        return self.eps1 + self.eps2 + self.eps3


def range_at(tgt: TargetTruth, t):
    t = np.asarray(t, dtype=float)
    out = tgt.r0 + tgt.v0 * t + 0.5 * tgt.a0 * t * t
    return float(out) if out.ndim == 0 else out


def exact_delay(tgt: TargetTruth, t, c0: float = C0):
    """Two-way delay of the echo received at time ``t``.

    Solves ``c0*tau/2 = r(t - tau/2)`` exactly.  Under quadratic motion this
    is ``a/8 tau^2 - (c0 + v(t))/2 tau + r(t) = 0``; the root that stays
    finite as ``a -> 0`` is taken in the cancellation-free form ``C/q``.
    """
    t = np.asarray(t, dtype=float)
    r = tgt.r0 + tgt.v0 * t + 0.5 * tgt.a0 * t * t
    half_b = 0.5 * (c0 + tgt.v0 + tgt.a0 * t)  # minus the linear coefficient
    if np.any(half_b <= 0):
        raise KinematicsError("closing speed reaches the propagation speed")
    if tgt.a0 == 0.0:
        tau = r / half_b
    else:
        disc = half_b * half_b - 0.5 * tgt.a0 * r
        if np.any(disc < 0):
            raise KinematicsError("delay equation has no real root")
        tau = r / (0.5 * (half_b + np.sqrt(disc)))
    if np.any(~np.isfinite(tau)) or np.any(tau <= 0):
        raise KinematicsError("target range is not positive at the reflection time")
    return float(tau) if tau.ndim == 0 else tau


def pulse_kinematics(tgt: TargetTruth, m: int, rp: RadarParams) -> PulseKinematics:
    if not 1 <= m <= rp.Np:
        raise ParameterError(f"pulse index {m} outside 1..{rp.Np}")
    return _kinematics(tgt.r0, tgt.v0, tgt.a0, m, rp)


def _kinematics(r0, v0, a0, m, rp):
    c0 = rp.c0
    T = (m - 1) * rp.Tpri
    v = v0 + a0 * T
    if abs(v) >= c0:
        raise KinematicsError(f"|v_m| >= c0 at pulse {m}")
    d = v0 * T + 0.5 * a0 * T * T
    r = r0 + d
    return PulseKinematics(
        m=int(m), T_m=T, r_m=r, v_m=v,
        phi_m=2 * r / (c0 + v),
        gamma_m=2 * v / (c0 + v),
        rho_m=(c0 - v) / c0,
        zeta_m=2 * d / (c0 - v),
    )


def cago_delay(tgt: TargetTruth, m: int, dt, rp: RadarParams):
    """Delay with velocity frozen at its pulse-start value: ``phi + gamma*dt``."""
    k = pulse_kinematics(tgt, m, rp)
    out = k.phi_m + k.gamma_m * np.asarray(dt, dtype=float)
    return float(out) if out.ndim == 0 else out


def _quadratic_extrema(tgt, t_lo, t_hi):
    """(max r, max |v|) of the quadratic motion over ``[t_lo, t_hi]``."""
    ts = [t_lo, t_hi]
    if tgt.a0 != 0:
        t_star = -tgt.v0 / tgt.a0
        if t_lo < t_star < t_hi:
            ts.append(t_star)
    r_max = max(range_at(tgt, t) for t in ts)
    v_max = max(abs(tgt.v0 + tgt.a0 * t) for t in (t_lo, t_hi))
    return r_max, v_max


def _max_delay(tgt, t_lo, t_hi, c0):
    ts = [t_lo, t_hi]
    if tgt.a0 != 0:
        # tau(t) is stationary where the reflection time hits zero velocity.
        t_ref = -tgt.v0 / tgt.a0
        t_star = t_ref + range_at(tgt, t_ref) / c0
        if t_lo < t_star < t_hi:
            ts.append(t_star)
    return max(exact_delay(tgt, t, c0) for t in ts)


def epsilon_bounds(tgt: TargetTruth, rp: RadarParams, fraction: float = 0.1) -> EpsilonBounds:
    """Upper bounds on the three terms neglected by the per-pulse linearization.

    The bounds hold for fast times ``0 <= dt <= Tp + tau_max`` of every
    pulse; extrema are taken over all receive times that range reaches.
    """
    c0 = rp.c0
    t_last = (rp.Np - 1) * rp.Tpri + rp.Tp
    tau_max = exact_delay(tgt, 0.0, c0)
    for _ in range(6):
        tau_max = _max_delay(tgt, 0.0, t_last + tau_max, c0)
    # Small pad so the fixed point is approached from above.
    tau_max *= 1 + 1e-9
    t_end = t_last + tau_max
    r_max, v_max = _quadratic_extrema(tgt, 0.0, t_end)
    if v_max >= c0:
        raise KinematicsError("radial speed reaches c0 within the CPI")
    a = abs(tgt.a0)
    span = rp.Tp + tau_max
    den = c0 - v_max
    eps1 = a * tau_max ** 2 / (4 * den)
    eps2 = 2 * a * span * r_max / den ** 2
    eps3 = a * span ** 2 / den
    threshold = 1.0 / rp.fc
    ok = max(eps1, eps2, eps3) < fraction * threshold
    return EpsilonBounds(eps1, eps2, eps3, threshold, fraction, ok)


def linearization_error(tgt: TargetTruth, m: int, dt, rp: RadarParams):
    """Signed ``tau_exact(T_m + dt) - (phi_m + gamma_m dt)``."""
    dt = np.asarray(dt, dtype=float)
    T = (m - 1) * rp.Tpri
    return exact_delay(tgt, T + dt, rp.c0) - cago_delay(tgt, m, dt, rp)


def acceleration_ratio(a: float, Tp: float, tau: float, fc: float, c0: float = C0) -> float:
    """``a * Tp * (Tp + tau) / lambda``; predicts the linearization loss."""
    return a * Tp * (Tp + tau) / (c0 / fc)


def predicted_loss(upsilon: float) -> float:
    """``10 log10 sinc^2(upsilon)`` in dB, normalized sinc; ``-inf`` at nulls."""
    if upsilon < 0:
        raise ParameterError("acceleration ratio must be non-negative")
    if upsilon >= 1 and float(upsilon).is_integer():
        return -math.inf
    s = float(np.sinc(upsilon))
    return 20 * math.log10(abs(s)) if s != 0 else -math.inf
