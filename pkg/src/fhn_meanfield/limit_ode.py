"""The strong-coupling limit system and its equilibria.

    dalpha/dt = -alpha(alpha - lam)(alpha - 1) + i_ext - beta
    dbeta/dt  = -a*beta + b*alpha

The adaptation sign follows the network relaxation dx = (-a x + b v) dt;
with a positive-feedback sign the recovery variable would diverge and the
system would have no attractors, so that variant is rejected here.
Equilibria are the real roots of

    v^3 - (1 + lam) v^2 + (lam + b/a) v - i_ext = 0,   x* = (b/a) v*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BlowUpError, ModelParams, cubic, nonlinearity

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class LimitState:
    t: float
    alpha: float
    beta: float


@dataclass
class LimitTrajectory:
    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def interp(self, times) -> tuple[np.ndarray, np.ndarray]:
        """Linear interpolation of (alpha, beta) at the given times."""
        times = np.asarray(times)
        return np.interp(times, self.t, self.alpha), np.interp(times, self.t, self.beta)


def limit_rhs(s: LimitState, p: ModelParams) -> tuple[float, float]:
    return _rhs(s.alpha, s.beta, p)


def _rhs(alpha: float, beta: float, p: ModelParams) -> tuple[float, float]:
    return (-float(nonlinearity(alpha, p.drift_spec)) + p.i_ext - beta,
            -p.a * beta + p.b * alpha)


def rk4_step(alpha: float, beta: float, p: ModelParams, dt: float) -> tuple[float, float]:
    k1 = _rhs(alpha, beta, p)
    k2 = _rhs(alpha + 0.5 * dt * k1[0], beta + 0.5 * dt * k1[1], p)
    k3 = _rhs(alpha + 0.5 * dt * k2[0], beta + 0.5 * dt * k2[1], p)
    k4 = _rhs(alpha + dt * k3[0], beta + dt * k3[1], p)
    return (alpha + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            beta + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]))


def rk4_integrate(s0: LimitState, p: ModelParams, dt: float, t_end: float,
                  record_stride: int = 1) -> LimitTrajectory:
    """Classical fixed-step RK4 from s0.t to s0.t + t_end."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if record_stride < 1:
        raise ValueError(f"record_stride must be >= 1, got {record_stride}")
    n_steps = int(round(t_end / dt))
    alpha, beta = s0.alpha, s0.beta
    times = [s0.t]
    alphas = [alpha]
    betas = [beta]
    for k in range(n_steps):
        alpha, beta = rk4_step(alpha, beta, p, dt)
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise BlowUpError(
                f"limit trajectory non-finite at t={s0.t + (k + 1) * dt:.6g}",
                t=s0.t + (k + 1) * dt)
        if (k + 1) % record_stride == 0 or k + 1 == n_steps:
            times.append(s0.t + (k + 1) * dt)
            alphas.append(alpha)
            betas.append(beta)
    return LimitTrajectory(np.asarray(times), np.asarray(alphas), np.asarray(betas))


def equilibrium_cubic_coeffs(p: ModelParams) -> tuple[float, float, float]:
    """(c2, c1, c0) of the monic equilibrium cubic v^3 + c2 v^2 + c1 v + c0."""
    if not p.a > 0:
        raise ValueError("equilibria require a > 0 (x* = (b/a) v* undefined)")
    return (-(1.0 + p.lam), p.lam + p.b / p.a, -p.i_ext)


def real_cubic_roots(c2: float, c1: float, c0: float) -> list[float]:
    """Distinct real roots of the monic cubic, ascending.

    Analytic bootstrap (trigonometric for three real roots, Cardano for
    one), then Newton polish; avoids fragility right at a vanishing
    discriminant.  A double root appears once in the output.
    """
    # depressed form y^3 + py + q with v = y - c2/3
    shift = -c2 / 3.0
    pp = c1 - c2 * c2 / 3.0
    qq = c0 + c2 * (2.0 * c2 * c2 - 9.0 * c1) / 27.0
    disc = -4.0 * pp ** 3 - 27.0 * qq ** 2

    scale = max(1.0, abs(c2), abs(c1), abs(c0))
    if abs(pp) < 1e-14 * scale and abs(qq) < 1e-14 * scale:
        ys = [0.0]  # triple root
    elif disc > 0.0:
        m = 2.0 * math.sqrt(-pp / 3.0)
        arg = 3.0 * qq / (pp * m)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        ys = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    elif disc < 0.0:
        # one real root; pick the numerically stable Cardano branch
        s = math.sqrt(qq * qq / 4.0 + pp ** 3 / 27.0)
        u = -qq / 2.0 + s if qq <= 0 else -qq / 2.0 - s
        u = math.copysign(abs(u) ** (1.0 / 3.0), u)
        ys = [u + (-pp / (3.0 * u) if u != 0.0 else 0.0)]
    else:
        # vanishing discriminant: a double root and a simple one
        ys = [3.0 * qq / pp, -3.0 * qq / (2.0 * pp)]

    roots = []
    for y in ys:
        r = y + shift
        for _ in range(50):
            f = ((r + c2) * r + c1) * r + c0
            if abs(f) < 1e-15 * scale:
                break
            fp = (3.0 * r + 2.0 * c2) * r + c1
            if fp == 0.0:
                break
            step = f / fp
            r -= step
            if abs(step) < 1e-16 * max(1.0, abs(r)):
                break
        roots.append(r)

    roots.sort()
    distinct: list[float] = []
    for r in roots:
        if not distinct or abs(r - distinct[-1]) > 1e-9 * max(1.0, abs(r)):
            distinct.append(r)
    return distinct


def equilibria(p: ModelParams) -> list[tuple[float, float]]:
    """All equilibria (v*, x*) of the limit system, ascending in v*.

    Each v* satisfies the equilibrium cubic to |residual| < 1e-12 (Newton
    refined); x* = (b/a) v*.  Returns 1, 2, or 3 entries (2 exactly at a
    saddle-node, where a double root appears once).
    """
    c2, c1, c0 = equilibrium_cubic_coeffs(p)
    return [(v, (p.b / p.a) * v) for v in real_cubic_roots(c2, c1, c0)]


def brute_force_root_count(p: ModelParams, grid_points: int = 20001) -> int:
    """Independent root counter: sign changes of the equilibrium cubic on a
    fine grid over [-10 lam, 10 lam], plus endpoint-root handling."""
    c2, c1, c0 = equilibrium_cubic_coeffs(p)
    span = 10.0 * max(abs(p.lam), 1.0)
    v = np.linspace(-span, span, grid_points)
    f = ((v + c2) * v + c1) * v + c0
    signs = np.sign(f)
    zero_hits = int(np.count_nonzero(signs == 0))
    flips = int(np.count_nonzero(signs[:-1] * signs[1:] < 0))
    return flips + zero_hits


def residual(v: float, p: ModelParams) -> float:
    """Value of the equilibrium condition at v (zero at an equilibrium)."""
    return float(cubic(v, p.drift_spec)) - p.i_ext + (p.b / p.a) * v
