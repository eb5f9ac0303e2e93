"""Closed-form regime classification of the limit system, plus numerical
limit-cycle detection through a Poincare return map.

The discriminant of the equilibrium cubic (in the form below) decides the
equilibrium count, and the Jacobian trace at the unique equilibrium decides
its stability:

    Delta = -27 I^2 + 18 (1+lam) q I - 4 q^3 - 4 (1+lam)^3 I + (1+lam)^2 q^2
    with q = lam + b/a and I = i_ext,

    T(v*) = -3 v*^2 + 2 (1+lam) v* - lam - a.

Delta > 0 gives two stable and one unstable equilibrium; Delta < 0 a single
equilibrium, stable for T < 0 and surrounded by an attracting cycle for
T > 0.  A saddle-node sits at Delta = 0 and a Hopf point at T = 0.  Note the
-a in T: it is the trace of [[-N0'(v*), -1], [b, -a]], the linearization of
the limit system with relaxing adaptation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ModelParams, cubic_prime
from .limit_ode import LimitState, equilibria, rk4_step

BISTABLE = "Bistable"
MONOSTABLE_STABLE = "MonostableStable"
OSCILLATORY = "Oscillatory"
DEGENERATE_SADDLE_NODE = "DegenerateSaddleNode"
DEGENERATE_HOPF = "DegenerateHopf"

DEGENERACY_TOL = 1e-9  # about 1000x double-precision noise at these magnitudes


class CycleDetectionError(RuntimeError):
    """Integration budget exhausted without convergence or periodicity."""


@dataclass(frozen=True)
class EquilibriumInfo:
    v: float
    x: float
    trace: float
    det: float
    eigenvalues: tuple[complex, complex]
    label: str  # stable | unstable | marginal


@dataclass(frozen=True)
class LimitCycle:
    period: float
    v_min: float
    v_max: float


@dataclass(frozen=True)
class BifurcationReport:
    delta: float
    equilibria: tuple[EquilibriumInfo, ...]
    regime: str
    cycle: LimitCycle | None = None


def discriminant(p: ModelParams) -> float:
    """The cubic discriminant, evaluated exactly as written above."""
    if not p.a > 0:
        raise ValueError("discriminant requires a > 0")
    lam1 = 1.0 + p.lam
    q = p.lam + p.b / p.a
    i0 = p.i_ext
    return (-27.0 * i0 ** 2 + 18.0 * lam1 * q * i0 - 4.0 * q ** 3
            - 4.0 * lam1 ** 3 * i0 + lam1 ** 2 * q ** 2)


def trace_at(vstar: float, p: ModelParams) -> float:
    """Jacobian trace at the equilibrium (v*, (b/a) v*)."""
    return -3.0 * vstar ** 2 + 2.0 * (1.0 + p.lam) * vstar - p.lam - p.a


def determinant_at(vstar: float, p: ModelParams) -> float:
    """Jacobian determinant a*N0'(v*) + b at the equilibrium."""
    return p.a * float(cubic_prime(vstar, p.drift_spec)) + p.b


def _eigenvalues(trace: float, det: float) -> tuple[complex, complex]:
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return ((trace - s) / 2.0 + 0j, (trace + s) / 2.0 + 0j)
    s = math.sqrt(-disc)
    return (complex(trace / 2.0, -s / 2.0), complex(trace / 2.0, s / 2.0))


def _stability_label(eigs, tol: float) -> str:
    top = max(e.real for e in eigs)
    if top < -tol:
        return "stable"
    if top > tol:
        return "unstable"
    return "marginal"


def classify(p: ModelParams, *, degeneracy_tol: float = DEGENERACY_TOL) -> BifurcationReport:
    """Regime classification with per-equilibrium eigenvalue labels.

    Degenerate annotations appear when |Delta| or |T| falls below the
    tolerance.  Raises RuntimeError if the discriminant sign and the root
    count disagree outside the degeneracy band (an internal inconsistency,
    not a user error).
    """
    delta = discriminant(p)

    def info_at(v: float, x: float) -> EquilibriumInfo:
        tr = trace_at(v, p)
        det = determinant_at(v, p)
        eigs = _eigenvalues(tr, det)
        return EquilibriumInfo(v=v, x=x, trace=tr, det=det, eigenvalues=eigs,
                               label=_stability_label(eigs, degeneracy_tol))

    infos = tuple(info_at(v, x) for v, x in equilibria(p))

    if abs(delta) <= degeneracy_tol:
        if len(infos) == 3:
            # within the band the numerically split double root is one
            # equilibrium; present the merged pair next to the simple root
            gaps = [infos[1].v - infos[0].v, infos[2].v - infos[1].v]
            k = 0 if gaps[0] <= gaps[1] else 1
            mid = 0.5 * (infos[k].v + infos[k + 1].v)
            merged = info_at(mid, (p.b / p.a) * mid)
            infos = (merged, infos[2]) if k == 0 else (infos[0], merged)
        return BifurcationReport(delta, infos, DEGENERATE_SADDLE_NODE)
    if delta > 0.0:
        if len(infos) != 3:
            raise RuntimeError(
                f"discriminant {delta} > 0 but {len(infos)} equilibria found")
        return BifurcationReport(delta, infos, BISTABLE)
    if len(infos) != 1:
        raise RuntimeError(
            f"discriminant {delta} < 0 but {len(infos)} equilibria found")
    tr = infos[0].trace
    if abs(tr) <= degeneracy_tol:
        regime = DEGENERATE_HOPF
    elif tr < 0.0:
        regime = MONOSTABLE_STABLE
    else:
        regime = OSCILLATORY
    return BifurcationReport(delta, infos, regime)


def detect_limit_cycle(p: ModelParams, s0: LimitState, *,
                       transient: float = 200.0,
                       max_time: float = 2000.0,
                       dt: float = 0.01,
                       min_returns: int = 5,
                       spread_tol: float = 0.01,
                       convergence_tol: float = 1e-8) -> LimitCycle | None:
    """Poincare-section cycle detection on the limit system.

    Integrates past the transient, then watches upward crossings of the
    section v = v* (the unique equilibrium; with several equilibria the
    running midline of the trajectory is used).  Returns the mean return
    time over at least min_returns returns once their relative spread is
    below spread_tol, or None if the state stops moving (displacement below
    convergence_tol over one time unit).  Exhausting max_time without either
    outcome raises CycleDetectionError.
    """
    eqs = equilibria(p)
    section = eqs[0][0] if len(eqs) == 1 else None

    alpha, beta = s0.alpha, s0.beta
    for _ in range(int(round(transient / dt))):
        alpha, beta = rk4_step(alpha, beta, p, dt)
    t = transient

    probe_steps = int(round(1.0 / dt))
    chunk_steps = int(round(25.0 / dt))
    crossings: list[float] = []
    v_lo, v_hi = alpha, alpha
    while t < transient + max_time:
        # stationarity probe over one time unit
        ref_a, ref_b = alpha, beta
        moved = 0.0
        for _ in range(probe_steps):
            alpha, beta = rk4_step(alpha, beta, p, dt)
            moved = max(moved, math.hypot(alpha - ref_a, beta - ref_b))
        t += 1.0
        if moved < convergence_tol:
            return None

        if section is None:
            section = 0.5 * (v_lo + v_hi) if crossings else alpha

        prev = alpha
        for k in range(chunk_steps):
            alpha, beta = rk4_step(alpha, beta, p, dt)
            v_lo = min(v_lo, alpha)
            v_hi = max(v_hi, alpha)
            if prev < section <= alpha:
                frac = (section - prev) / (alpha - prev)
                crossings.append(t + (k + frac) * dt)
            prev = alpha
        t += chunk_steps * dt

        if len(crossings) >= min_returns + 1:
            recent = crossings[-(min_returns + 1):]
            gaps = [b - a for a, b in zip(recent[:-1], recent[1:])]
            mean = sum(gaps) / len(gaps)
            if mean > 0 and (max(gaps) - min(gaps)) / mean < spread_tol:
                # one more lap for the amplitude bounds
                lo, hi = alpha, alpha
                for _ in range(int(round(mean / dt)) + 1):
                    alpha, beta = rk4_step(alpha, beta, p, dt)
                    lo = min(lo, alpha)
                    hi = max(hi, alpha)
                return LimitCycle(period=mean, v_min=lo, v_max=hi)

    raise CycleDetectionError(
        f"no convergence and no settled cycle within {max_time} time units "
        f"(crossings seen: {len(crossings)})")


def report_to_dict(report: BifurcationReport) -> dict:
    """JSON-friendly view of a classification report."""
    return {
        "delta": report.delta,
        "regime": report.regime,
        "equilibria": [
            {"v": e.v, "x": e.x, "trace": e.trace, "det": e.det,
             "eigenvalues": [[z.real, z.imag] for z in e.eigenvalues],
             "label": e.label}
            for e in report.equilibria],
        "cycle": None if report.cycle is None else {
            "period": report.cycle.period,
            "v_min": report.cycle.v_min,
            "v_max": report.cycle.v_max},
    }
