"""Shared parameter types, the cubic drift and its truncation, and
initial-condition samplers.

Sign convention used throughout the toolkit: the deterministic voltage drift is

    -v(v - lam)(v - 1) + i_ext - x + (vbar - v)/epsilon

i.e. the input current enters with a plus sign in the drift.  The recovery
variable relaxes as dx = (-a*x + b*v) dt.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

GAUSSIAN_CLUSTER = "gaussian"
POINT_CLUSTER = "point"
CUSTOM_SAMPLER = "custom"

INIT_KINDS = (GAUSSIAN_CLUSTER, POINT_CLUSTER, CUSTOM_SAMPLER)


class BlowUpError(RuntimeError):
    """A trajectory or field became non-finite (time step too large for the
    coupling stiffness, usually dt not small compared to epsilon)."""

    def __init__(self, message: str, t: float = float("nan"), index: int = -1):
        super().__init__(message)
        self.t = t
        self.index = index


@dataclass(frozen=True)
class DriftSpec:
    """Cubic nonlinearity v(v - lam)(v - 1), optionally replaced outside
    [-M, M] by its tangent lines (continuous with continuous derivative)."""

    lam: float
    truncation: float | None = None

    def __post_init__(self):
        if self.truncation is not None and not self.truncation > 0:
            raise ValueError(f"truncation level must be > 0, got {self.truncation}")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the coupled system.

    epsilon is the inverse coupling strength (small epsilon = strong
    electrical coupling).  sigma scales the voltage noise; the per-step
    Euler-Maruyama amplitude is sigma*sqrt(2*dt), so sigma=1 matches the
    unit-diffusion normalization of the density equation.  adaptation_noise
    switches the sqrt(2*epsilon) diffusion on the recovery variable.
    truncation, when set, activates the tangent-line drift outside [-M, M].
    """

    a: float = 0.3
    b: float = 0.1
    lam: float = 4.0
    i_ext: float = 0.0
    sigma: float = 1.0
    epsilon: float = 0.01
    adaptation_noise: bool = True
    truncation: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if self.b < 0:
            raise ValueError(f"b must be >= 0, got {self.b}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.truncation is not None and not self.truncation > 0:
            raise ValueError(f"truncation level must be > 0, got {self.truncation}")

    @property
    def drift_spec(self) -> DriftSpec:
        return DriftSpec(lam=self.lam, truncation=self.truncation)


def cubic(v, spec: DriftSpec):
    """The cubic part of the drift, v(v - lam)(v - 1).  Roots at 0, 1, lam."""
    return v * (v - spec.lam) * (v - 1.0)


def cubic_prime(v, spec: DriftSpec):
    """Derivative of the cubic: 3v^2 - 2(1 + lam)v + lam."""
    return 3.0 * v * v - 2.0 * (1.0 + spec.lam) * v + spec.lam


def cubic_truncated(v, M: float, spec: DriftSpec):
    """Cubic on [-M, M], tangent-line continuation outside.

    Equals cubic(v) for |v| <= M and cubic(+-M) + cubic'(+-M)(v -+ M)
    beyond; both the value and the first derivative are continuous at +-M.
    """
    if not M > 0:
        raise ValueError(f"truncation level must be > 0, got {M}")
    v = np.asarray(v, dtype=float)
    inner = cubic(np.clip(v, -M, M), spec)
    upper = cubic(M, spec) + cubic_prime(M, spec) * (v - M)
    lower = cubic(-M, spec) + cubic_prime(-M, spec) * (v + M)
    out = np.where(v > M, upper, np.where(v < -M, lower, inner))
    return out if out.ndim else float(out)


def nonlinearity(v, spec: DriftSpec):
    """cubic(v), or its truncated form when spec.truncation is set."""
    if spec.truncation is None:
        return cubic(v, spec)
    return cubic_truncated(v, spec.truncation, spec)


def voltage_drift(v, x, vbar, p: ModelParams):
    """Deterministic voltage drift: -N0(v) + i_ext - x + (vbar - v)/epsilon,
    with N0 the (possibly truncated) cubic."""
    return -nonlinearity(v, p.drift_spec) + p.i_ext - x + (vbar - v) / p.epsilon


@dataclass
class EnsembleState:
    """Time-stamped voltage and adaptation arrays for n neurons."""

    t: float
    v: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        if self.v.shape != self.x.shape or self.v.ndim != 1 or self.v.size < 1:
            raise ValueError("v and x must be 1-d arrays of equal length >= 1")

    @property
    def n(self) -> int:
        return self.v.size


@dataclass(frozen=True)
class InitCondition:
    """Initial cluster for ensembles and density fields.

    The gaussian kind is the canonical concentrated initial law: a product
    Gaussian with variance epsilon/concentration per coordinate, centered at
    (mean_v, mean_x).  Its scaled log density is bounded above by
    -(concentration/2)(v^2 + x^2) + offset when centered at the origin.
    The point kind puts every neuron exactly at the center; custom delegates
    to ``sampler(n, rng) -> (v, x)``.
    """

    mean_v: float = 0.0
    mean_x: float = 0.0
    concentration: float = 0.3
    offset: float = 0.1
    kind: str = GAUSSIAN_CLUSTER
    sampler: Callable | None = None

    def __post_init__(self):
        if not self.concentration > 0:
            raise ValueError(f"concentration must be > 0, got {self.concentration}")
        if self.kind not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.kind!r}, expected one of {INIT_KINDS}")
        if self.kind == CUSTOM_SAMPLER and self.sampler is None:
            raise ValueError("custom init kind requires a sampler callable")


def init_variance(cond: InitCondition, p: ModelParams) -> float:
    """Per-coordinate variance epsilon/concentration of the gaussian kind."""
    return p.epsilon / cond.concentration


def init_log_density(v, x, cond: InitCondition, p: ModelParams):
    """epsilon*log of the closed-form gaussian initial density."""
    A = cond.concentration
    quad = -0.5 * A * ((np.asarray(v) - cond.mean_v) ** 2 + (np.asarray(x) - cond.mean_x) ** 2)
    return quad + p.epsilon * np.log(A / (2.0 * np.pi * p.epsilon))


def sample_initial(cond: InitCondition, n: int, p: ModelParams,
                   rng: np.random.Generator) -> EnsembleState:
    """Draw n i.i.d. initial states at t=0.

    For the gaussian kind the per-coordinate standard deviation is
    sqrt(epsilon/concentration); voltages are drawn before adaptation values
    so the draw order is fixed for a given stream.
    """
    if n < 1:
        raise ValueError(f"ensemble size must be >= 1, got {n}")
    if cond.kind == GAUSSIAN_CLUSTER:
        if cond.concentration > min(p.a, 1.0) + 1e-12:
            raise ValueError(
                f"concentration {cond.concentration} exceeds min(a, 1) = {min(p.a, 1.0)}")
        std = np.sqrt(init_variance(cond, p))
        v = cond.mean_v + std * rng.standard_normal(n)
        x = cond.mean_x + std * rng.standard_normal(n)
    elif cond.kind == POINT_CLUSTER:
        v = np.full(n, cond.mean_v, dtype=float)
        x = np.full(n, cond.mean_x, dtype=float)
    else:
        v, x = cond.sampler(n, rng)
        v = np.asarray(v, dtype=float)
        x = np.asarray(x, dtype=float)
    return EnsembleState(t=0.0, v=v, x=x)
