"""Conservative finite-volume solver for the self-consistent density
equation on a truncated (x, v) rectangle.

    d_t g = d_x((a x - b v) g + eps d_x g)
          + d_v((N0(v) - i_ext + x + (v - J[g])/eps) g + d_v g)

with J[g] the first moment of g in v, frozen from the pre-step field.  The
scheme is explicit first-order upwind for both advection terms plus centered
second differences for the diffusion (coefficient 1 in v, eps in x), with
zero-flux boundaries.  Interface fluxes telescope, so the discrete mass is
conserved to roundoff, and under the CFL bound every update coefficient is
nonnegative, which keeps the density nonnegative.  Simplicity is preferred
throughout: this solver is a cross-check oracle, not the product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import InitCondition, ModelParams, voltage_drift

CFL_SAFETY = 0.9
DENSITY_FLOOR = 1e-300
NEGATIVITY_TOL = -1e-12

_MAGIC = b"FHNMF-FIELD-1\n"


class CflError(RuntimeError):
    def __init__(self, message: str, required_dt: float, cell: tuple[int, int]):
        super().__init__(message)
        self.required_dt = required_dt
        self.cell = cell


class SchemeError(RuntimeError):
    """The update produced a density below the negativity tolerance."""


@dataclass(frozen=True)
class Grid:
    v_min: float
    v_max: float
    x_min: float
    x_max: float
    nv: int
    nx: int

    def __post_init__(self):
        if not (self.v_max > self.v_min and self.x_max > self.x_min):
            raise ValueError("grid bounds must be ordered")
        if self.nv < 8 or self.nx < 8:
            raise ValueError(f"nv and nx must be >= 8, got {self.nv}, {self.nx}")

    @property
    def dv(self) -> float:
        return (self.v_max - self.v_min) / self.nv

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    def v_centers(self) -> np.ndarray:
        return self.v_min + (np.arange(self.nv) + 0.5) * self.dv

    def x_centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    def v_faces_interior(self) -> np.ndarray:
        return self.v_min + np.arange(1, self.nv) * self.dv

    def x_faces_interior(self) -> np.ndarray:
        return self.x_min + np.arange(1, self.nx) * self.dx


@dataclass
class DensityField:
    """Density values rho[ix, iv] at cell centers, at time t."""

    grid: Grid
    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if self.rho.shape != (self.grid.nx, self.grid.nv):
            raise ValueError(
                f"rho shape {self.rho.shape} does not match grid ({self.grid.nx}, {self.grid.nv})")


@dataclass
class HopfColeField:
    """Scaled log density psi = eps*log(rho) with a floor mask; masked cells
    sit at the floor and must be excluded from derivative diagnostics."""

    psi: np.ndarray
    mask: np.ndarray  # True where rho was at or below the floor
    grid: Grid


@dataclass
class FpSolution:
    t: np.ndarray
    jg: np.ndarray
    mass: np.ndarray
    dt: float
    snapshots: list[DensityField]


def mass(f: DensityField) -> float:
    return float(f.rho.sum() * f.grid.dv * f.grid.dx)


def first_moment(f: DensityField) -> float:
    """Midpoint-rule first moment of v: sum v_center * rho * dv * dx."""
    return float((f.rho @ f.grid.v_centers()).sum() * f.grid.dv * f.grid.dx)


def gaussian_field(grid: Grid, cond: InitCondition, p: ModelParams) -> DensityField:
    """Discretized concentrated product Gaussian (variance eps/concentration
    per coordinate), renormalized to exact unit discrete mass."""
    var = p.epsilon / cond.concentration
    v = grid.v_centers()[None, :]
    x = grid.x_centers()[:, None]
    rho = np.exp(-((v - cond.mean_v) ** 2 + (x - cond.mean_x) ** 2) / (2.0 * var))
    total = rho.sum() * grid.dv * grid.dx
    if total <= 0:
        raise ValueError("initial density has no mass on this grid")
    return DensityField(grid=grid, rho=rho / total, t=0.0)


def uniform_field(grid: Grid) -> DensityField:
    area = (grid.v_max - grid.v_min) * (grid.x_max - grid.x_min)
    return DensityField(grid=grid, rho=np.full((grid.nx, grid.nv), 1.0 / area), t=0.0)


def _advection_speeds(grid: Grid, p: ModelParams, jg: float,
                      v: np.ndarray, x: np.ndarray) -> np.ndarray:
    # speed in the divergence form d_v(U g): U = -(deterministic drift)
    return -voltage_drift(v, x, jg, p)


def cfl_limit(f: DensityField, p: ModelParams, jg: float,
              advection: bool = True) -> tuple[float, tuple[int, int]]:
    """Largest stable dt (with safety factor) and the limiting cell."""
    g = f.grid
    vc = g.v_centers()[None, :]
    xc = g.x_centers()[:, None]
    denom = 2.0 * (1.0 / g.dv ** 2 + p.epsilon / g.dx ** 2)
    denom = np.full((g.nx, g.nv), denom)
    if advection:
        uv = np.abs(_advection_speeds(g, p, jg, vc, xc))
        ux = np.abs(p.a * xc - p.b * vc)
        denom = denom + uv / g.dv + ux / g.dx
    worst = int(np.argmax(denom))
    cell = (worst // g.nv, worst % g.nv)
    return CFL_SAFETY / float(denom.max()), cell


def stable_dt(grid: Grid, p: ModelParams) -> float:
    """CFL bound that is safe for any first moment inside the domain (the
    moment of a density supported on the grid cannot leave [v_min, v_max])."""
    vc = grid.v_centers()[None, :]
    xc = grid.x_centers()[:, None]
    base = np.abs(-voltage_drift(vc, xc, vc, p))  # drift without coupling
    reach = np.maximum(vc - grid.v_min, grid.v_max - vc) / p.epsilon
    uv = base + reach
    ux = np.abs(p.a * xc - p.b * vc)
    denom = uv / grid.dv + ux / grid.dx + 2.0 * (1.0 / grid.dv ** 2 + p.epsilon / grid.dx ** 2)
    return CFL_SAFETY / float(denom.max())


def fp_step(f: DensityField, p: ModelParams, dt: float, jg: float | None = None,
            advection: bool = True) -> DensityField:
    """One explicit conservative update with the first moment frozen from
    the pre-step field (or supplied externally, e.g. a prerecorded input
    current for truncated-drift experiments).

    advection=False drops both advection fluxes and leaves pure diffusion, a
    hook for scheme tests only.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    g = f.grid
    rho = f.rho
    if jg is None:
        jg = first_moment(f)

    dt_max, cell = cfl_limit(f, p, jg, advection=advection)
    if dt > dt_max:
        raise CflError(
            f"dt={dt:.3g} violates the stability bound {dt_max:.3g} "
            f"(limiting cell ix={cell[0]}, iv={cell[1]})",
            required_dt=dt_max, cell=cell)

    # v-direction interface fluxes H = U g_up + d_v g, zero at the walls
    hv = np.zeros((g.nx, g.nv + 1))
    hv[:, 1:-1] = (rho[:, 1:] - rho[:, :-1]) / g.dv
    if advection:
        uvf = _advection_speeds(g, p, jg, g.v_faces_interior()[None, :],
                                g.x_centers()[:, None])
        hv[:, 1:-1] += np.where(uvf <= 0.0, uvf * rho[:, :-1], uvf * rho[:, 1:])

    # x-direction interface fluxes H = U g_up + eps d_x g
    hx = np.zeros((g.nx + 1, g.nv))
    hx[1:-1, :] = p.epsilon * (rho[1:, :] - rho[:-1, :]) / g.dx
    if advection:
        uxf = p.a * g.x_faces_interior()[:, None] - p.b * g.v_centers()[None, :]
        hx[1:-1, :] += np.where(uxf <= 0.0, uxf * rho[:-1, :], uxf * rho[1:, :])

    rho_new = rho + dt * ((hv[:, 1:] - hv[:, :-1]) / g.dv
                          + (hx[1:, :] - hx[:-1, :]) / g.dx)

    worst = float(rho_new.min())
    if worst < NEGATIVITY_TOL:
        raise SchemeError(f"density fell to {worst:.3e} at t={f.t + dt:.6g}")
    return DensityField(grid=g, rho=rho_new, t=f.t + dt)


def solve(f0: DensityField, p: ModelParams, t_end: float, *,
          dt: float | None = None, record_stride: int = 1,
          jg_of_t=None, snapshot_stride: int | None = None) -> FpSolution:
    """Repeated fp_step with recorded (t, J[g], mass) diagnostics.

    With dt=None a uniform step is chosen from the worst-case CFL bound so
    recording times are reproducible.  jg_of_t, when given, supplies the
    input current externally instead of the self-consistent moment.
    """
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    if dt is None:
        if t_end > 0:
            n_steps = max(1, int(np.ceil(t_end / stable_dt(f0.grid, p))))
            dt = t_end / n_steps
        else:
            n_steps, dt = 0, stable_dt(f0.grid, p)
    else:
        n_steps = int(round(t_end / dt))

    f = f0
    times = [f.t]
    jgs = [first_moment(f)]
    masses = [mass(f)]
    snaps: list[DensityField] = []
    if snapshot_stride is not None:
        snaps.append(DensityField(f.grid, f.rho.copy(), f.t))
    for k in range(n_steps):
        jg = None if jg_of_t is None else float(jg_of_t(f.t))
        f = fp_step(f, p, dt, jg=jg)
        last = k + 1 == n_steps
        if (k + 1) % record_stride == 0 or last:
            times.append(f.t)
            jgs.append(first_moment(f))
            masses.append(mass(f))
        if snapshot_stride is not None and ((k + 1) % snapshot_stride == 0 or last):
            snaps.append(DensityField(f.grid, f.rho.copy(), f.t))
    return FpSolution(t=np.asarray(times), jg=np.asarray(jgs),
                      mass=np.asarray(masses), dt=dt, snapshots=snaps)


def hopf_cole(f: DensityField, p: ModelParams,
              floor: float = DENSITY_FLOOR) -> HopfColeField:
    """psi = eps*log(max(rho, floor)); cells at the floor are masked."""
    mask = ~(f.rho > floor)
    psi = p.epsilon * np.log(np.maximum(f.rho, floor))
    return HopfColeField(psi=psi, mask=mask, grid=f.grid)


def save_snapshot(path, f: DensityField, p: ModelParams) -> None:
    """Dense binary block with a one-line text header (grid, t, epsilon)."""
    header = {
        "v_min": f.grid.v_min, "v_max": f.grid.v_max,
        "x_min": f.grid.x_min, "x_max": f.grid.x_max,
        "nv": f.grid.nv, "nx": f.grid.nx,
        "t": f.t, "epsilon": p.epsilon,
    }
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(f.rho, dtype="<f8").tobytes())


def load_snapshot(path) -> tuple[DensityField, float]:
    """Inverse of save_snapshot; returns the field and the stored epsilon."""
    raw = Path(path).read_bytes()
    if not raw.startswith(_MAGIC):
        raise ValueError(f"{path} is not a field snapshot")
    nl = raw.index(b"\n", len(_MAGIC))
    header = json.loads(raw[len(_MAGIC):nl].decode("ascii"))
    grid = Grid(v_min=header["v_min"], v_max=header["v_max"],
                x_min=header["x_min"], x_max=header["x_max"],
                nv=header["nv"], nx=header["nx"])
    rho = np.frombuffer(raw[nl + 1:], dtype="<f8").reshape(grid.nx, grid.nv).copy()
    return DensityField(grid=grid, rho=rho, t=header["t"]), header["epsilon"]


def write_series_csv(path, sol: FpSolution) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,jg,mass\n")
        for t, jg, m in zip(sol.t, sol.jg, sol.mass):
            fh.write(f"{t:.17g},{jg:.17g},{m:.17g}\n")
