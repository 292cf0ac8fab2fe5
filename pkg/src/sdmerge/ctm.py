"""Godunov / Cell-Transmission discretization of the three-link merge network."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .fundamental import FundamentalDiagram
from .models import FluxTriple, MergeModel
from .state import SDState


@dataclass
class Link:
    """A homogeneous link split into M cells of size dx = L / M."""

    fd: FundamentalDiagram
    length: float
    cells: int
    densities: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.cells < 1 or self.length <= 0:
            raise ConfigurationError("link needs positive length and >= 1 cell")
        if self.densities is None:
            self.densities = np.zeros(self.cells)
        self.densities = np.asarray(self.densities, dtype=float)
        if self.densities.shape != (self.cells,):
            raise ConfigurationError("density array does not match cell count")
        if np.any(self.densities < 0) or np.any(self.densities > self.fd.rho_jam):
            raise ConfigurationError("cell densities outside [0, rho_jam]")

    @property
    def dx(self) -> float:
        return self.length / self.cells

    def set_uniform(self, rho: float) -> None:
        self.densities[:] = rho

    def demands(self) -> np.ndarray:
        return self.fd.demand_array(self.densities)

    def supplies(self) -> np.ndarray:
        return self.fd.supply_array(self.densities)


# ---------------------------------------------------------------------------
# Boundary conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DemandBoundary:
    """Upstream-entry demand: Neumann copy, constant, or sinusoidal."""

    kind: str  # neumann | constant | periodic
    value: float = 0.0
    amplitude: float = 0.0
    period: float = 60.0

    def demand_at(self, first_cell_demand: float, n: int, dt: float) -> float:
        if self.kind == "neumann":
            return first_cell_demand
        if self.kind == "constant":
            return self.value
        if self.kind == "periodic":
            return self.value + self.amplitude * math.sin(n * math.pi * dt / self.period)
        raise ConfigurationError(f"unknown demand boundary {self.kind!r}")


@dataclass(frozen=True)
class SupplyBoundary:
    """Downstream-exit supply: Neumann copy or constant."""

    kind: str  # neumann | constant
    value: float = 0.0

    def supply_at(self, last_cell_supply: float) -> float:
        if self.kind == "neumann":
            return last_cell_supply
        if self.kind == "constant":
            return self.value
        raise ConfigurationError(f"unknown supply boundary {self.kind!r}")


# ---------------------------------------------------------------------------
# Network and trajectory
# ---------------------------------------------------------------------------

@dataclass
class MergeNetwork:
    up1: Link
    up2: Link
    down: Link
    model: MergeModel
    bc_up1: DemandBoundary = DemandBoundary("neumann")
    bc_up2: DemandBoundary = DemandBoundary("neumann")
    bc_down: SupplyBoundary = SupplyBoundary("neumann")
    last_edge_fluxes: dict = field(default_factory=dict)

    @property
    def links(self) -> tuple[Link, Link, Link]:
        return (self.up1, self.up2, self.down)


@dataclass
class Trajectory:
    """Recorded run: density snapshots at a cadence, junction series per step."""

    times: list[float]
    densities: dict[int, np.ndarray]  # link id (1..3) -> (snapshots, cells)
    step_times: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    d1_boundary: np.ndarray  # demand of the junction-adjacent cell, link 1
    d2_boundary: np.ndarray
    s3_boundary: np.ndarray  # supply of the junction-adjacent cell, link 3
    cells: tuple[int, int, int]
    dx: tuple[float, float, float]
    record_every: int
    dt: float

    def snapshot_index(self, t: float) -> int:
        return int(np.argmin(np.abs(np.asarray(self.times) - t)))

    def grid_signature(self) -> tuple:
        return (self.cells, self.dx, self.record_every)


def cfl_dt(network: MergeNetwork, factor: float = 0.9) -> float:
    """Largest stable time step scaled by `factor`: factor * dx_min / v_f_max."""
    if not (0.0 < factor <= 1.0):
        raise ConfigurationError("CFL factor must lie in (0, 1]")
    dx_min = min(link.dx for link in network.links)
    vf_max = max(link.fd.free_flow_speed for link in network.links)
    return factor * dx_min / vf_max


def _check_cfl(network: MergeNetwork, dt: float) -> None:
    for link in network.links:
        if link.fd.free_flow_speed * dt / link.dx > 1.0 + 1e-12:
            raise ConfigurationError(
                f"time step {dt} violates the CFL condition on a link with "
                f"dx={link.dx}, v_f={link.fd.free_flow_speed}"
            )


def step(network: MergeNetwork, dt: float, n: int) -> FluxTriple:
    """Advance every cell by one Godunov update; returns the junction fluxes.

    Interior fluxes are min(sending, receiving) of adjacent cells; the
    junction fluxes apply the merge model to the three junction-adjacent
    cells, exactly as the discrete entropy condition prescribes.
    """
    _check_cfl(network, dt)
    up1, up2, down = network.up1, network.up2, network.down

    dem = {1: up1.demands(), 2: up2.demands(), 3: down.demands()}
    sup = {1: up1.supplies(), 2: up2.supplies(), 3: down.supplies()}

    junction = network.model.local_flux(
        SDState(dem[1][-1], sup[1][-1]),
        SDState(dem[2][-1], sup[2][-1]),
        SDState(dem[3][0], sup[3][0]),
        down.fd.capacity,
    )

    edge_fluxes: dict[int, tuple[float, float]] = {}
    for idx, link, out_flux in ((1, up1, junction.q1), (2, up2, junction.q2)):
        d0 = network.bc_up1 if idx == 1 else network.bc_up2
        entry_demand = d0.demand_at(dem[idx][0], n, dt)
        fluxes = np.empty(link.cells + 1)
        fluxes[0] = min(entry_demand, sup[idx][0])
        fluxes[1:-1] = np.minimum(dem[idx][:-1], sup[idx][1:])
        fluxes[-1] = out_flux
        link.densities += (dt / link.dx) * (fluxes[:-1] - fluxes[1:])
        edge_fluxes[idx] = (fluxes[0], fluxes[-1])

    exit_supply = network.bc_down.supply_at(sup[3][-1])
    fluxes = np.empty(down.cells + 1)
    fluxes[0] = junction.q3
    fluxes[1:-1] = np.minimum(dem[3][:-1], sup[3][1:])
    fluxes[-1] = min(dem[3][-1], exit_supply)
    down.densities += (dt / down.dx) * (fluxes[:-1] - fluxes[1:])
    edge_fluxes[3] = (fluxes[0], fluxes[-1])

    # (influx, outflux) per link for the step just taken; used by mass-balance checks
    network.last_edge_fluxes = edge_fluxes
    return junction


def run(
    network: MergeNetwork,
    t_end: float,
    cfl_factor: float = 0.9,
    record_every: int | None = None,
) -> Trajectory:
    """Run until t_end (final step truncated to land exactly on t_end)."""
    dt = cfl_dt(network, cfl_factor)
    n_steps = math.ceil(t_end / dt)
    if record_every is None:
        record_every = max(1, n_steps // 200)

    links = {1: network.up1, 2: network.up2, 3: network.down}
    snapshots: dict[int, list[np.ndarray]] = {i: [] for i in links}
    times: list[float] = []
    q1 = np.empty(n_steps)
    q2 = np.empty(n_steps)
    q3 = np.empty(n_steps)
    d1b = np.empty(n_steps)
    d2b = np.empty(n_steps)
    s3b = np.empty(n_steps)
    step_times = np.empty(n_steps)

    def record(t: float) -> None:
        times.append(t)
        for i, link in links.items():
            snapshots[i].append(link.densities.copy())

    record(0.0)
    t = 0.0
    for n in range(n_steps):
        dt_n = min(dt, t_end - t)
        d1b[n] = network.up1.fd.demand(float(network.up1.densities[-1]))
        d2b[n] = network.up2.fd.demand(float(network.up2.densities[-1]))
        s3b[n] = network.down.fd.supply(float(network.down.densities[0]))
        flux = step(network, dt_n, n)
        q1[n], q2[n], q3[n] = flux.q1, flux.q2, flux.q3
        step_times[n] = t
        t += dt_n
        if (n + 1) % record_every == 0 or n == n_steps - 1:
            record(t)

    return Trajectory(
        times=times,
        densities={i: np.array(snapshots[i]) for i in links},
        step_times=step_times,
        q1=q1,
        q2=q2,
        q3=q3,
        d1_boundary=d1b,
        d2_boundary=d2b,
        s3_boundary=s3b,
        cells=(network.up1.cells, network.up2.cells, network.down.cells),
        dx=(network.up1.dx, network.up2.dx, network.down.dx),
        record_every=record_every,
        dt=dt,
    )
