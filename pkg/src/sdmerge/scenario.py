"""Scenario configuration files: a flat INI schema, fully validated at load.

Sections: [link1] [link2] [link3] [model] [boundary] [simulation] [output].
See the README for the field table and units.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

from .ctm import DemandBoundary, Link, MergeNetwork, SupplyBoundary
from .errors import ConfigurationError
from .fundamental import FundamentalDiagram, diagram_from_spec
from .models import MergeModel, model_from_spec
from .riemann import RiemannProblem
from .state import SDState, state_of_density


@dataclass(frozen=True)
class LinkSpec:
    family: str
    params: tuple[float, ...]
    length: float
    cells: int
    initial_density: float | None = None
    initial_state: tuple[float, float] | None = None

    def diagram(self) -> FundamentalDiagram:
        return diagram_from_spec(self.family, list(self.params))

    def initial(self, fd: FundamentalDiagram) -> tuple[float, SDState]:
        """(density, supply-demand state) of the uniform initial condition."""
        if self.initial_state is not None:
            state = SDState(*self.initial_state)
            return state.density(fd), state
        rho = self.initial_density if self.initial_density is not None else 0.0
        return rho, state_of_density(fd, rho)


@dataclass(frozen=True)
class Scenario:
    links: tuple[LinkSpec, LinkSpec, LinkSpec]
    model: MergeModel
    bc_up1: DemandBoundary
    bc_up2: DemandBoundary
    bc_down: SupplyBoundary
    t_end: float
    cfl_factor: float
    record_every: int | None
    out_dir: str
    seed: int

    def diagrams(self):
        return tuple(spec.diagram() for spec in self.links)

    def build_network(self) -> MergeNetwork:
        fds = self.diagrams()
        links = []
        for spec, fd in zip(self.links, fds):
            rho, _ = spec.initial(fd)
            link = Link(fd=fd, length=spec.length, cells=spec.cells)
            link.set_uniform(rho)
            links.append(link)
        return MergeNetwork(
            up1=links[0],
            up2=links[1],
            down=links[2],
            model=self.model,
            bc_up1=self.bc_up1,
            bc_up2=self.bc_up2,
            bc_down=self.bc_down,
        )

    def riemann_problem(self) -> RiemannProblem:
        fds = self.diagrams()
        states = [spec.initial(fd)[1] for spec, fd in zip(self.links, fds)]
        return RiemannProblem(self.model, *fds, *states)

    def with_cells(self, m: int) -> "Scenario":
        return replace(self, links=tuple(replace(s, cells=m) for s in self.links))

    def normalized(self) -> str:
        """Echo the scenario back in its canonical config form."""
        cp = configparser.ConfigParser()
        for i, spec in enumerate(self.links, start=1):
            sec = f"link{i}"
            cp[sec] = {"family": spec.family, "length": repr(spec.length), "cells": str(spec.cells)}
            if spec.params:
                cp[sec]["params"] = ", ".join(repr(p) for p in spec.params)
            if spec.initial_state is not None:
                cp[sec]["initial_state"] = ", ".join(repr(v) for v in spec.initial_state)
            else:
                cp[sec]["initial_density"] = repr(spec.initial_density or 0.0)
        cp["model"] = {k: v if isinstance(v, str) else ", ".join(repr(x) for x in v)
                       if isinstance(v, list) else repr(v)
                       for k, v in self.model.describe().items()}
        cp["boundary"] = {
            "upstream1": _bc_to_str(self.bc_up1),
            "upstream2": _bc_to_str(self.bc_up2),
            "downstream": _bc_to_str(self.bc_down),
        }
        sim = {
            "t_end": repr(self.t_end),
            "cfl_factor": repr(self.cfl_factor),
            "seed": str(self.seed),
        }
        if self.record_every is not None:
            sim["record_every"] = str(self.record_every)
        cp["simulation"] = sim
        cp["output"] = {"directory": self.out_dir}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _bc_to_str(bc) -> str:
    if bc.kind == "neumann":
        return "neumann"
    if bc.kind == "constant":
        return f"constant {bc.value!r}"
    return f"periodic {bc.value!r} {bc.amplitude!r} {bc.period!r}"


def _parse_demand_bc(text: str, where: str) -> DemandBoundary:
    parts = text.split()
    try:
        if parts[0] == "neumann" and len(parts) == 1:
            return DemandBoundary("neumann")
        if parts[0] == "constant" and len(parts) == 2:
            return DemandBoundary("constant", value=float(parts[1]))
        if parts[0] == "periodic" and len(parts) == 4:
            return DemandBoundary(
                "periodic",
                value=float(parts[1]),
                amplitude=float(parts[2]),
                period=float(parts[3]),
            )
    except ValueError as exc:
        raise ConfigurationError(f"{where}: bad boundary numbers in {text!r}") from exc
    raise ConfigurationError(
        f"{where}: expected 'neumann', 'constant D0' or 'periodic base amp period', "
        f"got {text!r}"
    )


def _parse_supply_bc(text: str, where: str) -> SupplyBoundary:
    parts = text.split()
    try:
        if parts[0] == "neumann" and len(parts) == 1:
            return SupplyBoundary("neumann")
        if parts[0] == "constant" and len(parts) == 2:
            return SupplyBoundary("constant", value=float(parts[1]))
    except ValueError as exc:
        raise ConfigurationError(f"{where}: bad boundary numbers in {text!r}") from exc
    raise ConfigurationError(
        f"{where}: expected 'neumann' or 'constant S0', got {text!r}"
    )


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _parse_link(cp: configparser.ConfigParser, sec: str) -> LinkSpec:
    if not cp.has_section(sec):
        raise ConfigurationError(f"missing section [{sec}]")
    get = cp[sec].get
    family = get("family")
    if family is None:
        raise ConfigurationError(f"[{sec}]: missing 'family'")
    try:
        length = float(get("length", "10"))
        cells = int(get("cells", "160"))
        params = _floats(get("params", ""))
    except ValueError as exc:
        raise ConfigurationError(f"[{sec}]: {exc}") from exc
    if length <= 0 or cells < 1:
        raise ConfigurationError(f"[{sec}]: length must be > 0 and cells >= 1")
    initial_density = None
    initial_state = None
    if "initial_state" in cp[sec]:
        vals = _floats(get("initial_state"))
        if len(vals) != 2:
            raise ConfigurationError(f"[{sec}]: initial_state needs two values D, S")
        initial_state = vals
    else:
        initial_density = float(get("initial_density", "0"))
    spec = LinkSpec(
        family=family,
        params=params,
        length=length,
        cells=cells,
        initial_density=initial_density,
        initial_state=initial_state,
    )
    fd = spec.diagram()  # validates family/params
    spec.initial(fd)     # validates the initial condition against the diagram
    return spec


def loads_scenario(text: str) -> Scenario:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc
    if not cp.sections():
        raise ConfigurationError("empty scenario file")

    links = tuple(_parse_link(cp, f"link{i}") for i in (1, 2, 3))

    if not cp.has_section("model"):
        raise ConfigurationError("missing section [model]")
    spec: dict = {"model": cp["model"].get("kind", cp["model"].get("model", ""))}
    if "alpha" in cp["model"]:
        alpha = _floats(cp["model"]["alpha"])
        if len(alpha) != 2:
            raise ConfigurationError("[model]: alpha needs two values")
        if abs(sum(alpha) - 1.0) > 1e-12:
            raise ConfigurationError("[model]: alpha must sum to 1")
        # store exactly complementary proportions
        spec["alpha"] = (alpha[0], 1.0 - alpha[0])
    if "gamma" in cp["model"]:
        spec["gamma"] = float(cp["model"]["gamma"])
    try:
        model = model_from_spec(spec)
    except Exception as exc:
        raise ConfigurationError(f"[model]: {exc}") from exc

    bc = cp["boundary"] if cp.has_section("boundary") else {}
    bc_up1 = _parse_demand_bc(bc.get("upstream1", "neumann"), "[boundary] upstream1")
    bc_up2 = _parse_demand_bc(bc.get("upstream2", "neumann"), "[boundary] upstream2")
    bc_down = _parse_supply_bc(bc.get("downstream", "neumann"), "[boundary] downstream")

    sim = cp["simulation"] if cp.has_section("simulation") else {}
    try:
        t_end = float(sim.get("t_end", "360"))
        cfl_factor = float(sim.get("cfl_factor", "0.9"))
        record_every = int(sim["record_every"]) if "record_every" in sim else None
        seed = int(sim.get("seed", "0"))
    except ValueError as exc:
        raise ConfigurationError(f"[simulation]: {exc}") from exc
    if t_end <= 0:
        raise ConfigurationError("[simulation]: t_end must be positive")
    if not (0.0 < cfl_factor <= 1.0):
        raise ConfigurationError("[simulation]: cfl_factor must lie in (0, 1]")
    if record_every is not None and record_every < 1:
        raise ConfigurationError("[simulation]: record_every must be >= 1")

    out = cp["output"] if cp.has_section("output") else {}
    out_dir = out.get("directory", "out")

    return Scenario(
        links=links,
        model=model,
        bc_up1=bc_up1,
        bc_up2=bc_up2,
        bc_down=bc_down,
        t_end=t_end,
        cfl_factor=cfl_factor,
        record_every=record_every,
        out_dir=out_dir,
        seed=seed,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario file {path!r}: {exc}") from exc
    return loads_scenario(text)
