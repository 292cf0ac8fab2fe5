"""Command-line surface: riemann, simulate, compare, sweep, regions.

Exit codes: 0 success, 1 validation failure, 2 acceptance failure in
compare/sweep, 64 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import analysis, ctm, plots
from .errors import SdmergeError
from .models import MergeModel, ModelKind, optimal_total_flux
from .riemann import solve
from .scenario import Scenario, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ACCEPTANCE = 2
EXIT_USAGE = 64

_MACHINE_FMT = "%.17g"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(x: float) -> str:
    return _MACHINE_FMT % x


def _write_json(path: str, record: dict) -> None:
    def _round(obj):
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, (float, np.floating)):
            return float(_fmt(obj))
        if isinstance(obj, dict):
            return {k: _round(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [_round(v) for v in obj]
        return obj

    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_round(record), handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_trajectory_csv(traj: ctm.Trajectory, out_dir: str) -> None:
    with open(os.path.join(out_dir, "trajectory.csv"), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["time", "link_id", "cell_index", "density"])
        for snap, t in enumerate(traj.times):
            for link_id in (1, 2, 3):
                for m, rho in enumerate(traj.densities[link_id][snap], start=1):
                    writer.writerow([_fmt(t), link_id, m, _fmt(rho)])
    with open(os.path.join(out_dir, "junction_series.csv"), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["step", "time", "q1", "q2", "q3", "D1_boundary", "D2_boundary", "S3_boundary"]
        )
        for n in range(len(traj.q1)):
            writer.writerow(
                [
                    n,
                    _fmt(traj.step_times[n]),
                    _fmt(traj.q1[n]),
                    _fmt(traj.q2[n]),
                    _fmt(traj.q3[n]),
                    _fmt(traj.d1_boundary[n]),
                    _fmt(traj.d2_boundary[n]),
                    _fmt(traj.s3_boundary[n]),
                ]
            )


def _out_dir(scenario: Scenario, override: str | None) -> str:
    root = override or os.environ.get("SDMERGE_OUT") or scenario.out_dir
    os.makedirs(root, exist_ok=True)
    return root


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    if getattr(args, "cells", None):
        scenario = scenario.with_cells(args.cells)
    if getattr(args, "tend", None):
        from dataclasses import replace

        scenario = replace(scenario, t_end=args.tend)
    if getattr(args, "model", None):
        from dataclasses import replace

        scenario = replace(
            scenario, model=MergeModel(ModelKind(args.model), scenario.model.alpha)
        )
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace

        scenario = replace(scenario, seed=args.seed)
    return scenario


def _summary_fluxes(fluxes) -> str:
    return f"q1={fluxes.q1:.4f} q2={fluxes.q2:.4f} q3={fluxes.q3:.4f}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_riemann(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    out = _out_dir(scenario, args.out)
    problem = scenario.riemann_problem()
    solution = solve(problem)
    record = solution.describe(problem)
    _write_json(os.path.join(out, "riemann_solution.json"), record)
    print(f"region: {solution.region}")
    print(_summary_fluxes(solution.fluxes))
    for link_id, link in zip((1, 2, 3), solution.links):
        print(
            f"link {link_id}: stationary=({link.stationary.demand:.4f}, "
            f"{link.stationary.supply:.4f}) interior=({link.interior.demand:.4f}, "
            f"{link.interior.supply:.4f}) wave={link.wave.kind.value}"
        )
    print(f"wrote {out}/riemann_solution.json")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    out = _out_dir(scenario, args.out)
    network = scenario.build_network()
    traj = ctm.run(network, scenario.t_end, scenario.cfl_factor, scenario.record_every)
    _write_trajectory_csv(traj, out)
    plots.save_density_contours(traj, out)
    plots.save_flux_series(traj, out)
    with open(os.path.join(out, "scenario_normalized.cfg"), "w", encoding="utf-8") as fh:
        fh.write(scenario.normalized())
    print(f"simulated t={scenario.t_end:g} with cells={traj.cells}")
    print(f"final fluxes: q1={traj.q1[-1]:.4f} q2={traj.q2[-1]:.4f} q3={traj.q3[-1]:.4f}")
    print(f"wrote trajectory.csv, junction_series.csv and figures to {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    out = _out_dir(scenario, args.out)
    problem = scenario.riemann_problem()
    solution = solve(problem)
    network = scenario.build_network()
    traj = ctm.run(network, scenario.t_end, scenario.cfl_factor, scenario.record_every)
    fds = scenario.diagrams()
    report = analysis.compare_to_riemann(traj, solution, fds, tolerance=args.tolerance)
    _write_trajectory_csv(traj, out)
    _write_json(os.path.join(out, "riemann_solution.json"), solution.describe(problem))
    _write_json(os.path.join(out, "comparison_report.json"), report.describe())
    plots.save_flux_series(traj, out, exact=solution.fluxes.as_tuple())
    status = "PASS" if report.passed else "FAIL"
    print(f"comparison {status} (tolerance {args.tolerance:g})")
    print(f"exact:    {_summary_fluxes(solution.fluxes)}")
    print(
        "measured flux errors: "
        + " ".join(f"{e:.2e}" for e in report.flux_errors)
    )
    print(f"wrote report to {out}/comparison_report.json")
    return EXIT_OK if report.passed else EXIT_ACCEPTANCE


def _cmd_sweep(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    out = _out_dir(scenario, args.out)
    other = MergeModel(ModelKind(args.against), tuple(args.alpha))

    def run_pair(m: int):
        base = scenario.with_cells(m)
        traj_a = ctm.run(base.build_network(), base.t_end, base.cfl_factor)
        from dataclasses import replace

        alt = replace(base, model=other)
        traj_b = ctm.run(alt.build_network(), alt.t_end, alt.cfl_factor)
        return traj_a, traj_b

    table = analysis.convergence_study(run_pair, args.cells_list, args.t_probe)
    with open(os.path.join(out, "convergence.csv"), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["cells", "l1_difference"])
        for row in table.rows:
            writer.writerow([row.cells, _fmt(row.value)])
    plots.save_convergence(table.rows, args.t_probe, out)
    for row in table.rows:
        print(f"M={row.cells:5d}  l1={row.value:.6e}")
    status = "PASS" if table.monotone else "FAIL"
    print(f"monotone decrease: {status}")
    print(f"wrote convergence.csv to {out}")
    return EXIT_OK if table.monotone else EXIT_ACCEPTANCE


def _cmd_regions(args) -> int:
    model = MergeModel(ModelKind(args.model), tuple(args.alpha))
    c1, c2, c3 = args.capacities
    s3 = args.s3 if args.s3 is not None else c3
    n = args.grid
    os.makedirs(args.out, exist_ok=True)

    d1 = np.linspace(0.0, c1, n)
    d2 = np.linspace(0.0, c2, n)
    g1, g2 = np.meshgrid(d1, d2, indexing="ij")
    q1 = np.empty_like(g1)
    q2 = np.empty_like(g2)
    subopt = np.zeros(g1.shape, dtype=bool)
    path = os.path.join(args.out, "regions.csv")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["D1", "D2", "q1", "q2", "q3", "optimal_q3", "suboptimal"])
        for i in range(n):
            for j in range(n):
                flux = model.global_flux(g1[i, j], g2[i, j], s3, c1, c2, c3)
                q1[i, j], q2[i, j] = flux.q1, flux.q2
                best = optimal_total_flux(g1[i, j], g2[i, j], s3)
                sub = flux.q3 < best - 1e-12
                subopt[i, j] = sub
                writer.writerow(
                    [
                        _fmt(g1[i, j]),
                        _fmt(g2[i, j]),
                        _fmt(flux.q1),
                        _fmt(flux.q2),
                        _fmt(flux.q3),
                        _fmt(best),
                        int(sub),
                    ]
                )
    plots.save_regions(g1.ravel(), g2.ravel(), q1.ravel(), q2.ravel(),
                       subopt.ravel(), s3, args.out)
    n_sub = int(subopt.sum())
    print(f"tabulated {n * n} points at S3={s3:.4f}; suboptimal points: {n_sub}")
    print(f"wrote regions.csv and regions.png to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdmerge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("scenario", help="scenario config file")
        p.add_argument("--out", help="output directory (overrides scenario/env)")
        p.add_argument("--cells", type=int, help="override cells per link")
        p.add_argument("--tend", type=float, help="override simulation end time")
        p.add_argument("--model", choices=[k.value for k in ModelKind],
                       help="override merge model kind")
        p.add_argument("--seed", type=int, help="override RNG seed")

    add_common(sub.add_parser("riemann", help="exact Riemann solution"))
    add_common(sub.add_parser("simulate", help="run the CTM discretization"))

    p = sub.add_parser("compare", help="simulate and compare against the exact solution")
    add_common(p)
    p.add_argument("--tolerance", type=float, default=1e-2)

    p = sub.add_parser("sweep", help="grid-refinement study against a second model")
    add_common(p)
    p.add_argument("--against", default="priority_invariant",
                   choices=[k.value for k in ModelKind if k.value != "scaled_fair"])
    p.add_argument("--alpha", type=float, nargs=2, default=[0.8, 0.2])
    p.add_argument("--cells-list", type=int, nargs="+", default=[40, 80, 160])
    p.add_argument("--t-probe", type=float, default=180.0)

    p = sub.add_parser("regions", help="tabulate global fluxes over a (D1, D2) grid")
    p.add_argument("--model", default="fair",
                   choices=[k.value for k in ModelKind if k.value != "scaled_fair"])
    p.add_argument("--alpha", type=float, nargs=2, default=[0.5, 0.5])
    p.add_argument("--capacities", type=float, nargs=3,
                   default=[0.3365, 0.0841, 0.3365], metavar=("C1", "C2", "C3"))
    p.add_argument("--s3", type=float, default=None, help="fixed downstream supply")
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--out", default=os.environ.get("SDMERGE_OUT", "out"))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "riemann": _cmd_riemann,
        "simulate": _cmd_simulate,
        "compare": _cmd_compare,
        "sweep": _cmd_sweep,
        "regions": _cmd_regions,
    }
    try:
        return handlers[args.command](args)
    except SdmergeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
