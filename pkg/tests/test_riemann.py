"""Exact merge Riemann solutions: fluxes, stationary/interior states, waves."""

import pytest

from sdmerge import (
    FundamentalDiagram,
    MergeModel,
    ModelKind,
    RiemannProblem,
    SDState,
    Side,
    WaveKind,
    check_admissible_interior,
    check_admissible_stationary,
    classify_wave,
    fixed_point_oracle,
    solve,
    state_of_density,
    stationary_from_flux,
)
from sdmerge.errors import (
    InadmissibleFluxError,
    UnsupportedDiagramError,
    UnsupportedModelError,
)

MAINLINE = FundamentalDiagram.del_castillo_mainline()
RAMP = FundamentalDiagram.del_castillo_ramp()
C1, C2, C3 = MAINLINE.capacity, RAMP.capacity, MAINLINE.capacity


def merge_problem(model, rho1=0.35, rho2=0.1, rho3=0.35):
    return RiemannProblem(
        model,
        MAINLINE,
        RAMP,
        MAINLINE,
        state_of_density(MAINLINE, rho1),
        state_of_density(RAMP, rho2),
        state_of_density(MAINLINE, rho3),
    )


class TestStationaryFromFlux:
    def test_upstream_flux_below_demand_queues(self):
        stat = stationary_from_flux(0.2, 0.3, C1, C1, Side.UPSTREAM)
        assert stat == SDState(C1, 0.2)

    def test_upstream_flux_equals_demand(self):
        stat = stationary_from_flux(0.3, 0.3, C1, C1, Side.UPSTREAM)
        assert stat == SDState(0.3, C1)

    def test_downstream_flux_below_supply_clears(self):
        stat = stationary_from_flux(0.1, C3, 0.25, C3, Side.DOWNSTREAM)
        assert stat == SDState(0.1, C3)

    def test_downstream_flux_equals_supply(self):
        stat = stationary_from_flux(0.25, C3, 0.25, C3, Side.DOWNSTREAM)
        assert stat == SDState(C3, 0.25)

    def test_excess_flux_rejected(self):
        with pytest.raises(InadmissibleFluxError):
            stationary_from_flux(0.31, 0.3, C1, C1, Side.UPSTREAM)
        with pytest.raises(InadmissibleFluxError):
            stationary_from_flux(0.3, C3, 0.25, C3, Side.DOWNSTREAM)


class TestAdmissibility:
    def test_stationary_upstream_forms(self):
        init = SDState(0.3, C1)
        assert check_admissible_stationary(SDState(0.3, C1), init, C1, Side.UPSTREAM)
        assert check_admissible_stationary(SDState(C1, 0.2), init, C1, Side.UPSTREAM)
        # over-critical with supply above the initial demand is not admissible
        assert not check_admissible_stationary(
            SDState(C1, 0.32), init, C1, Side.UPSTREAM
        )

    def test_stationary_downstream_forms(self):
        init = SDState(C3, 0.25)
        assert check_admissible_stationary(SDState(C3, 0.25), init, C3, Side.DOWNSTREAM)
        assert check_admissible_stationary(SDState(0.1, C3), init, C3, Side.DOWNSTREAM)
        assert not check_admissible_stationary(
            SDState(0.3, C3), init, C3, Side.DOWNSTREAM
        )

    def test_interior_pinned_when_stationary_soc(self):
        stat = SDState(C1, 0.2)
        assert check_admissible_interior(stat, stat, C1, Side.UPSTREAM)
        assert not check_admissible_interior(
            SDState(C1, 0.25), stat, C1, Side.UPSTREAM
        )

    def test_interior_free_when_stationary_uc(self):
        stat = SDState(0.3, C1)
        assert check_admissible_interior(SDState(0.32, C1), stat, C1, Side.UPSTREAM)
        assert not check_admissible_interior(SDState(C1, 0.2), stat, C1, Side.UPSTREAM)

    def test_interior_tolerance_parameter(self):
        stat = SDState(C3, C3)
        near = SDState(C3 - 1e-8, C3)
        assert not check_admissible_interior(near, stat, C3, Side.DOWNSTREAM)
        assert check_admissible_interior(near, stat, C3, Side.DOWNSTREAM, tol=1e-6)


class TestWaveClassification:
    def test_no_wave(self):
        fan = classify_wave(MAINLINE, 0.3, 0.3)
        assert fan.kind is WaveKind.NONE

    def test_shock_speed_rankine_hugoniot(self):
        fan = classify_wave(MAINLINE, 0.3, 0.9)
        expected = (MAINLINE.flow(0.9) - MAINLINE.flow(0.3)) / 0.6
        assert fan.kind is WaveKind.SHOCK
        assert fan.speed == pytest.approx(expected)

    def test_greenshields_shock_exact(self):
        fd = FundamentalDiagram.greenshields(v_f=1.0, rho_j=1.0)
        # Q = rho(1-rho): sigma = 1 - rho_l - rho_r
        fan = classify_wave(fd, 0.2, 0.5)
        assert fan.speed == pytest.approx(0.3)

    def test_rarefaction_fan_speeds(self):
        fan = classify_wave(MAINLINE, 0.9, 0.3)
        assert fan.kind is WaveKind.RAREFACTION
        assert fan.speed_lo == pytest.approx(MAINLINE.char_speed(0.9))
        assert fan.speed_hi == pytest.approx(MAINLINE.char_speed(0.3))
        assert fan.speed_lo < fan.speed_hi


class TestFairSolution:
    """Both inflows exceed the downstream supply; queues form."""

    def test_reference_fluxes(self):
        sol = solve(merge_problem(MergeModel(ModelKind.FAIR)))
        assert sol.fluxes.q1 == pytest.approx(0.2865, abs=1e-4)
        assert sol.fluxes.q2 == pytest.approx(0.0500, abs=1e-4)
        assert sol.fluxes.q3 == pytest.approx(0.3365, abs=1e-4)
        assert sol.region == "fair-4"

    def test_link1_queues_with_backward_shock(self):
        sol = solve(merge_problem(MergeModel(ModelKind.FAIR)))
        link = sol.link1
        assert link.stationary.demand == pytest.approx(C1)
        assert link.stationary.supply == pytest.approx(0.2865, abs=1e-4)
        assert link.wave.kind is WaveKind.SHOCK
        assert link.wave.speed == pytest.approx(-0.0557, abs=1e-4)

    def test_link2_keeps_flowing_with_inflated_interior(self):
        sol = solve(merge_problem(MergeModel(ModelKind.FAIR)))
        link = sol.link2
        assert link.wave.kind is WaveKind.NONE
        assert link.stationary.demand == pytest.approx(0.0500, abs=1e-4)
        # interior demand inflated so the proportional split reproduces q2 = D2
        assert link.interior.demand == pytest.approx(0.0587, abs=1e-4)
        assert link.interior.demand > link.stationary.demand

    def test_link3_saturates_with_rarefaction(self):
        sol = solve(merge_problem(MergeModel(ModelKind.FAIR)))
        link = sol.link3
        assert link.stationary.demand == pytest.approx(C3)
        assert link.stationary.supply == pytest.approx(C3)
        assert link.wave.kind is WaveKind.RAREFACTION
        assert link.wave.speed_lo == pytest.approx(0.0, abs=1e-6)

    def test_free_flow_case_passes_demands(self):
        sol = solve(merge_problem(MergeModel(ModelKind.FAIR), rho1=0.1, rho2=0.05, rho3=0.1))
        assert sol.fluxes.q1 == pytest.approx(MAINLINE.flow(0.1), abs=1e-12)
        assert sol.fluxes.q2 == pytest.approx(RAMP.flow(0.05), abs=1e-12)
        assert sol.region == "fair-1"
        for link in sol.links[:2]:
            assert link.wave.kind is WaveKind.NONE

    def test_balanced_case_flags_nonunique_interior(self):
        # D1 + D2 exactly equals S3 < C3 via an over-critical downstream state
        d1, d2 = 0.15, 0.05
        prob = RiemannProblem(
            MergeModel(ModelKind.FAIR),
            MAINLINE,
            RAMP,
            MAINLINE,
            SDState(d1, C1),
            SDState(d2, C2),
            SDState(C3, d1 + d2),
        )
        sol = solve(prob)
        assert sol.fluxes.q3 == pytest.approx(0.2)
        assert sol.region == "fair-2"
        assert not sol.link3.interior_unique


class TestOtherModels:
    def test_priority_favors_high_alpha_link(self):
        # alpha1 = 0.9 exceeds the mainline's capacity share C1/(C1+C2) = 0.8,
        # so the priority scheme grants link 1 more than the fair split does
        model = MergeModel(ModelKind.PRIORITY_INVARIANT, (0.9, 0.1))
        sol = solve(merge_problem(model))
        fair = solve(merge_problem(MergeModel(ModelKind.FAIR)))
        assert sol.fluxes.q1 > fair.fluxes.q1
        assert sol.fluxes.q3 == pytest.approx(fair.fluxes.q3, abs=1e-12)

    def test_constant_wastes_capacity(self):
        # alpha2 * S3 exceeds the ramp's whole capacity, so the mainline's
        # share is capped and the total flux falls short of the supply
        model = MergeModel(ModelKind.CONSTANT, (0.5, 0.5))
        sol = solve(merge_problem(model))
        assert sol.fluxes.q3 < solve(merge_problem(MergeModel(ModelKind.FAIR))).fluxes.q3

    def test_constant_interior_inflates_downstream_supply(self):
        model = MergeModel(ModelKind.CONSTANT, (0.5, 0.5))
        sol = solve(merge_problem(model))
        # link 2 stays under-critical: the local split needs extra room
        assert sol.link3.interior.supply > sol.link3.stationary.supply - 1e-12

    def test_scaled_fair_has_no_closed_form(self):
        with pytest.raises(UnsupportedModelError):
            solve(merge_problem(MergeModel(ModelKind.SCALED_FAIR, gamma=0.9)))

    def test_solution_describe_is_serializable(self):
        import json

        prob = merge_problem(MergeModel(ModelKind.FAIR))
        rec = solve(prob).describe(prob)
        assert json.dumps(rec)
        assert rec["fluxes"]["q3"] == pytest.approx(0.3365, abs=1e-4)


class TestOracle:
    @pytest.mark.parametrize(
        "model",
        [
            MergeModel(ModelKind.FAIR),
            MergeModel(ModelKind.CONSTANT, (0.5, 0.5)),
            MergeModel(ModelKind.PRIORITY_INVARIANT, (0.8, 0.2)),
            MergeModel(ModelKind.CONSTANT_INVARIANT, (0.5, 0.5)),
        ],
    )
    def test_agrees_with_closed_form_on_reference_problem(self, model):
        prob = merge_problem(model)
        sol = solve(prob)
        oracle = fixed_point_oracle(model, prob)
        assert oracle.q1 == pytest.approx(sol.fluxes.q1, abs=2e-4 * C3)
        assert oracle.q2 == pytest.approx(sol.fluxes.q2, abs=2e-4 * C3)

    def test_free_flow_case(self):
        model = MergeModel(ModelKind.FAIR)
        prob = merge_problem(model, rho1=0.1, rho2=0.05, rho3=0.1)
        oracle = fixed_point_oracle(model, prob)
        assert oracle.q1 == pytest.approx(MAINLINE.flow(0.1), abs=2e-4 * C3)


def test_nonconcave_wave_rejected():
    fd = FundamentalDiagram(
        family="unknown", rho_jam=1.0, free_flow_speed=1.0, capacity=1.0
    )
    with pytest.raises(UnsupportedDiagramError):
        classify_wave(fd, 0.1, 0.2)
