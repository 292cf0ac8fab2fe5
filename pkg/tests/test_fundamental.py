"""Flow-density relations: capacity points, regime functions, inverses."""

import math

import numpy as np
import pytest

from sdmerge import FundamentalDiagram, diagram_from_spec
from sdmerge.errors import DomainError, InfeasibleFlowError

MAINLINE = FundamentalDiagram.del_castillo_mainline()
RAMP = FundamentalDiagram.del_castillo_ramp()


class TestCapacityPoint:
    def test_mainline_capacity(self):
        rho_c, cap = MAINLINE.locate_capacity()
        assert rho_c == pytest.approx(0.4876, abs=2e-4)
        assert cap == pytest.approx(0.3365, abs=1e-4)

    def test_ramp_capacity(self):
        rho_c, cap = RAMP.locate_capacity()
        assert rho_c == pytest.approx(0.2438, abs=1e-4)
        assert cap == pytest.approx(0.0841, abs=1e-4)

    def test_ramp_is_half_scale_mainline(self):
        # the 1-lane curve is the 2-lane curve scaled by 1/2 in both axes
        assert RAMP.critical_density == pytest.approx(MAINLINE.critical_density / 2, rel=1e-6)
        assert RAMP.capacity == pytest.approx(MAINLINE.capacity / 4, rel=1e-6)

    def test_triangular_capacity_exact(self):
        fd = FundamentalDiagram.triangular(v_f=1.0, w=0.2, rho_j=1.2)
        assert fd.critical_density == pytest.approx(0.2)
        assert fd.capacity == pytest.approx(0.2)

    def test_greenshields_capacity_exact(self):
        fd = FundamentalDiagram.greenshields(v_f=2.0, rho_j=1.0)
        assert fd.critical_density == 0.5
        assert fd.capacity == 0.5


class TestFlow:
    def test_mainline_reference_value(self):
        assert MAINLINE.flow(0.35) == pytest.approx(0.3131, abs=1e-4)

    def test_ramp_reference_value(self):
        assert RAMP.flow(0.1) == pytest.approx(0.0500, abs=1e-4)

    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_endpoints_vanish(self, fd):
        assert fd.flow(0.0) == 0.0
        assert fd.flow(fd.rho_jam) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_unimodal(self, fd):
        rho = np.linspace(1e-6, fd.rho_jam, 400)
        q = [fd.flow(r) for r in rho]
        peak = int(np.argmax(q))
        assert all(a <= b + 1e-12 for a, b in zip(q[: peak + 1], q[1 : peak + 1]))
        assert all(a >= b - 1e-12 for a, b in zip(q[peak:], q[peak + 1 :]))

    def test_out_of_range_density(self):
        with pytest.raises(DomainError):
            MAINLINE.flow(2.5)
        with pytest.raises(DomainError):
            MAINLINE.flow(-0.1)

    def test_vectorized_matches_scalar(self):
        rho = np.linspace(0.0, MAINLINE.rho_jam, 97)
        vec = MAINLINE.flow_array(rho)
        scalar = np.array([MAINLINE.flow(r) for r in rho])
        np.testing.assert_allclose(vec, scalar, rtol=0, atol=1e-15)


class TestDemandSupply:
    def test_demand_below_critical_equals_flow(self):
        assert MAINLINE.demand(0.35) == MAINLINE.flow(0.35)

    def test_demand_above_critical_is_capacity(self):
        assert MAINLINE.demand(0.8277) == MAINLINE.capacity

    def test_supply_above_critical_equals_flow(self):
        assert MAINLINE.supply(0.8277) == MAINLINE.flow(0.8277)

    def test_supply_below_critical_is_capacity(self):
        assert MAINLINE.supply(0.1) == MAINLINE.capacity

    def test_demand_zero(self):
        assert MAINLINE.demand(0.0) == 0.0
        assert RAMP.demand(0.0) == 0.0

    def test_supply_at_jam(self):
        assert MAINLINE.supply(MAINLINE.rho_jam) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_flux_is_min_of_demand_supply(self, fd):
        for rho in np.linspace(0.01, fd.rho_jam - 0.01, 50):
            assert min(fd.demand(rho), fd.supply(rho)) == pytest.approx(
                fd.flow(rho), abs=1e-12
            )

    def test_arrays_match_scalars(self):
        rho = np.linspace(0.0, RAMP.rho_jam, 41)
        np.testing.assert_allclose(
            RAMP.demand_array(rho), [RAMP.demand(r) for r in rho], atol=1e-15
        )
        np.testing.assert_allclose(
            RAMP.supply_array(rho), [RAMP.supply(r) for r in rho], atol=1e-15
        )


class TestInverses:
    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_demand_roundtrip(self, fd):
        for rho in np.linspace(0.01, fd.critical_density * 0.98, 25):
            assert fd.density_from_demand(fd.flow(rho)) == pytest.approx(rho, abs=1e-9)

    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_supply_roundtrip(self, fd):
        lo = fd.critical_density * 1.02
        for rho in np.linspace(lo, fd.rho_jam * 0.99, 25):
            assert fd.density_from_supply(fd.flow(rho)) == pytest.approx(rho, abs=1e-9)

    def test_greenshields_inverse_exact(self):
        fd = FundamentalDiagram.greenshields(v_f=1.0, rho_j=1.0)
        # Q(rho) = rho(1-rho): flow 0.21 -> rho = 0.3 under-critical, 0.7 over
        assert fd.density_from_demand(0.21) == pytest.approx(0.3, abs=1e-10)
        assert fd.density_from_supply(0.21) == pytest.approx(0.7, abs=1e-10)

    def test_infeasible_flow_raises(self):
        with pytest.raises(InfeasibleFlowError):
            MAINLINE.density_from_demand(MAINLINE.capacity * 1.1)
        with pytest.raises(InfeasibleFlowError):
            MAINLINE.density_from_supply(-0.01)


class TestCharSpeed:
    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_sign_change_at_critical(self, fd):
        assert fd.char_speed(fd.critical_density * 0.5) > 0
        assert fd.char_speed(fd.critical_density * 1.5) < 0

    @pytest.mark.parametrize("fd", [MAINLINE, RAMP])
    def test_matches_finite_difference(self, fd):
        h = 1e-7
        for rho in (0.1, 0.3, 0.7, 0.9 * fd.rho_jam):
            fdiff = (fd.flow(rho + h) - fd.flow(rho - h)) / (2 * h)
            assert fd.char_speed(rho) == pytest.approx(fdiff, abs=1e-6)

    def test_free_flow_limit(self):
        assert MAINLINE.char_speed(1e-9) == pytest.approx(1.0)
        assert RAMP.char_speed(1e-9) == pytest.approx(0.5)

    def test_triangular_two_speeds(self):
        fd = FundamentalDiagram.triangular(v_f=1.0, w=0.25, rho_j=1.0)
        assert fd.char_speed(0.1) == 1.0
        assert fd.char_speed(0.9) == -0.25


class TestSpecLoader:
    def test_builtin_families(self):
        assert diagram_from_spec("delcastillo_mainline").rho_jam == 2.0
        assert diagram_from_spec("delcastillo_ramp").rho_jam == 1.0
        fd = diagram_from_spec("triangular", [1.0, 0.2, 1.2])
        assert fd.capacity == pytest.approx(0.2)
        fd = diagram_from_spec("greenshields", [1.0, 1.0])
        assert fd.capacity == pytest.approx(0.25)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            diagram_from_spec("parabolic")

    def test_wrong_parameter_count(self):
        with pytest.raises(DomainError):
            diagram_from_spec("triangular", [1.0])

    def test_describe_fields(self):
        rec = MAINLINE.describe()
        assert rec["jam_density"] == 2.0
        assert math.isclose(rec["capacity"], MAINLINE.capacity)
