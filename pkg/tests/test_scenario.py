"""Scenario config files: parsing, validation, canonical round-trip."""

import pytest

from sdmerge import ModelKind, Scenario, load_scenario, loads_scenario
from sdmerge.errors import ConfigurationError

GOOD = """
[link1]
family = delcastillo_mainline
length = 10
cells = 160
initial_density = 0.35

[link2]
family = delcastillo_ramp
length = 10
cells = 160
initial_density = 0.10

[link3]
family = delcastillo_mainline
length = 10
cells = 160
initial_density = 0.35

[model]
kind = fair

[boundary]
upstream1 = neumann
upstream2 = periodic 0.05 0.03 60
downstream = constant 0.2

[simulation]
t_end = 360
cfl_factor = 0.9

[output]
directory = out/example
"""


class TestLoading:
    def test_good_scenario(self):
        sc = loads_scenario(GOOD)
        assert sc.model.kind is ModelKind.FAIR
        assert sc.links[0].cells == 160
        assert sc.bc_up2.kind == "periodic"
        assert sc.bc_down.value == 0.2
        assert sc.t_end == 360.0

    def test_initial_state_alternative(self):
        from sdmerge import FundamentalDiagram

        cap = FundamentalDiagram.del_castillo_ramp().capacity
        text = GOOD.replace(
            "initial_density = 0.10", f"initial_state = 0.05, {cap!r}"
        )
        sc = loads_scenario(text)
        rho, state = sc.links[1].initial(sc.links[1].diagram())
        assert state.demand == 0.05
        assert 0.0 < rho < sc.links[1].diagram().critical_density

    def test_model_with_alpha(self):
        text = GOOD.replace("kind = fair", "kind = priority_invariant\nalpha = 0.8, 0.2")
        sc = loads_scenario(text)
        assert sc.model.alpha[0] == 0.8
        assert sc.model.alpha[1] == pytest.approx(0.2)
        assert sum(sc.model.alpha) == 1.0

    def test_file_loader(self, tmp_path):
        path = tmp_path / "s.cfg"
        path.write_text(GOOD)
        assert isinstance(load_scenario(str(path)), Scenario)

    def test_missing_file(self):
        with pytest.raises(ConfigurationError):
            load_scenario("/nonexistent/path.cfg")


class TestValidation:
    @pytest.mark.parametrize(
        "bad,repl",
        [
            ("kind = fair", "kind = greedy"),
            ("t_end = 360", "t_end = -1"),
            ("cfl_factor = 0.9", "cfl_factor = 1.5"),
            ("family = delcastillo_ramp", "family = mystery"),
            ("upstream2 = periodic 0.05 0.03 60", "upstream2 = periodic 0.05"),
            ("initial_density = 0.35", "initial_density = 9.0"),
        ],
    )
    def test_rejects_bad_field(self, bad, repl):
        with pytest.raises((ConfigurationError, Exception)):
            loads_scenario(GOOD.replace(bad, repl, 1))

    def test_alpha_must_sum_to_one(self):
        text = GOOD.replace("kind = fair", "kind = constant\nalpha = 0.6, 0.6")
        with pytest.raises(ConfigurationError):
            loads_scenario(text)

    def test_missing_section(self):
        text = GOOD.replace("[link2]", "[linkX]")
        with pytest.raises(ConfigurationError):
            loads_scenario(text)

    def test_empty_file(self):
        with pytest.raises(ConfigurationError):
            loads_scenario("")


class TestRoundTrip:
    def test_normalized_reloads_equal(self):
        sc = loads_scenario(GOOD)
        again = loads_scenario(sc.normalized())
        assert again == sc

    def test_with_cells(self):
        sc = loads_scenario(GOOD).with_cells(40)
        assert all(spec.cells == 40 for spec in sc.links)

    def test_bundled_scenarios_load(self):
        import os

        root = os.path.join(os.path.dirname(__file__), "..", "scenarios")
        for name in os.listdir(root):
            sc = load_scenario(os.path.join(root, name))
            assert loads_scenario(sc.normalized()) == sc
