import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from orgdyn import OrgParams, OrgState, SimOptions, analyze, eigen_structure, fixed_point, sample_orbits, simulate
from orgdyn.analysis import victory_check
from orgdyn.io import (
    DEFAULT_PALETTE,
    INCREASE,
    SUSTAIN,
    PortraitSpec,
    Scenario,
    ScenarioError,
    ScenarioInvariantError,
    _clip_line,
    parse_scenario,
    read_trajectory_csv,
    render_portrait,
    serialize_scenario,
    write_report,
    write_trajectory_csv,
)
from orgdyn.policy import CostModel
from orgdyn.simulate import Method

from conftest import saddle_params

BASIC = """\
# representative organization
[params]
p = 0.1
r = 0.25
m = 10   # leaders weigh ten foot soldiers
d = 0.3
b = 2
k = 5

[state.a]
L = 2
F = 20

[state.b]
L = 9
F = 3
"""

SVG = "{http://www.w3.org/2000/svg}"


class TestParse:
    def test_shorthand_d(self, rep):
        scn = parse_scenario(BASIC)
        assert scn.params == rep
        assert scn.labels == ["a", "b"]
        assert scn.states["b"] == OrgState(9, 3)
        assert scn.cost is None
        assert scn.sim == SimOptions()

    def test_missing_r(self):
        text = BASIC.replace("r = 0.25\n", "")
        with pytest.raises(ScenarioError, match="missing required parameter 'r'") as exc:
            parse_scenario(text)
        assert exc.value.line == 2 and exc.value.key == "r"

    def test_conflicting_d(self):
        text = BASIC.replace("d = 0.3\n", "d = 0.3\nd_L = 0.2\n")
        with pytest.raises(ScenarioError, match="conflicting") as exc:
            parse_scenario(text)
        assert exc.value.line == 7

    def test_split_rates(self):
        text = BASIC.replace("d = 0.3\n", "d_L = 0.2\nd_F = 0.4\n")
        p = parse_scenario(text).params
        assert (p.d_L, p.d_F) == (0.2, 0.4)

    @pytest.mark.parametrize("mutate, line, match", [
        (lambda t: t.replace("b = 2", "b = two"), 7, "not a number"),
        (lambda t: t.replace("[state.b]", "[weird]"), 14, "unknown section"),
        (lambda t: t.replace("b = 2", "q = 2"), 7, "unknown key"),
        (lambda t: t.replace("[state.b]", "[state.a]"), 14, "duplicate section"),
        (lambda t: t.replace("F = 3", "L = 3"), 16, "duplicate key"),
        (lambda t: t.replace("k = 5", "k 5"), 8, "key = value"),
        (lambda t: t.replace("b = 2", "b = inf"), 7, "finite"),
    ])
    def test_syntax_errors_carry_line(self, mutate, line, match):
        with pytest.raises(ScenarioError, match=match) as exc:
            parse_scenario(mutate(BASIC))
        assert exc.value.line == line
        assert not isinstance(exc.value, ScenarioInvariantError)

    @pytest.mark.parametrize("mutate, line", [
        (lambda t: t.replace("F = 3", "F = -3"), 16),
        (lambda t: t.replace("p = 0.1", "p = 0"), 3),
        (lambda t: t.replace("b = 2", "b = -2"), 7),
    ])
    def test_invariant_violations(self, mutate, line):
        with pytest.raises(ScenarioInvariantError) as exc:
            parse_scenario(mutate(BASIC))
        assert exc.value.line == line

    def test_simulate_and_cost_sections(self):
        text = BASIC + "\n[simulate]\nmethod = rk4\ndt = 0.05\nt_max = 30\nsample_every = 2\n" \
                       "\n[cost]\nc1 = 1\nc2 = 2\nsigma = 2\nB = 50\nunit_cost_b = 3\n"
        scn = parse_scenario(text)
        assert scn.sim == SimOptions(Method.RK4, 0.05, 30, 2)
        assert scn.cost == CostModel(1, 2, 2, 50)
        assert scn.unit_costs == (3.0, 1.0)

    def test_bad_simulate_values(self):
        with pytest.raises(ScenarioInvariantError):
            parse_scenario(BASIC + "[simulate]\ndt = 5\nt_max = 1\n")
        with pytest.raises(ScenarioError, match="method"):
            parse_scenario(BASIC + "[simulate]\nmethod = euler\n")

    def test_missing_params_section(self):
        with pytest.raises(ScenarioError, match=r"\[params\]"):
            parse_scenario("[state.a]\nL = 1\nF = 1\n")


class TestSerialize:
    def test_round_trip(self):
        scn = parse_scenario(BASIC + "[cost]\nc1 = 1\nc2 = 1\nsigma = 2\nB = 100\nunit_cost_k = 0.5\n")
        text = serialize_scenario(scn)
        again = parse_scenario(text)
        assert again == scn
        assert serialize_scenario(again) == text

    @given(saddle_params(), st.lists(st.tuples(st.floats(0, 1e3), st.floats(0, 1e3)), max_size=4))
    def test_idempotent(self, params, states):
        scn = Scenario(params, {f"s{i}": OrgState(L, F) for i, (L, F) in enumerate(states)})
        text = serialize_scenario(scn)
        assert parse_scenario(text) == scn
        assert serialize_scenario(parse_scenario(text)) == text


class TestTrajectoryCsv:
    def test_round_trip(self, rep):
        traj = simulate(rep, OrgState(9, 3), SimOptions(t_max=30))
        rows, outcome = read_trajectory_csv(write_trajectory_csv(traj))
        assert outcome == traj.outcome.value
        ref = np.c_[traj.times, traj.L, traj.F, traj.S]
        np.testing.assert_allclose(rows, ref, rtol=1e-11, atol=1e-300)

    def test_format(self, rep):
        traj = simulate(rep, OrgState(2, 20), SimOptions(t_max=30))
        lines = write_trajectory_csv(traj).splitlines()
        assert lines[0] == "t,L,F,S"
        assert lines[-1] == "# outcome=Collapsed"
        assert len(lines) == len(traj) + 2
        assert all(len(line.split(",")) == 4 for line in lines[1:-1])

    def test_bad_header(self):
        with pytest.raises(ValueError):
            read_trajectory_csv("a,b\n1,2\n")


class TestClip:
    def test_diagonal(self):
        (a, b), (c, d) = _clip_line((0.5, 0.5), (1, 1), (0, 1, 0, 1))
        assert (a, b, c, d) == (0, 0, 1, 1)

    def test_miss(self):
        assert _clip_line((5, 5), (1, 0), (0, 1, 0, 1)) is None

    def test_vertical(self):
        assert _clip_line((0.2, 7), (0, -2), (0, 1, 0, 1)) == ((0.2, 1.0), (0.2, 0.0))


class TestPortrait:
    def _spec(self, **kw):
        return PortraitSpec(bounds=(0, 20, 0, 150), **kw)

    def test_lines_and_arrows_without_orbits(self, rep):
        svg = render_portrait(analyze(rep), [], self._spec(grid=(20, 20)))
        root = ET.fromstring(svg.split("\n", 1)[1])
        lines = root.iter(f"{SVG}line")
        classes = [el.get("class") for el in lines]
        assert classes.count("arrow") == 400
        assert classes.count("manifold sink") == 1 and classes.count("manifold trend") == 1
        assert not list(root.iter(f"{SVG}path"))[1:]  # only the marker head

    def test_sink_line_geometry(self, rep):
        spec = self._spec()
        svg = render_portrait(analyze(rep), [], spec)
        el = next(e for e in ET.fromstring(svg.split("\n", 1)[1]).iter(f"{SVG}line")
                  if e.get("id") == "sink-line")
        x1, y1, x2, y2 = (float(el.get(a)) for a in ("x1", "y1", "x2", "y2"))
        # convert back to data coordinates and check the slope
        sx, sy = 500 / 20, 500 / 150
        slope = -(y2 - y1) / sy / ((x2 - x1) / sx)
        assert slope == pytest.approx(eigen_structure(rep).slope2, rel=1e-3)

    def test_deterministic(self, rep):
        trajs = sample_orbits(rep, [OrgState(2, 20), OrgState(9, 3)], SimOptions(t_max=20))
        spec = self._spec()
        assert render_portrait(analyze(rep), trajs, spec) == render_portrait(analyze(rep), trajs, spec)

    def test_eight_orbits_colored_by_class(self, rep):
        fp, eig = fixed_point(rep), eigen_structure(rep)
        # off the trend line too, so growing orbits are P- or R-type
        starts = [OrgState(fp.L_star + s * a * eig.e1[0] + 0.5 * eig.e2[0],
                           fp.F_star + s * a * eig.e1[1] + 0.5 * eig.e2[1])
                  for a in (0.2, 0.5, 1, 2) for s in (1, -1)]
        trajs = sample_orbits(rep, starts, SimOptions(t_max=30))
        svg = render_portrait(analyze(rep), trajs, self._spec())
        paths = re.findall(r'<path class="orbit (\w+)" d="[^"]*" stroke="([^"]+)" stroke-width="([^"]+)"', svg)
        assert len(paths) == 8
        for (kind, color, width), traj in zip(paths, trajs):
            assert kind == traj.classification.kind.value
            assert (color, float(width)) == DEFAULT_PALETTE[kind]
        kinds = {k for k, _, _ in paths}
        assert "Defeated" in kinds and kinds & {"PType", "RType"}

    def test_layers(self, rep):
        svg = render_portrait(analyze(rep), [], self._spec(layers=frozenset({"isostrength", "sink"})))
        assert 'class="arrow"' not in svg and "trend-line" not in svg
        assert svg.count('class="isostrength"') >= 1

    def test_non_saddle_has_no_lines(self):
        params = OrgParams.uniform(p=0.1, r=0.25, m=10, b=2, k=5, d=0.9)
        svg = render_portrait(analyze(params), [], self._spec())
        assert "manifold" not in svg

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            PortraitSpec(bounds=(0, 0, 0, 1))
        with pytest.raises(ValueError):
            PortraitSpec(bounds=(0, 1, 0, 1), layers=frozenset({"stars"}))
        pal = dict(DEFAULT_PALETTE, PType=DEFAULT_PALETTE["Defeated"])
        with pytest.raises(ValueError):
            PortraitSpec(bounds=(0, 1, 0, 1), palette=pal)


class TestReport:
    def test_recommendations(self, rep):
        verdicts = [(lbl, victory_check(rep, s)) for lbl, s in (("a", OrgState(2, 20)), ("b", OrgState(9, 3)))]
        text = write_report(analyze(rep), verdicts)
        assert "Saddle" in text
        assert "slope = -3.90388" in text
        a, b = text.split("State a")[1].split("State b")
        assert SUSTAIN in a and INCREASE not in a
        assert INCREASE in b

    def test_sink_collapse_short_circuit(self):
        params = OrgParams.uniform(p=0.1, r=0.25, m=10, b=2, k=5, d=0.9)
        text = write_report(analyze(params))
        assert "collapses for all initial conditions" in text
        assert "Sink line" not in text

    def test_color_only_on_request(self, rep):
        assert "\033[" not in write_report(analyze(rep))
        assert "\033[1m" in write_report(analyze(rep), color=True)
