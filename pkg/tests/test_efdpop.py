"""Exact functional DPOP on trees."""
import math

import pytest

from fdcop import generators, model, oracles, runtime
from fdcop.engines.efdpop import SCALARS_PER_PIECE, utility_as_piecewise
from fdcop.errors import StructureError
from fdcop.model import ContinuousDomain
from fdcop.runtime import UTIL, EngineConfig, SYSTEM

from conftest import make_problem, quad


class TestUtilityAsPiecewise:
    def test_single_piece_evaluation(self):
        f = quad("x", "y", a=-1.0, b=2.0, c=-3.0, d=4.0, e=5.0, f0=6.0)
        pw = utility_as_piecewise(f, ContinuousDomain(-1, 1), ContinuousDomain(-2, 2))
        from fdcop import piecewise
        for vi, vj in ((0.0, 0.0), (1.0, -2.0), (-0.5, 1.5)):
            assert piecewise.evaluate(pw, {"x": vi, "y": vj}) == pytest.approx(
                f.evaluate(vi, vj))


class TestTwoNodeClosedForm:
    def test_concave_pair(self):
        # f(x,y) = -x^2 - y^2 + xy + 2x + 3y; unconstrained optimum from
        # solving the stationarity system: x = 7/3, y = 8/3, value 19/3
        p = make_problem([quad("x", "y", a=-1.0, c=-1.0, e=1.0, b=2.0, d=3.0)])
        result = runtime.run(p, "ef-dpop", EngineConfig())
        assert result.assignment["x"] == pytest.approx(7 / 3)
        assert result.assignment["y"] == pytest.approx(8 / 3)
        assert result.reported_optimum == pytest.approx(19 / 3)

    def test_boundary_optimum(self):
        # convex in both: optimum at a corner of the box
        p = make_problem([quad("x", "y", a=1.0, c=1.0, e=1.0)],
                         domains={"x": ContinuousDomain(-1, 1),
                                  "y": ContinuousDomain(-1, 1)})
        result = runtime.run(p, "ef-dpop", EngineConfig())
        assert abs(result.assignment["x"]) == pytest.approx(1.0)
        assert abs(result.assignment["y"]) == pytest.approx(1.0)
        assert result.reported_optimum == pytest.approx(3.0)


class TestAgainstFineGrid:
    @pytest.mark.parametrize("seed", range(10))
    def test_chain_and_trees(self, seed):
        p = generators.gen_tree(5, seed, concave=True)
        result = runtime.run(p, "ef-dpop", EngineConfig())
        utility = model.evaluate_solution(p, result.assignment)
        oracle = oracles.elimination_grid_optimum(p, 2001)
        assert utility >= oracle - 1e-6
        delta = model.gradient_bound(p).global_delta
        assert utility - oracle <= len(p.utilities) * 0.1 * delta

    def test_linear_utilities(self):
        p = make_problem([quad("x", "y", b=2.0, d=-3.0),
                          quad("y", "z", b=1.0, d=1.0)])
        result = runtime.run(p, "ef-dpop", EngineConfig())
        # all-linear: optimum at box corners, here x=100, y=-100, z=100
        assert result.assignment.values == {"x": 100.0, "y": -100.0, "z": 100.0}


class TestStructure:
    def test_rejects_cycles(self):
        p = make_problem([quad("x", "y", e=1.0), quad("y", "z", e=1.0),
                          quad("x", "z", e=1.0)])
        with pytest.raises(StructureError):
            runtime.run(p, "ef-dpop", EngineConfig())

    def test_message_sizes_are_piece_multiples(self):
        p = generators.gen_tree(8, 2, concave=True)
        result = runtime.run(p, "ef-dpop", EngineConfig())
        for _, sender, receiver, kind, size in result.kernel.trace:
            if kind == UTIL and receiver != SYSTEM:
                assert size % SCALARS_PER_PIECE == 0
                assert size > 0
