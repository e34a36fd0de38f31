"""Problem representation, bound calculators, and serialization."""
import math
import random

import pytest

from fdcop import model
from fdcop.errors import (
    ArgumentError,
    IncompleteSolutionError,
    InfeasibleValueError,
    ValidationError,
)
from fdcop.model import Assignment, ContinuousDomain, QuadraticBinaryUtility

from conftest import make_problem, quad


class TestContinuousDomain:
    def test_width_and_contains(self):
        dom = ContinuousDomain(-2.0, 3.0)
        assert dom.width == 5.0
        assert dom.contains(-2.0) and dom.contains(3.0) and dom.contains(0.0)
        assert not dom.contains(3.0001)

    def test_clamp(self):
        dom = ContinuousDomain(0.0, 1.0)
        assert dom.clamp(-5.0) == 0.0
        assert dom.clamp(0.5) == 0.5
        assert dom.clamp(2.0) == 1.0

    def test_rejects_degenerate(self):
        with pytest.raises(ValidationError):
            ContinuousDomain(1.0, 1.0)
        with pytest.raises(ValidationError):
            ContinuousDomain(2.0, 1.0)
        with pytest.raises(ValidationError):
            ContinuousDomain(0.0, math.inf)


class TestQuadraticBinaryUtility:
    def test_evaluate_matches_formula(self):
        f = quad("x", "y", a=1.0, b=2.0, c=3.0, d=4.0, e=5.0, f0=6.0)
        vi, vj = 1.5, -2.0
        expected = (1.0 * vi * vi + 2.0 * vi + 3.0 * vj * vj
                    + 4.0 * vj + 5.0 * vi * vj + 6.0)
        assert f.evaluate(vi, vj) == expected
        assert f.value_at({"x": vi, "y": vj}) == expected

    def test_partials(self):
        f = quad("x", "y", a=1.0, b=2.0, c=3.0, d=4.0, e=5.0)
        assert f.partial("x", 1.0, 2.0) == 2.0 * 1.0 + 2.0 + 5.0 * 2.0
        assert f.partial("y", 1.0, 2.0) == 6.0 * 2.0 + 4.0 + 5.0 * 1.0
        with pytest.raises(ArgumentError):
            f.partial("z", 0.0, 0.0)

    def test_is_linear(self):
        assert quad("x", "y", b=1.0, d=2.0).is_linear()
        assert not quad("x", "y", e=1.0).is_linear()

    def test_other_var(self):
        f = quad("x", "y", e=1.0)
        assert f.other_var("x") == "y"
        assert f.other_var("y") == "x"
        with pytest.raises(ArgumentError):
            f.other_var("z")

    def test_rejects_self_loop_and_nonfinite(self):
        with pytest.raises(ValidationError):
            quad("x", "x", e=1.0)
        with pytest.raises(ValidationError):
            quad("x", "y", a=math.nan)


class TestProblemValidation:
    def test_duplicate_pair_rejected(self):
        with pytest.raises(ValidationError):
            make_problem([quad("x", "y", e=1.0), quad("y", "x", e=2.0)])

    def test_disconnected_rejected(self):
        with pytest.raises(ValidationError):
            make_problem([quad("a", "b", e=1.0), quad("c", "d", e=1.0)])

    def test_owner_must_be_bijective(self):
        p = make_problem([quad("x", "y", e=1.0)])
        bad = model.Problem(agents=p.agents, variables=p.variables,
                            domains=p.domains, utilities=p.utilities,
                            owner={"x": "a_x", "y": "a_x"})
        with pytest.raises(ValidationError):
            bad.validate()


class TestEvaluateSolution:
    def test_zero_factor(self):
        p = make_problem([quad("x", "y", e=1.0)])
        assert model.evaluate_solution(p, Assignment({"x": 0.0, "y": 7.0})) == 0.0

    def test_direct_sum(self):
        p = make_problem([quad("x", "y", b=1.0, d=1.0),
                          quad("y", "z", b=1.0, d=1.0)])
        total = model.evaluate_solution(p, Assignment({"x": 1.0, "y": 2.0, "z": 3.0}))
        assert total == (1 + 2) + (2 + 3)

    def test_per_constraint_reevaluation(self):
        from fdcop import generators
        p = generators.gen_tree(20, 42)
        rng = random.Random(1)
        values = {v: rng.uniform(-100, 100) for v in p.variables}
        total = model.evaluate_solution(p, Assignment(values))
        assert len(p.utilities) == 19
        assert total == pytest.approx(sum(f.value_at(values) for f in p.utilities))

    def test_additive_partition(self):
        p = make_problem([quad("x", "y", a=-1.0, e=2.0),
                          quad("y", "z", c=-1.0, d=1.0),
                          quad("x", "z", b=3.0)])
        values = {"x": 1.0, "y": -2.0, "z": 3.0}
        part1 = sum(f.value_at(values) for f in p.utilities[:2])
        part2 = sum(f.value_at(values) for f in p.utilities[2:])
        assert model.evaluate_solution(p, Assignment(values)) == pytest.approx(part1 + part2)

    def test_errors(self):
        p = make_problem([quad("x", "y", e=1.0)])
        with pytest.raises(IncompleteSolutionError):
            model.evaluate_solution(p, Assignment({"x": 0.0}))
        with pytest.raises(InfeasibleValueError):
            model.evaluate_solution(p, Assignment({"x": 0.0, "y": 101.0}))


class TestConstraintGraph:
    def test_path(self):
        p = make_problem([quad("x1", "x2", e=1.0), quad("x2", "x3", e=1.0)])
        g = model.build_constraint_graph(p)
        assert sorted(g.nodes) == ["x1", "x2", "x3"]
        assert g.number_of_edges() == 2

    def test_edge_count_matches_utilities(self):
        from fdcop import generators
        p = generators.gen_graph(20, 0.2, 0)
        g = model.build_constraint_graph(p)
        assert g.number_of_edges() == len(p.utilities)


class TestGradientBound:
    def test_symmetric_corner(self):
        p = make_problem([quad("x", "y", a=1.0, c=1.0)],
                         domains={"x": ContinuousDomain(-1, 1),
                                  "y": ContinuousDomain(-1, 1)})
        assert model.gradient_bound(p).global_delta == 4.0

    def test_product_corner(self):
        p = make_problem([quad("x", "y", e=1.0)],
                         domains={"x": ContinuousDomain(0, 2),
                                  "y": ContinuousDomain(0, 2)})
        assert model.gradient_bound(p).global_delta == 4.0

    def test_mixed_case_41(self):
        # f(x,y) = -x^2 + 2xy + y on [0,10]^2; max corner value 41 at (10,0)
        p = make_problem([quad("x", "y", a=-1.0, e=2.0, d=1.0)],
                         domains={"x": ContinuousDomain(0, 10),
                                  "y": ContinuousDomain(0, 10)})
        assert model.gradient_bound(p).global_delta == pytest.approx(41.0)

    def test_dominates_sampled_gradients(self):
        rng = random.Random(7)
        for _ in range(20):
            f = quad("x", "y",
                     a=rng.uniform(-5, 5), b=rng.uniform(-5, 5),
                     c=rng.uniform(-5, 5), d=rng.uniform(-5, 5),
                     e=rng.uniform(-5, 5))
            p = make_problem([f])
            bound = model.gradient_bound(p).per_function[f]
            for _ in range(500):
                vi = rng.uniform(-100, 100)
                vj = rng.uniform(-100, 100)
                mag = abs(f.partial("x", vi, vj)) + abs(f.partial("y", vi, vj))
                assert mag <= bound + 1e-9


class TestErrorBounds:
    def test_discrete_direct(self):
        p = make_problem([quad("x", "y", e=1.0), quad("y", "z", e=1.0),
                          quad("x", "z", e=1.0)])
        delta = model.gradient_bound(p).global_delta
        assert model.error_bound_discrete(p, 2.0) == pytest.approx(3 * 2.0 * delta)

    def test_af_moves_zero_collapses(self):
        p = make_problem([quad("x", "y", a=-1.0, e=1.0)])
        assert model.error_bound_af(p, 1.5, 0, 0.5) == model.error_bound_discrete(p, 1.5)

    def test_af_monotone_in_moves(self):
        p = make_problem([quad("x", "y", a=-1.0, e=1.0), quad("y", "z", c=-1.0)])
        values = [model.error_bound_af(p, 1.0, k, 0.01) for k in (5, 10, 15, 20)]
        assert values == sorted(values)

    def test_argument_errors(self):
        p = make_problem([quad("x", "y", e=1.0)])
        with pytest.raises(ArgumentError):
            model.error_bound_discrete(p, 0.0)
        with pytest.raises(ArgumentError):
            model.error_bound_af(p, 1.0, -1, 0.1)
        with pytest.raises(ArgumentError):
            model.error_bound_af(p, 1.0, 1, 0.0)


class TestPredictedMessageCount:
    def test_formulas(self):
        from fdcop import generators
        p = generators.gen_graph(20, 0.2, 3)
        g = model.build_constraint_graph(p)
        assert model.predicted_message_count("dpop", g) == 40
        assert model.predicted_message_count("af-dpop", g) == 40
        assert model.predicted_message_count("hcms", g, 2) == 8 * g.number_of_edges()
        with pytest.raises(ArgumentError):
            model.predicted_message_count("hcms", g, 0)
        with pytest.raises(ArgumentError):
            model.predicted_message_count("nope", g)


class TestHypercubeSize:
    def test_three_points(self):
        p = make_problem([quad("x", "y", e=1.0)])
        assert model.hypercube_size(p, 3) == pytest.approx(100.0)

    def test_single_point_is_width(self):
        p = make_problem([quad("x", "y", e=1.0)])
        assert model.hypercube_size(p, 1) == pytest.approx(200.0)


class TestSerialization:
    def test_round_trip_exact(self):
        from fdcop import generators
        p = generators.gen_graph(8, 0.3, 5)
        q = model.loads(model.dumps(p))
        assert q.variables == p.variables
        assert q.agents == p.agents
        assert q.utilities == p.utilities
        assert q.domains == p.domains

    def test_file_round_trip(self, tmp_path):
        p = make_problem([quad("x", "y", a=-1.0 / 3.0, e=0.1)])
        path = tmp_path / "problem.json"
        model.save(p, path)
        assert model.load(path).utilities == p.utilities
