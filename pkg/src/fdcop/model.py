"""Problem representation: continuous domains, binary quadratic utilities,
solution evaluation, and the analytic bound calculators used by the
verification tooling."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import networkx as nx

from .errors import (
    ArgumentError,
    IncompleteSolutionError,
    InfeasibleValueError,
    ValidationError,
)

DPOP_FAMILY = ("dpop", "ef-dpop", "af-dpop", "caf-dpop")
ENGINE_KINDS = DPOP_FAMILY + ("hcms",)


@dataclass(frozen=True)
class ContinuousDomain:
    """Closed interval [lb, ub] a variable may take values in."""

    lb: float
    ub: float

    def __post_init__(self):
        if not (math.isfinite(self.lb) and math.isfinite(self.ub)):
            raise ValidationError(f"domain bounds must be finite, got [{self.lb}, {self.ub}]")
        if not self.lb < self.ub:
            raise ValidationError(f"domain must have lb < ub, got [{self.lb}, {self.ub}]")

    @property
    def width(self) -> float:
        return self.ub - self.lb

    def contains(self, value: float) -> bool:
        return self.lb <= value <= self.ub

    def clamp(self, value: float) -> float:
        return min(self.ub, max(self.lb, value))


@dataclass(frozen=True)
class QuadraticBinaryUtility:
    """f(x_i, x_j) = a*x_i^2 + b*x_i + c*x_j^2 + d*x_j + e*x_i*x_j + f0,
    with x_i = first_var and x_j = second_var."""

    first_var: str
    second_var: str
    coeff_a: float
    coeff_b: float
    coeff_c: float
    coeff_d: float
    coeff_e: float
    coeff_f0: float = 0.0

    def __post_init__(self):
        if self.first_var == self.second_var:
            raise ValidationError(f"utility must span two distinct variables, got {self.first_var!r} twice")
        for c in self.coeffs:
            if not math.isfinite(c):
                raise ValidationError(f"utility coefficients must be finite, got {self.coeffs}")

    @property
    def coeffs(self) -> tuple[float, ...]:
        return (self.coeff_a, self.coeff_b, self.coeff_c, self.coeff_d, self.coeff_e, self.coeff_f0)

    @property
    def scope(self) -> tuple[str, str]:
        return (self.first_var, self.second_var)

    def is_linear(self) -> bool:
        return self.coeff_a == 0.0 and self.coeff_c == 0.0 and self.coeff_e == 0.0

    def other_var(self, var: str) -> str:
        if var == self.first_var:
            return self.second_var
        if var == self.second_var:
            return self.first_var
        raise ArgumentError(f"{var!r} is not in the scope of this utility")

    def evaluate(self, vi: float, vj: float) -> float:
        """Evaluate at first_var = vi, second_var = vj."""
        a, b, c, d, e, f0 = self.coeffs
        return a * vi * vi + b * vi + c * vj * vj + d * vj + e * vi * vj + f0

    def value_at(self, values) -> float:
        """Evaluate from a mapping var -> value; argument order is canonicalized."""
        return self.evaluate(values[self.first_var], values[self.second_var])

    def partial(self, var: str, vi: float, vj: float) -> float:
        """Partial derivative with respect to `var` at (first=vi, second=vj)."""
        if var == self.first_var:
            return 2.0 * self.coeff_a * vi + self.coeff_b + self.coeff_e * vj
        if var == self.second_var:
            return 2.0 * self.coeff_c * vj + self.coeff_d + self.coeff_e * vi
        raise ArgumentError(f"{var!r} is not in the scope of this utility")


@dataclass(frozen=True)
class Assignment:
    """A complete or partial value assignment, variable -> real."""

    values: dict[str, float]

    def __getitem__(self, var: str) -> float:
        return self.values[var]


@dataclass(frozen=True)
class GradientBound:
    """Exact per-function maxima of |df/dx_i| + |df/dx_j| over the domain box."""

    per_function: dict[QuadraticBinaryUtility, float]
    global_delta: float


@dataclass(frozen=True)
class Problem:
    agents: tuple[str, ...]
    variables: tuple[str, ...]
    domains: dict[str, ContinuousDomain]
    utilities: tuple[QuadraticBinaryUtility, ...]
    owner: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if sorted(self.owner) != sorted(self.variables):
            raise ValidationError("owner map must cover exactly the declared variables")
        if sorted(set(self.owner.values())) != sorted(self.agents):
            raise ValidationError("owner map must be a bijection onto the agents")
        if len(set(self.owner.values())) != len(self.variables):
            raise ValidationError("each agent must own exactly one variable")
        for var in self.variables:
            if var not in self.domains:
                raise ValidationError(f"variable {var!r} has no domain")
        seen_pairs = set()
        for u in self.utilities:
            for var in u.scope:
                if var not in self.domains:
                    raise ValidationError(f"utility references undeclared variable {var!r}")
            pair = frozenset(u.scope)
            if pair in seen_pairs:
                raise ValidationError(f"duplicate utility over pair {sorted(pair)}")
            seen_pairs.add(pair)
        graph = build_constraint_graph(self)
        if len(self.variables) > 1 and not nx.is_connected(graph):
            raise ValidationError("constraint graph is disconnected")

    def utility_between(self, u: str, v: str) -> QuadraticBinaryUtility | None:
        for f in self.utilities:
            if {u, v} == set(f.scope):
                return f
        return None

    def utilities_of(self, var: str) -> tuple[QuadraticBinaryUtility, ...]:
        return tuple(f for f in self.utilities if var in f.scope)


def evaluate_solution(problem: Problem, assignment: Assignment) -> float:
    """Sum of all utilities at a complete, domain-feasible assignment."""
    for var in problem.variables:
        if var not in assignment.values:
            raise IncompleteSolutionError(f"assignment is missing variable {var!r}")
        if not problem.domains[var].contains(assignment.values[var]):
            raise InfeasibleValueError(
                f"value {assignment.values[var]} of {var!r} is outside "
                f"[{problem.domains[var].lb}, {problem.domains[var].ub}]"
            )
    return sum(f.value_at(assignment.values) for f in problem.utilities)


def build_constraint_graph(problem: Problem) -> nx.Graph:
    """Undirected simple graph with one node per variable and one edge per utility."""
    graph = nx.Graph()
    graph.add_nodes_from(sorted(problem.variables))
    for f in problem.utilities:
        graph.add_edge(f.first_var, f.second_var)
    return graph


def gradient_bound(problem: Problem) -> GradientBound:
    """Per-function max of |df/dx_i| + |df/dx_j| over the domain box.

    Each partial is affine, so the max of the sum of absolute values is
    attained at a corner of the box; all four corners are checked.
    """
    per_function = {}
    for f in problem.utilities:
        di = problem.domains[f.first_var]
        dj = problem.domains[f.second_var]
        best = 0.0
        for vi, vj in itertools.product((di.lb, di.ub), (dj.lb, dj.ub)):
            mag = abs(f.partial(f.first_var, vi, vj)) + abs(f.partial(f.second_var, vi, vj))
            best = max(best, mag)
        per_function[f] = best
    global_delta = max(per_function.values()) if per_function else 0.0
    return GradientBound(per_function=per_function, global_delta=global_delta)


def error_bound_discrete(problem: Problem, m: float) -> float:
    """|F| * m * delta, the discretization error bound for grid-based DPOP."""
    if m <= 0:
        raise ArgumentError(f"hypercube size m must be positive, got {m}")
    delta = gradient_bound(problem).global_delta
    return len(problem.utilities) * m * delta


def error_bound_af(problem: Problem, m: float, moves: int, alpha: float) -> float:
    """|F| * (m + |A|*moves*alpha*delta) * delta, the gradient-move error bound."""
    if m <= 0:
        raise ArgumentError(f"hypercube size m must be positive, got {m}")
    if moves < 0:
        raise ArgumentError(f"moves must be nonnegative, got {moves}")
    if alpha <= 0:
        raise ArgumentError(f"alpha must be positive, got {alpha}")
    delta = gradient_bound(problem).global_delta
    return len(problem.utilities) * (m + len(problem.agents) * moves * alpha * delta) * delta


def predicted_message_count(engine_kind: str, graph: nx.Graph, iterations: int = 1) -> int:
    """Analytic message totals: 4*iterations*|E| for hcms, 2*|X| otherwise."""
    if engine_kind == "hcms":
        if iterations < 1:
            raise ArgumentError(f"hcms needs at least one iteration, got {iterations}")
        return 4 * iterations * graph.number_of_edges()
    if engine_kind in DPOP_FAMILY:
        return 2 * graph.number_of_nodes()
    raise ArgumentError(f"unknown engine kind {engine_kind!r}")


def discretization_gap(domain: ContinuousDomain, d: int) -> float:
    """Distance between adjacent grid points; the full width for a single point."""
    if d < 1:
        raise ArgumentError(f"point count must be at least 1, got {d}")
    if d == 1:
        return domain.width
    return domain.width / (d - 1)


def hypercube_size(problem: Problem, d: int) -> float:
    """Max discretization gap across variables (the m of the error bounds)."""
    return max(discretization_gap(problem.domains[v], d) for v in problem.variables)


# --- serialization -----------------------------------------------------------

def problem_to_dict(problem: Problem) -> dict:
    return {
        "agents": list(problem.agents),
        "variables": [
            {
                "id": var,
                "agent": problem.owner[var],
                "lb": problem.domains[var].lb,
                "ub": problem.domains[var].ub,
            }
            for var in problem.variables
        ],
        "constraints": [
            {"scope": [f.first_var, f.second_var], "coeffs": list(f.coeffs)}
            for f in problem.utilities
        ],
    }


def problem_from_dict(doc: dict) -> Problem:
    agents = tuple(doc["agents"])
    variables = tuple(entry["id"] for entry in doc["variables"])
    domains = {entry["id"]: ContinuousDomain(entry["lb"], entry["ub"]) for entry in doc["variables"]}
    owner = {entry["id"]: entry["agent"] for entry in doc["variables"]}
    utilities = tuple(
        QuadraticBinaryUtility(entry["scope"][0], entry["scope"][1], *entry["coeffs"])
        for entry in doc["constraints"]
    )
    problem = Problem(agents=agents, variables=variables, domains=domains,
                      utilities=utilities, owner=owner)
    problem.validate()
    return problem


def dumps(problem: Problem) -> str:
    # json uses repr-style shortest round-trip floats, so numbers survive exactly
    return json.dumps(problem_to_dict(problem), indent=2)


def loads(text: str) -> Problem:
    return problem_from_dict(json.loads(text))


def save(problem: Problem, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(problem))
        fh.write("\n")


def load(path) -> Problem:
    with open(path) as fh:
        return loads(fh.read())
