"""Shared machinery for the DPOP-family engines: domain discretization,
closed-form 1-D maximization, and the UTIL/VALUE message schedule."""
from __future__ import annotations

from ..errors import ArgumentError
from ..model import ContinuousDomain, QuadraticBinaryUtility
from ..runtime import SYSTEM, UTIL, VALUE, Kernel
from ..pseudotree import PseudoTree


def discretize(domain: ContinuousDomain, d: int) -> list[float]:
    """d evenly spaced points including both endpoints; the midpoint for d=1."""
    if d < 1:
        raise ArgumentError(f"point count must be at least 1, got {d}")
    if d == 1:
        return [domain.lb + domain.width / 2.0]
    step = domain.width / (d - 1)
    points = [domain.lb + i * step for i in range(d - 1)]
    points.append(domain.ub)
    return points


def argmax_quadratic_1d(c2: float, c1: float, lo: float, hi: float) -> float:
    """Maximizer of c2*x^2 + c1*x over [lo, hi]; ties go to the smaller point."""
    candidates = [lo, hi]
    if c2 < 0.0:
        vertex = -c1 / (2.0 * c2)
        if lo < vertex < hi:
            candidates.append(vertex)
    best_x, best_v = None, None
    for x in sorted(candidates):
        v = c2 * x * x + c1 * x
        if best_v is None or v > best_v:
            best_x, best_v = x, v
    return best_x


def best_own_response(utilities: list[QuadraticBinaryUtility], var: str,
                      fixed: dict[str, float], domain: ContinuousDomain) -> float:
    """Closed-form maximizer over `var` of the summed utilities, with every
    other scoped variable pinned by `fixed`."""
    c2 = 0.0
    c1 = 0.0
    for f in utilities:
        other_val = fixed[f.other_var(var)]
        if var == f.first_var:
            c2 += f.coeff_a
            c1 += f.coeff_b + f.coeff_e * other_val
        else:
            c2 += f.coeff_c
            c1 += f.coeff_d + f.coeff_e * other_val
    return argmax_quadratic_1d(c2, c1, domain.lb, domain.ub)


def util_value_protocol(kernel: Kernel, tree: PseudoTree, util_fn, value_fn):
    """Run the two DPOP phases over the kernel.

    util_fn(var, child_payloads) returns (payload, scalar_size) for non-root
    agents and the reported optimum (a float) at the root. value_fn(var,
    sep_values) returns the agent's own value. Exactly 2|X| messages are
    exchanged: every agent's UTIL goes up (the root reports its optimum to the
    system endpoint) and every agent receives exactly one VALUE (the root's
    comes from the system kick-off).
    """
    kernel.phase("util")
    optimum = None
    for var in tree.post_order():
        msgs = kernel.collect(var, UTIL)
        child_payloads = sorted(((m.sender, m.payload) for m in msgs), key=lambda p: p[0])
        if var == tree.root:
            optimum = util_fn(var, child_payloads)
            kernel.send(var, SYSTEM, UTIL, {"optimum": optimum}, 1)
        else:
            payload, size = util_fn(var, child_payloads)
            kernel.send(var, tree.parent[var], UTIL, payload, size)

    kernel.phase("value")
    kernel.send(SYSTEM, tree.root, VALUE, {}, 0)
    values: dict[str, float] = {}
    for var in tree.pre_order():
        msg = kernel.collect(var, VALUE)[0]
        sep_values = dict(msg.payload)
        own = value_fn(var, sep_values)
        values[var] = own
        known = dict(sep_values)
        known[var] = own
        for child in tree.children[var]:
            payload = {w: known[w] for w in sorted(tree.separator[child])}
            kernel.send(var, child, VALUE, payload, len(payload))
    return values, optimum
