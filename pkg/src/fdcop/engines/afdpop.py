"""Approximate functional DPOP and its clustered variant.

UTIL tables hold scattered value tuples whose coordinates are iteratively
moved along utility gradients; tables from different children are aligned by
interpolation before joining, and the VALUE phase interpolates utilities at
off-grid ancestor values. The clustered variant compresses each outgoing
table to k representative rows via k-means while keeping the full table
locally.
"""
from __future__ import annotations

import itertools
import math
import random
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, CapacityError, ProtocolError
from ..runtime import EngineConfig, Kernel
from ..pseudotree import PseudoTree
from .common import best_own_response, discretize, util_value_protocol
from .discrete import joint_utility

# work guard on all-pairs interpolation (queries x source rows)
PAIR_CAP = 200_000_000


@dataclass(frozen=True)
class ScatterTable:
    separator_vars: tuple[str, ...]
    rows: tuple[tuple[tuple[float, ...], float], ...]
    origin: str = "leaf"

    def scalar_size(self) -> int:
        return len(self.rows) * (len(self.separator_vars) + 1)

    def value_set(self, var: str) -> list[float]:
        j = self.separator_vars.index(var)
        return sorted({values[j] for values, _ in self.rows})


# --- interpolation -----------------------------------------------------------

def _exact_index(table: ScatterTable) -> dict[tuple[float, ...], float]:
    index: dict[tuple[float, ...], float] = {}
    for values, util in table.rows:
        if values not in index or util > index[values]:
            index[values] = util
    return index


def _interp_batch(points: np.ndarray, utils: np.ndarray, queries: np.ndarray,
                  method: str) -> np.ndarray:
    """Vectorized scattered-data interpolation; exact hits handled upstream."""
    if len(queries) * len(points) > PAIR_CAP:
        raise CapacityError(
            f"interpolation workload {len(queries)}x{len(points)} exceeds the pair cap"
        )
    out = np.empty(len(queries))
    chunk = max(1, PAIR_CAP // (64 * max(1, len(points))))
    for start in range(0, len(queries), chunk):
        q = queries[start:start + chunk]
        d2 = ((q[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        if method == "nearest":
            nearest = np.argmin(d2, axis=1)  # row order is lexicographic
            out[start:start + len(q)] = utils[nearest]
        else:
            w = 1.0 / np.maximum(d2, 1e-300)
            out[start:start + len(q)] = (w @ utils) / w.sum(axis=1)
    return out


def interpolate(table: ScatterTable, query: tuple[float, ...],
                method: str = "idw") -> float:
    """Utility estimate at a query tuple: stored rows answer exactly, other
    points use inverse-distance weighting (power 2) or the nearest row."""
    if not table.rows:
        raise ProtocolError("cannot interpolate over an empty table")
    if method not in ("idw", "nearest"):
        raise ArgumentError(f"unknown interpolation method {method!r}")
    index = _exact_index(table)
    if tuple(query) in index:
        return index[tuple(query)]
    rows = sorted(index.items())  # lexicographic, so nearest ties break low
    points = np.array([values for values, _ in rows], dtype=float)
    utils = np.array([util for _, util in rows], dtype=float)
    return float(_interp_batch(points, utils, np.array([query], dtype=float), method)[0])


def _interp_many(table: ScatterTable, queries: list[tuple[float, ...]],
                 method: str) -> list[float]:
    index = _exact_index(table)
    out: list[float | None] = [index.get(q) for q in queries]
    missing = [i for i, v in enumerate(out) if v is None]
    if missing:
        rows = sorted(index.items())
        points = np.array([values for values, _ in rows], dtype=float)
        utils = np.array([util for _, util in rows], dtype=float)
        q = np.array([queries[i] for i in missing], dtype=float)
        filled = _interp_batch(points, utils, q, method)
        for i, v in zip(missing, filled):
            out[i] = float(v)
    return out  # type: ignore[return-value]


# --- alignment and clustering ------------------------------------------------

def align_tables(child_tables: list[ScatterTable], interpolation: str = "idw",
                 row_cap: int = 10_000_000) -> list[ScatterTable]:
    """Extend each table so shared variables carry the union of all value
    sets; new rows get interpolated utilities."""
    for t in child_tables:
        if not t.rows:
            raise ProtocolError("received an empty UTIL table")
    common: dict[str, list[float]] = {}
    for t in child_tables:
        for var in t.separator_vars:
            values = set(common.get(var, ())) | set(t.value_set(var))
            common[var] = sorted(values)

    out = []
    for t in child_tables:
        sets = [common[var] for var in t.separator_vars]
        size = math.prod(len(s) for s in sets)
        if size > row_cap:
            raise CapacityError(f"aligned table would hold {size} rows (cap {row_cap})")
        index = _exact_index(t)
        grid = list(itertools.product(*sets))
        if len(index) == len(grid) and all(g in index for g in grid):
            out.append(t)
            continue
        utils = _interp_many(t, grid, interpolation)
        out.append(ScatterTable(t.separator_vars,
                                tuple(zip(grid, utils)), origin="joined"))
    return out


def cluster_tuples(table: ScatterTable, k: int, rng: random.Random | None = None,
                   interpolation: str = "idw") -> ScatterTable:
    """Compress a table to at most k rows: k-means (farthest-point init,
    Lloyd iterations) over the value tuples, with centroid utilities
    interpolated from the original rows."""
    if k < 1:
        raise ArgumentError(f"cluster count must be >= 1, got {k}")
    if len(table.rows) <= k:
        return table
    if rng is None:
        rng = random.Random(0)

    points = np.array([values for values, _ in table.rows], dtype=float)
    n = len(points)
    first = rng.randrange(n)
    chosen = [first]
    dist = ((points - points[first]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))  # ties break to the smallest index
        chosen.append(nxt)
        dist = np.minimum(dist, ((points - points[nxt]) ** 2).sum(axis=1))
    centroids = points[chosen].copy()

    for _ in range(100):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        new_centroids = centroids.copy()
        for j in range(k):
            members = points[labels == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
        shift = np.abs(new_centroids - centroids).max()
        centroids = new_centroids
        if shift < 1e-6:
            break

    used = sorted(set(int(lbl) for lbl in labels))
    tuples = [tuple(float(v) for v in centroids[j]) for j in used]
    utils = _interp_many(table, tuples, interpolation)
    return ScatterTable(table.separator_vars, tuple(zip(tuples, utils)), origin="joined")


# --- gradient moves ----------------------------------------------------------

def _gradient_wrt_other(f, own_var: str, own_value: float, other_value: float) -> float:
    other = f.other_var(own_var)
    if f.first_var == own_var:
        return f.partial(other, own_value, other_value)
    return f.partial(other, other_value, own_value)


def leaf_move(values: tuple[float, ...], sep_vars: tuple[str, ...],
              constraints: dict, alpha: float, own_var: str,
              own_domain, sep_domains: dict) -> tuple[float, ...]:
    """One gradient move of every coordinate of a leaf tuple: the leaf's best
    own response is found in closed form, then each separator value steps
    along the corresponding constraint's gradient (clamped to the domain)."""
    out = []
    for w, v in zip(sep_vars, values):
        f = constraints.get(w)
        if f is None:
            out.append(v)
            continue
        x_star = best_own_response([f], own_var, {w: v}, own_domain)
        grad = _gradient_wrt_other(f, own_var, x_star, v)
        out.append(sep_domains[w].clamp(v + alpha * grad))
    return tuple(out)


def nonleaf_move(values: tuple[float, ...], sep_vars: tuple[str, ...],
                 candidates: list[float], candidate_tables: dict[float, ScatterTable],
                 constraints: dict, alpha: float, own_var: str,
                 sep_domains: dict) -> tuple[float, ...]:
    """One gradient move of a non-leaf tuple. The agent's own stand-in value
    is the candidate whose joined-table row nearest the tuple is best; only
    coordinates with a direct constraint to the agent move."""
    best_c, best_u = None, -math.inf
    for c in sorted(candidates):
        u = interpolate(candidate_tables[c], values, "nearest")
        if u > best_u:
            best_c, best_u = c, u
    out = []
    for w, v in zip(sep_vars, values):
        f = constraints.get(w)
        if f is None:
            out.append(v)
            continue
        grad = _gradient_wrt_other(f, own_var, best_c, v)
        out.append(sep_domains[w].clamp(v + alpha * grad))
    return tuple(out)


def _snap_column(points: list[float], values: np.ndarray) -> np.ndarray:
    """Vectorized _snap_indices for one coordinate."""
    p = np.asarray(points)
    i = np.searchsorted(p, values, side="left")
    out = np.clip(i, 0, len(p) - 1)
    mid = (i > 0) & (i < len(p))
    im = i[mid]
    take_left = (values[mid] - p[im - 1]) <= (p[im] - values[mid])
    out[mid] = np.where(take_left, im - 1, im)
    return out


def _snap_indices(sets: list[list[float]], values: tuple[float, ...]) -> tuple[int, ...]:
    """Nearest grid index per coordinate; ties go to the smaller value."""
    out = []
    for points, v in zip(sets, values):
        i = bisect_left(points, v)
        if i == 0:
            out.append(0)
        elif i == len(points):
            out.append(len(points) - 1)
        else:
            out.append(i - 1 if v - points[i - 1] <= points[i] - v else i)
    return tuple(out)


# --- the engine ---------------------------------------------------------------

def run(contexts, tree: PseudoTree, kernel: Kernel, config: EngineConfig,
        clustered: bool = False):
    d = config.points
    method = config.interpolation
    state: dict[str, dict] = {}
    kernel.engine_state = state  # inspectable after the run

    def leaf_util(var, ctx):
        own_dom = ctx.own_domain()
        own_pts = discretize(own_dom, d)
        sep_vars = tuple(sorted(ctx.separator))
        sep_domains = {w: ctx.domain_of(w) for w in sep_vars}
        grids = [discretize(sep_domains[w], d) for w in sep_vars]
        constraints = {w: f for w in sep_vars if (f := ctx.constraint_with(w)) is not None}

        tuples = list(itertools.product(*grids))
        moved = []
        for t in tuples:
            current = t
            for _ in range(config.moves):
                nxt = leaf_move(current, sep_vars, constraints, config.alpha,
                                var, own_dom, sep_domains)
                delta = max((abs(a - b) for a, b in zip(nxt, current)), default=0.0)
                current = nxt
                if delta < 1e-9:
                    break
            moved.append(current)

        sorted_constraints = sorted(constraints.values(), key=lambda f: f.other_var(var))
        rows = []
        for t in moved:
            if config.moves == 0:
                # grid projection, identical to the discrete engine
                best = -math.inf
                for x in own_pts:
                    best = max(best, joint_utility(x, var, sep_vars, t, [], sorted_constraints))
            else:
                x_star = best_own_response(sorted_constraints, var,
                                           dict(zip(sep_vars, t)), own_dom)
                best = joint_utility(x_star, var, sep_vars, t, [], sorted_constraints)
            rows.append((t, best))
        state[var] = {"leaf": True, "sep_vars": sep_vars, "own_pts": own_pts,
                      "own_domain": own_dom, "constraints": sorted_constraints}
        return ScatterTable(sep_vars, tuple(rows), origin="leaf")

    def nonleaf_util(var, ctx, child_payloads):
        sep_vars = tuple(sorted(ctx.separator))
        tables = [payload for _, payload in child_payloads]
        for t in tables:
            if not t.rows:
                raise ProtocolError(f"{var}: received an empty UTIL table")

        # value-set union per variable, the alignment step's common sets;
        # the join below interpolates each child table directly instead of
        # materializing the extended tables (same values at aligned rows)
        sets: dict[str, list[float]] = {}
        for t in tables:
            for w in t.separator_vars:
                values = set(sets.get(w, ())) | set(t.value_set(w))
                sets[w] = sorted(values)
        for w in sep_vars:
            if w not in sets:
                sets[w] = discretize(ctx.domain_of(w), d)
        if var not in sets:
            raise ProtocolError(f"{var}: no child table mentions this agent")
        candidates = sets[var]

        sep_sets = [sets[w] for w in sep_vars]
        grid_cells = len(candidates) * math.prod(len(s) for s in sep_sets)
        if grid_cells > config.row_cap:
            raise CapacityError(
                f"{var}: joined table would hold {grid_cells} rows "
                f"(cap {config.row_cap})"
            )

        constraints = {w: f for w in sep_vars if (f := ctx.constraint_with(w)) is not None}
        sorted_constraints = sorted(constraints.values(), key=lambda f: f.other_var(var))
        sep_index = {w: i for i, w in enumerate(sep_vars)}

        def scores(tuples):
            """(len(tuples), len(candidates)) utilities: interpolated child
            contributions plus exact own constraints, summed in the same order
            as the discrete engine so the moves=0 case is identical to it."""
            n_t, n_c = len(tuples), len(candidates)
            total = np.zeros((n_t, n_c))
            for t in tables:
                queries = [
                    tuple(c if w == var else tup[sep_index[w]]
                          for w in t.separator_vars)
                    for tup in tuples for c in candidates
                ]
                # queries project onto the child's variables, so they repeat
                # heavily; interpolate each distinct projection once
                uniq: dict[tuple, int] = {}
                for q in queries:
                    if q not in uniq:
                        uniq[q] = len(uniq)
                looked_up = _interp_many(t, list(uniq), method)
                vals = np.array([looked_up[uniq[q]] for q in queries]).reshape(n_t, n_c)
                total = total + vals
            cand_row = np.array(candidates).reshape(1, n_c)
            for f in sorted_constraints:
                w = f.other_var(var)
                w_col = np.array([tup[sep_index[w]] for tup in tuples]).reshape(n_t, 1)
                if f.first_var == var:
                    total = total + f.evaluate(cand_row, w_col)
                else:
                    total = total + f.evaluate(w_col, cand_row)
            return total

        grid = list(itertools.product(*sep_sets))
        grid_scores = scores(grid)
        best_candidate_idx = grid_scores.argmax(axis=1)  # first max = smallest candidate

        sep_domains = {w: ctx.domain_of(w) for w in sep_vars}
        strides = np.array(_strides(tuple(len(s) for s in sep_sets)), dtype=int)
        cand_arr = np.array(candidates)
        current = np.array(grid, dtype=float).reshape(len(grid), len(sep_vars))
        active = np.ones(len(grid), dtype=bool)
        for _ in range(config.moves):
            if not active.any() or not sep_vars:
                break
            rows = current[active]
            snapped = np.stack(
                [_snap_column(sep_sets[j], rows[:, j]) for j in range(len(sep_vars))],
                axis=1,
            )
            x_star = cand_arr[best_candidate_idx[snapped @ strides]]
            nxt = rows.copy()
            for j, w in enumerate(sep_vars):
                f = constraints.get(w)
                if f is None:
                    continue
                v = rows[:, j]
                if f.first_var == var:
                    grad = f.partial(w, x_star, v)
                else:
                    grad = f.partial(w, v, x_star)
                dom = sep_domains[w]
                nxt[:, j] = np.clip(v + config.alpha * grad, dom.lb, dom.ub)
            delta = np.abs(nxt - rows).max(axis=1) if len(sep_vars) else np.zeros(len(rows))
            current[active] = nxt
            still = np.zeros(len(grid), dtype=bool)
            still[active] = delta >= 1e-9
            active = still
        moved = [tuple(float(v) for v in row) for row in current]

        state[var] = {
            "leaf": False,
            "sep_vars": sep_vars,
            "candidates": candidates,
            "scores": scores,
            "joined_rows": grid_cells,
        }

        if var == tree.root:
            return float(grid_scores.max())

        utils = scores(moved).max(axis=1).tolist()
        return ScatterTable(sep_vars, tuple(zip(moved, utils)), origin="joined")

    def util_fn(var, child_payloads):
        ctx = contexts[var]
        if child_payloads:
            result = nonleaf_util(var, ctx, child_payloads)
        else:
            result = leaf_util(var, ctx)
        if var == tree.root:
            return result
        if clustered:
            rng = random.Random(f"{config.seed}:{var}")
            result = cluster_tuples(result, config.k_clusters, rng, method)
        state[var]["emitted_rows"] = len(result.rows)
        return result, result.scalar_size()

    def value_fn(var, sep_values):
        info = state[var]
        sep_vars = info["sep_vars"]
        try:
            query = tuple(sep_values[w] for w in sep_vars)
        except KeyError as exc:
            raise ProtocolError(f"{var}: missing ancestor value {exc}") from exc

        if info["leaf"]:
            if config.moves == 0:
                best_x, best_u = None, -math.inf
                for x in info["own_pts"]:
                    u = joint_utility(x, var, sep_vars, query, [], info["constraints"])
                    if u > best_u:
                        best_x, best_u = x, u
                return best_x
            return best_own_response(info["constraints"], var,
                                     dict(zip(sep_vars, query)), info["own_domain"])

        candidates = info["candidates"]
        col = info["scores"]([query])[0]
        best_i = 0
        for i in range(1, len(candidates)):  # ascending, ties keep smallest
            if col[i] > col[best_i]:
                best_i = i
        return candidates[best_i]

    return util_value_protocol(kernel, tree, util_fn, value_fn)


def _strides(dims: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    acc = 1
    for size in reversed(dims):
        out.append(acc)
        acc *= size
    return tuple(reversed(out))
