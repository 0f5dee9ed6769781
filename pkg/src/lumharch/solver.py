"""Exact branch-and-bound MILP solver for the multicast structure models.

Best-first search on the LP relaxation bound (FIFO tie-break, the
fix-to-one child first), branching only on fractional link and wavelength
indicators: once those are integral the remaining flow variables form a
pure network-flow system with integral extreme points, so an integral
flow is recovered directly instead of being branched on.  Objective
values at integral points are computed in exact integer arithmetic.

A single solve is single-threaded and deterministic, counters included;
distinct models may be solved concurrently.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import hierarchy
from .flow import service_flow
from .model import Assignment, IlpModel, Mode, VarKind, build_model, check_feasible, extract_structures
from .network import MulticastSession, Network
from .simplex import SimplexError, StandardForm, build_standard_form, solve_lp

INT_TOL = 1e-6


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    LIMIT_REACHED = "LimitReached"


class BranchRule(enum.Enum):
    MOST_FRACTIONAL = "most_fractional"


@dataclass(frozen=True)
class SolveOptions:
    node_limit: int = 1_000_000
    time_limit_ms: int | None = None
    branch_rule: BranchRule = BranchRule.MOST_FRACTIONAL
    verbosity: int = 0
    greedy_incumbent: bool = True

    def __post_init__(self) -> None:
        if self.node_limit < 1:
            raise ValueError("node_limit must be positive")
        if self.time_limit_ms is not None and self.time_limit_ms < 1:
            raise ValueError("time_limit_ms must be positive")


@dataclass(frozen=True)
class SolveReport:
    status: SolveStatus
    objective: int | None
    assignment: Assignment | None
    nodes_explored: int
    lp_iterations: int
    total_cost: int | None = None
    wavelength_count: int | None = None


@dataclass(frozen=True)
class LpRelaxation:
    status: str  # "optimal" | "infeasible"
    value: float | None
    point: dict[str, float]
    iterations: int


class FlowIntegralizationError(ValueError):
    """No integral flow exists for the fixed link pattern."""


def _standard_form(model: IlpModel) -> StandardForm:
    n = len(model.vars)
    lower = np.array([float(v.lower) for v in model.vars])
    upper = np.array([float(v.upper) for v in model.vars])
    rows = [(c.terms, c.relation.value, float(c.rhs)) for c in model.constraints]
    return build_standard_form(n, list(model.objective), rows, lower, upper)


def lp_relax(model: IlpModel) -> LpRelaxation:
    """Continuous relaxation via the bounded-variable simplex."""
    form = _standard_form(model)
    sol = solve_lp(form)
    if sol.status == "infeasible":
        return LpRelaxation(status="infeasible", value=None, point={}, iterations=sol.iterations)
    if sol.status != "optimal":
        raise SimplexError(f"relaxation ended with status {sol.status}")
    point = {v.name: float(sol.x[v.index]) for v in model.vars}
    return LpRelaxation(status="optimal", value=sol.value, point=point, iterations=sol.iterations)


def integralize_flows(model: IlpModel, a: Assignment) -> Assignment:
    """Replace flow values by an integral feasible flow over the used links.

    The link/wavelength pattern in ``a`` must already be integral.  Raises
    :class:`FlowIntegralizationError` when the pattern admits no integral
    flow (such a pattern is infeasible and must be pruned).
    """
    if not model.connectivity:
        return a
    net, ms = model.net, model.session
    structures = []
    for lam in range(net.wavelengths):
        links = tuple(
            (u, v) for u, v in net.directed_links if a.values[model.light_index[(u, v, lam)]] == 1
        )
        if links:
            structures.append((lam, links))
    flows = service_flow(structures, ms.source, ms.destinations, len(ms.destinations))
    if flows is None:
        raise FlowIntegralizationError("link pattern admits no integral flow")
    values = list(a.values)
    for v in model.vars:
        if v.kind is VarKind.FLOW:
            values[v.index] = flows.get((v.tail, v.head, v.wavelength), 0)
    return Assignment(values=tuple(values))


def _greedy_incumbent(model: IlpModel) -> Assignment | None:
    """Shortest-path placement heuristic; returns a feasible assignment or None.

    Correctness-neutral: only used to seed the incumbent for pruning.
    """
    net, ms = model.net, model.session
    per_wave: list[list[tuple[str, str]]] = [[] for _ in range(net.wavelengths)]
    for d in ms.sorted_destinations(net):
        try:
            path = net.shortest_path(ms.source, d)
        except ValueError:
            return None
        path_links = list(itertools.pairwise(path))
        placed = False
        for lam in range(net.wavelengths):
            cand = list(dict.fromkeys(per_wave[lam] + path_links))
            ls = hierarchy.LightStructure(wavelength=lam, root=ms.source, links=tuple(cand))
            if hierarchy._structure_violations(net, ls, ms.destinations):
                continue
            if set(cand) - hierarchy._reachable_links(ms.source, set(cand)):
                continue
            if model.mode is Mode.LT and not hierarchy.is_light_tree(ls):
                continue
            per_wave[lam] = cand
            placed = True
            break
        if not placed:
            return None

    structures = [
        (lam, tuple(links)) for lam, links in enumerate(per_wave) if links
    ]
    flows = None
    if model.connectivity:
        flows = service_flow(structures, ms.source, ms.destinations, len(ms.destinations))
        if flows is None:
            return None
    values = [0] * len(model.vars)
    used = {lam for lam, _ in structures}
    link_sets = {lam: set(links) for lam, links in structures}
    for v in model.vars:
        if v.kind is VarKind.LIGHT and (v.tail, v.head) in link_sets.get(v.wavelength, ()):
            values[v.index] = 1
        elif v.kind is VarKind.WAVE and v.wavelength in used:
            values[v.index] = 1
        elif v.kind is VarKind.FLOW and flows is not None:
            values[v.index] = flows.get((v.tail, v.head, v.wavelength), 0)
    a = Assignment(values=tuple(values))
    if not check_feasible(model, a).ok:
        return None
    return a


def solve(model: IlpModel, opts: SolveOptions | None = None) -> SolveReport:
    """Minimize the model exactly; see module docstring for the strategy."""
    opts = opts or SolveOptions()
    form = _standard_form(model)
    n = len(model.vars)
    base_lower = np.array([float(v.lower) for v in model.vars])
    base_upper = np.array([float(v.upper) for v in model.vars])
    branchable = [v.index for v in model.vars if v.kind in (VarKind.LIGHT, VarKind.WAVE)]

    incumbent: Assignment | None = None
    incumbent_obj: int | None = None
    if opts.greedy_incumbent:
        seed = _greedy_incumbent(model)
        if seed is not None:
            incumbent = seed
            incumbent_obj = model.objective_value(seed)

    nodes_explored = 0
    lp_iterations = 0
    numerical_trouble = False
    deadline = None
    if opts.time_limit_ms is not None:
        deadline = time.monotonic() + opts.time_limit_ms / 1000.0

    counter = itertools.count()
    # Heap entries: (parent LP bound, fifo tick, bound patch {index: (lo, up)}).
    heap: list[tuple[float, int, dict[int, tuple[float, float]]]] = [(-math.inf, next(counter), {})]
    stopped_early = False

    while heap:
        bound, _, patch = heapq.heappop(heap)
        if (
            incumbent_obj is not None
            and math.isfinite(bound)
            and math.ceil(bound - INT_TOL) >= incumbent_obj
        ):
            break  # best-first: every remaining node is at least as bad
        if nodes_explored >= opts.node_limit:
            stopped_early = True
            break
        if deadline is not None and time.monotonic() > deadline:
            stopped_early = True
            break

        lower = base_lower.copy()
        upper = base_upper.copy()
        for idx, (lo, up) in patch.items():
            lower[idx] = lo
            upper[idx] = up

        nodes_explored += 1
        try:
            sol = solve_lp(form, lower_override=lower, upper_override=upper)
        except SimplexError:
            numerical_trouble = True
            continue
        lp_iterations += sol.iterations
        if opts.verbosity >= 2 or (opts.verbosity == 1 and nodes_explored % 100 == 0):
            print(
                f"node {nodes_explored}: bound {sol.value if sol.status == 'optimal' else sol.status},"
                f" incumbent {incumbent_obj}, open {len(heap)}",
                file=sys.stderr,
            )
        if sol.status == "infeasible":
            continue
        if sol.status != "optimal":
            numerical_trouble = True
            continue
        if incumbent_obj is not None and math.ceil(sol.value - INT_TOL) >= incumbent_obj:
            continue

        x = sol.x
        frac_scores = [
            (min(x[i] - math.floor(x[i] + INT_TOL), math.ceil(x[i] - INT_TOL) - x[i]), i)
            for i in branchable
        ]
        fractional = [(s, i) for s, i in frac_scores if s > INT_TOL]
        if not fractional:
            values = [0] * n
            for v in model.vars:
                values[v.index] = int(round(x[v.index]))
            candidate = Assignment(values=tuple(values))
            try:
                candidate = integralize_flows(model, candidate)
            except FlowIntegralizationError:
                continue
            obj = model.objective_value(candidate)
            if incumbent_obj is None or obj < incumbent_obj:
                incumbent = candidate
                incumbent_obj = obj
            continue

        _, var = max(fractional, key=lambda si: (si[0], -si[1]))
        one_patch = dict(patch)
        one_patch[var] = (1.0, 1.0)
        zero_patch = dict(patch)
        zero_patch[var] = (0.0, 0.0)
        heapq.heappush(heap, (sol.value, next(counter), one_patch))
        heapq.heappush(heap, (sol.value, next(counter), zero_patch))

    if stopped_early or numerical_trouble:
        status = SolveStatus.LIMIT_REACHED
    elif incumbent is None:
        status = SolveStatus.INFEASIBLE
    else:
        status = SolveStatus.OPTIMAL

    if incumbent is None:
        return SolveReport(
            status=status,
            objective=None,
            assignment=None,
            nodes_explored=nodes_explored,
            lp_iterations=lp_iterations,
        )

    if status is SolveStatus.OPTIMAL:
        report = check_feasible(model, incumbent)
        if not report.ok:
            raise AssertionError(f"optimal assignment failed re-verification:\n{report}")
        if model.connectivity:
            lss = extract_structures(model, incumbent, model.net, model.session)
            vreport = hierarchy.validate(model.net, lss)
            if not vreport.ok:
                raise AssertionError(f"optimal structures failed validation:\n{vreport}")

    return SolveReport(
        status=status,
        objective=incumbent_obj,
        assignment=incumbent,
        nodes_explored=nodes_explored,
        lp_iterations=lp_iterations,
        total_cost=model.cost_value(incumbent),
        wavelength_count=model.wavelengths_value(incumbent),
    )


def solve_session(
    net: Network,
    ms: MulticastSession,
    mode: Mode | str = Mode.LH,
    connectivity: bool = True,
    opts: SolveOptions | None = None,
) -> tuple[IlpModel, SolveReport]:
    """Convenience wrapper: build the model and solve it."""
    model = build_model(net, ms, mode=mode, connectivity=connectivity)
    return model, solve(model, opts)
