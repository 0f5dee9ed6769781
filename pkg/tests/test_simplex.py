from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from lumharch import Mode, build_model, lp_relax, make_session, solve
from lumharch.network import Network, NodeKind
from lumharch.simplex import build_standard_form, solve_lp


def _random_lp(rng):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 7))
    c = rng.integers(-5, 6, size=n).astype(float)
    upper = rng.integers(1, 5, size=n).astype(float)
    lower = np.zeros(n)
    for j in range(n):
        if rng.random() < 0.2:
            lower[j] = float(rng.integers(0, int(upper[j]) + 1))
    rows, a_ub, b_ub, a_eq, b_eq = [], [], [], [], []
    for _ in range(m):
        coefs = rng.integers(-4, 5, size=n)
        if not coefs.any():
            continue
        rel = ["<=", ">=", "="][int(rng.integers(0, 3))]
        rhs = float(rng.integers(-6, 10))
        rows.append((tuple((j, int(coefs[j])) for j in range(n) if coefs[j]), rel, rhs))
        if rel == "<=":
            a_ub.append(coefs)
            b_ub.append(rhs)
        elif rel == ">=":
            a_ub.append(-coefs)
            b_ub.append(-rhs)
        else:
            a_eq.append(coefs)
            b_eq.append(rhs)
    return n, c, lower, upper, rows, a_ub, b_ub, a_eq, b_eq

def test_matches_scipy_on_random_lps():
    rng = np.random.default_rng(987654321)
    checked = 0
    for _ in range(250):
        n, c, lower, upper, rows, a_ub, b_ub, a_eq, b_eq = _random_lp(rng)
        if not rows:
            continue
        form = build_standard_form(n, [(j, c[j]) for j in range(n)], rows, lower, upper)
        mine = solve_lp(form)
        ref = linprog(
            c,
            A_ub=np.array(a_ub) if a_ub else None,
            b_ub=b_ub or None,
            A_eq=np.array(a_eq) if a_eq else None,
            b_eq=b_eq or None,
            bounds=list(zip(lower, upper)),
            method="highs",
        )
        ref_status = "optimal" if ref.status == 0 else "infeasible" if ref.status == 2 else "other"
        assert mine.status == ref_status, (mine.status, ref_status)
        if ref_status == "optimal":
            assert abs(mine.value - ref.fun) <= 1e-6
            checked += 1
    assert checked >= 80

def test_hand_infeasible():
    # x >= 2 with x <= 1
    form = build_standard_form(1, [(0, 1)], [(((0, 1),), ">=", 2.0)], np.zeros(1), np.ones(1))
    assert solve_lp(form).status == "infeasible"

def test_hand_equality_and_upper_bound():
    # min -x - y  s.t.  x + y = 3, x <= 2, y <= 2
    form = build_standard_form(
        2, [(0, -1), (1, -1)], [(((0, 1), (1, 1)), "=", 3.0)], np.zeros(2), np.full(2, 2.0)
    )
    sol = solve_lp(form)
    assert sol.status == "optimal"
    assert abs(sol.value + 3.0) < 1e-9
    assert abs(sol.x.sum() - 3.0) < 1e-9

def test_bound_overrides():
    # min x + y  s.t.  x + y >= 1;  then force x to 1 exactly
    form = build_standard_form(2, [(0, 1), (1, 1)], [(((0, 1), (1, 1)), ">=", 1.0)], np.zeros(2), np.ones(2))
    free = solve_lp(form)
    assert abs(free.value - 1.0) < 1e-9
    pinned = solve_lp(form, lower_override=np.array([1.0, 0.0]), upper_override=np.array([1.0, 1.0]))
    assert pinned.status == "optimal"
    assert abs(pinned.value - 1.0) < 1e-9
    assert abs(pinned.x[0] - 1.0) < 1e-9
    crossed = solve_lp(form, lower_override=np.array([2.0, 0.0]), upper_override=np.array([1.0, 1.0]))
    assert crossed.status == "infeasible"

def test_degenerate_lp_terminates():
    # Many redundant rows pinning the same corner.
    rows = [(((0, 1), (1, 1)), "<=", 1.0)] * 6 + [(((0, 1),), "<=", 1.0), (((1, 1),), "<=", 1.0)]
    form = build_standard_form(2, [(0, -1), (1, -1)], rows, np.zeros(2), np.ones(2))
    sol = solve_lp(form)
    assert sol.status == "optimal"
    assert abs(sol.value + 1.0) < 1e-9

def test_relaxation_bounds_fig3(fig3, fig3_session):
    model = build_model(fig3, fig3_session, Mode.LH, True)
    relax = lp_relax(model)
    report = solve(model)
    assert relax.status == "optimal"
    assert relax.value <= report.objective + 1e-6
    assert relax.value <= 3 * 8 + 1  # loose structural upper bound on the bound
    assert set(relax.point) == {v.name for v in model.vars}

def test_relaxation_with_fixed_pattern_equals_objective(fig3, fig3_session):
    # With every link/wavelength indicator pinned to a feasible hierarchy the
    # relaxation has no freedom left that affects the objective.
    model = build_model(fig3, fig3_session, Mode.LH, True)
    report = solve(model)
    from lumharch.solver import _standard_form

    form = _standard_form(model)
    lower = np.array([float(v.lower) for v in model.vars])
    upper = np.array([float(v.upper) for v in model.vars])
    for v in model.vars:
        if v.kind.value in ("L", "w"):
            lower[v.index] = upper[v.index] = float(report.assignment.values[v.index])
    sol = solve_lp(form, lower_override=lower, upper_override=upper)
    assert sol.status == "optimal"
    assert abs(sol.value - report.objective) < 1e-6

def test_relaxation_infeasible_disconnected_destination():
    net = Network(
        nodes=(("s", NodeKind.MI), ("d", NodeKind.MI), ("x", NodeKind.MI), ("y", NodeKind.MI)),
        edges=(("s", "d", 1), ("x", "y", 1)),
        wavelengths=1,
    )
    ms = make_session(net, "s", ["y"])
    model = build_model(net, ms, Mode.LH, True)
    relax = lp_relax(model)
    assert relax.status == "infeasible"
    assert relax.value is None

def test_lower_bound_monotonicity_under_branching(fig3, fig3_session):
    model = build_model(fig3, fig3_session, Mode.LH, True)
    from lumharch.solver import _standard_form

    form = _standard_form(model)
    root = solve_lp(form)
    assert root.status == "optimal"
    frac = [
        v.index
        for v in model.vars
        if v.kind.value in ("L", "w") and 1e-6 < root.x[v.index] < 1 - 1e-6
    ]
    assert frac, "expected a fractional root relaxation on fig3"
    lower = np.array([float(v.lower) for v in model.vars])
    upper = np.array([float(v.upper) for v in model.vars])
    for idx in frac[:4]:
        for fixed in (0.0, 1.0):
            lo, up = lower.copy(), upper.copy()
            lo[idx] = up[idx] = fixed
            child = solve_lp(form, lower_override=lo, upper_override=up)
            if child.status == "optimal":
                assert child.value >= root.value - 1e-6
