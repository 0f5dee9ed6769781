"""Integral feasible-flow solver for signal-accounting checks.

The multicast service semantics are a commodity flow: the source emits one
unit per destination, every used link must carry at least one unit and at
most the full demand, pass-through nodes conserve flow, and each
destination absorbs exactly one unit over the whole structure set (at most
one per wavelength).  Deciding whether such a flow exists is a feasible
circulation problem with lower bounds, reduced here to plain max-flow
(Edmonds-Karp).  All arc orderings are deterministic.
"""

from __future__ import annotations

from collections import deque

Arc = tuple[object, object, int, int]  # (tail, head, lower, upper)


def feasible_flow(arcs: list[Arc], balances: dict[object, int]) -> list[int] | None:
    """Return per-arc integral flows meeting bounds and node balances, or None.

    ``balances[v]`` is the required net outflow of v (positive = producer).
    Arcs are (tail, head, lower, upper) with 0 <= lower <= upper.
    """
    nodes: list[object] = []
    seen: set[object] = set()
    for t, h, _, _ in arcs:
        for v in (t, h):
            if v not in seen:
                seen.add(v)
                nodes.append(v)
    for v in balances:
        if v not in seen:
            seen.add(v)
            nodes.append(v)

    # Shift out the lower bounds: residual problem asks for a [0, u-l] flow
    # with adjusted balances, solved as max-flow from a super source.
    excess: dict[object, int] = {v: balances.get(v, 0) for v in nodes}
    for t, h, lo, _ in arcs:
        excess[t] -= lo
        excess[h] += lo

    src, snk = ("__src__",), ("__snk__",)
    idx = {v: i for i, v in enumerate(nodes)}
    idx[src] = len(idx)
    idx[snk] = len(idx)

    graph: list[list[int]] = [[] for _ in range(len(idx))]
    cap: list[int] = []
    to: list[int] = []
    arc_pos: list[int] = []

    def add(u: int, v: int, c: int) -> int:
        pos = len(cap)
        graph[u].append(pos)
        to.append(v)
        cap.append(c)
        graph[v].append(pos + 1)
        to.append(u)
        cap.append(0)
        return pos

    for t, h, lo, up in arcs:
        if lo > up:
            return None
        arc_pos.append(add(idx[t], idx[h], up - lo))

    need = 0
    for v in nodes:
        e = excess[v]
        if e > 0:
            add(idx[src], idx[v], e)
            need += e
        elif e < 0:
            add(idx[v], idx[snk], -e)

    sent = _max_flow(graph, cap, to, idx[src], idx[snk])
    if sent != need:
        return None
    return [cap[pos + 1] + arcs[i][2] for i, pos in enumerate(arc_pos)]


def _max_flow(graph: list[list[int]], cap: list[int], to: list[int], s: int, t: int) -> int:
    total = 0
    n = len(graph)
    while True:
        parent_arc = [-1] * n
        parent_arc[s] = -2
        queue = deque([s])
        while queue and parent_arc[t] == -1:
            u = queue.popleft()
            for pos in graph[u]:
                v = to[pos]
                if cap[pos] > 0 and parent_arc[v] == -1:
                    parent_arc[v] = pos
                    queue.append(v)
        if parent_arc[t] == -1:
            return total
        bottleneck = None
        v = t
        while v != s:
            pos = parent_arc[v]
            bottleneck = cap[pos] if bottleneck is None else min(bottleneck, cap[pos])
            v = to[pos ^ 1]
        v = t
        while v != s:
            pos = parent_arc[v]
            cap[pos] -= bottleneck
            cap[pos ^ 1] += bottleneck
            v = to[pos ^ 1]
        total += bottleneck


def service_flow(
    structures: list[tuple[int, tuple[tuple[str, str], ...]]],
    source: str,
    destinations: frozenset[str],
    demand_cap: int,
    consuming: dict[int, frozenset[str]] | None = None,
) -> dict[tuple[str, str, int], int] | None:
    """Find integral link flows realizing the multicast service, or None.

    ``structures`` is a list of (wavelength, used directed links).  Every
    used link must carry between 1 and ``demand_cap`` units; non-destination
    nodes conserve flow per wavelength; each destination absorbs exactly one
    unit in total and at most one per wavelength.  If ``consuming`` is given
    it pins, per wavelength, exactly which destinations absorb there.
    """
    arcs: list[Arc] = []
    src = ("S*",)
    link_arc_index: dict[tuple[str, str, int], int] = {}

    for lam, links in structures:
        arcs.append((src, ("n", source, lam), 0, demand_cap))
        present: set[str] = set()
        for u, v in links:
            link_arc_index[(u, v, lam)] = len(arcs)
            arcs.append((("n", u, lam), ("n", v, lam), 1, demand_cap))
            present.add(u)
            present.add(v)
        if consuming is None:
            for d in sorted(destinations):
                if d in present:
                    arcs.append((("n", d, lam), ("d", d), 0, 1))
        else:
            for d in sorted(consuming.get(lam, frozenset())):
                arcs.append((("n", d, lam), ("d", d), 1, 1))

    balances: dict[object, int] = {src: len(destinations)}
    for d in sorted(destinations):
        balances[("d", d)] = -1

    flows = feasible_flow(arcs, balances)
    if flows is None:
        return None
    return {key: flows[i] for key, i in link_arc_index.items()}
