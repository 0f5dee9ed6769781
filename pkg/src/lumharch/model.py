"""Integer linear program for cost-optimal multicast structures.

Variables, per wavelength lam and directed link (m, n):

* ``L_m_n_lam``  binary; 1 iff the session uses that link on lam.
* ``F_m_n_lam``  integer in [0, |D|]; destinations served through the link.
* ``w_lam``      binary; 1 iff wavelength lam is used at all.

The objective scales total link cost by ``delta = |W| + 1`` and adds the
number of wavelengths used, so comparing objective values is exactly the
lexicographic comparison of (total cost, wavelength count) for integer
costs.  Structure constraints shape per-wavelength link sets into rooted
hierarchies (or trees in LT mode); the optional commodity-flow layer pins
source-to-destination connectivity, which the structure layer alone cannot
guarantee (a detached cycle can satisfy all local degree rules).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

from .hierarchy import LightStructure, LightStructureSet, ValidationReport, Violation
from .network import MulticastSession, Network


class VarKind(enum.Enum):
    LIGHT = "L"
    FLOW = "F"
    WAVE = "w"


class Relation(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


@dataclass(frozen=True)
class VarRef:
    kind: VarKind
    tail: str | None
    head: str | None
    wavelength: int
    index: int
    lower: int
    upper: int

    @property
    def name(self) -> str:
        if self.kind is VarKind.WAVE:
            return f"w_{self.wavelength}"
        return f"{self.kind.value}_{self.tail}_{self.head}_{self.wavelength}"


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, int], ...]  # (variable index, coefficient)
    relation: Relation
    rhs: int


@dataclass(frozen=True)
class Assignment:
    values: tuple[int, ...]


class Mode(enum.Enum):
    LH = "LH"
    LT = "LT"


@dataclass(frozen=True)
class IlpModel:
    net: Network
    session: MulticastSession
    mode: Mode
    connectivity: bool
    delta: int
    vars: tuple[VarRef, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, int], ...]  # (variable index, coefficient)

    @cached_property
    def by_name(self) -> dict[str, VarRef]:
        return {v.name: v for v in self.vars}

    @cached_property
    def light_index(self) -> dict[tuple[str, str, int], int]:
        return {
            (v.tail, v.head, v.wavelength): v.index
            for v in self.vars
            if v.kind is VarKind.LIGHT
        }

    @cached_property
    def wave_index(self) -> dict[int, int]:
        return {v.wavelength: v.index for v in self.vars if v.kind is VarKind.WAVE}

    def objective_value(self, a: Assignment) -> int:
        return sum(coef * a.values[i] for i, coef in self.objective)

    def cost_value(self, a: Assignment) -> int:
        return sum(
            self.net.link_cost[(v.tail, v.head)] * a.values[v.index]
            for v in self.vars
            if v.kind is VarKind.LIGHT
        )

    def wavelengths_value(self, a: Assignment) -> int:
        return sum(a.values[i] for i in self.wave_index.values())


def build_model(
    net: Network,
    ms: MulticastSession,
    mode: Mode | str = Mode.LH,
    connectivity: bool = True,
) -> IlpModel:
    """Build the ILP for one session on one network."""
    mode = Mode(mode) if not isinstance(mode, Mode) else mode
    if net.wavelengths < 1:
        raise ValueError("need at least one wavelength")
    s = ms.source
    dests = ms.sorted_destinations(net)
    dset = ms.destinations
    ndest = len(dests)
    waves = range(net.wavelengths)
    links = net.directed_links
    delta = net.wavelengths + 1

    vars_: list[VarRef] = []
    light: dict[tuple[str, str, int], int] = {}
    flowv: dict[tuple[str, str, int], int] = {}
    wave: dict[int, int] = {}
    for lam in waves:
        for u, v in links:
            light[(u, v, lam)] = len(vars_)
            vars_.append(VarRef(VarKind.LIGHT, u, v, lam, len(vars_), 0, 1))
    if connectivity:
        for lam in waves:
            for u, v in links:
                flowv[(u, v, lam)] = len(vars_)
                vars_.append(VarRef(VarKind.FLOW, u, v, lam, len(vars_), 0, ndest))
    for lam in waves:
        wave[lam] = len(vars_)
        vars_.append(VarRef(VarKind.WAVE, None, None, lam, len(vars_), 0, 1))

    cons: list[Constraint] = []

    def add(name: str, terms: list[tuple[int, int]], rel: Relation, rhs: int) -> None:
        merged: dict[int, int] = {}
        for idx, coef in terms:
            merged[idx] = merged.get(idx, 0) + coef
        cons.append(Constraint(name, tuple(sorted(merged.items())), rel, rhs))

    def l_in(m: str, lam: int) -> list[tuple[int, int]]:
        return [(light[(n, m, lam)], 1) for n in net.neighbors[m]]

    def l_out(m: str, lam: int) -> list[tuple[int, int]]:
        return [(light[(m, n, lam)], 1) for n in net.neighbors[m]]

    # Root: never entered, emits between 1 and |D| links over all wavelengths.
    add("src_in", [t for lam in waves for t in l_in(s, lam)], Relation.EQ, 0)
    out_all = [t for lam in waves for t in l_out(s, lam)]
    add("src_out_lo", out_all, Relation.GE, 1)
    add("src_out_hi", out_all, Relation.LE, ndest)

    # Each destination is spanned at least once; the upper bound (pass-through
    # visits while other destinations are served) degenerates for |D| = 1 and
    # is dropped there.
    for d in dests:
        in_all = [t for lam in waves for t in l_in(d, lam)]
        add(f"dest_in_lo_{d}", in_all, Relation.GE, 1)
        if ndest >= 2:
            add(f"dest_in_hi_{d}", in_all, Relation.LE, ndest - 1)

    for lam in waves:
        for m, _ in net.nodes:
            if m == s:
                continue
            if net.is_mc(m):
                add(f"mc_in_{m}_{lam}", l_in(m, lam), Relation.LE, 1)
                add(
                    f"mc_out_{m}_{lam}",
                    l_out(m, lam) + [(i, -net.degree(m)) for i, _ in l_in(m, lam)],
                    Relation.LE,
                    0,
                )
            else:
                add(
                    f"mi_out_{m}_{lam}",
                    l_out(m, lam) + [(i, -1) for i, _ in l_in(m, lam)],
                    Relation.LE,
                    0,
                )
        # Only destinations may be leaves.
        for m, _ in net.nodes:
            if m == s or m in dset:
                continue
            add(
                f"leaf_{m}_{lam}",
                l_out(m, lam) + [(i, -1) for i, _ in l_in(m, lam)],
                Relation.GE,
                0,
            )

    for lam in waves:
        for u, v in links:
            add(f"wave_link_{u}_{v}_{lam}", [(wave[lam], 1), (light[(u, v, lam)], -1)], Relation.GE, 0)
        add(
            f"wave_used_{lam}",
            [(wave[lam], 1)] + [(light[(u, v, lam)], -1) for u, v in links],
            Relation.LE,
            0,
        )

    if mode is Mode.LT:
        # Trees: nobody is entered twice; MI nodes pass through or stop.
        for lam in waves:
            for m, _ in net.nodes:
                if m == s:
                    continue
                add(f"tree_in_{m}_{lam}", l_in(m, lam), Relation.LE, 1)
                if not net.is_mc(m):
                    add(f"tree_out_{m}_{lam}", l_out(m, lam), Relation.LE, 1)

    if connectivity:

        def f_in(m: str, lam: int) -> list[tuple[int, int]]:
            return [(flowv[(n, m, lam)], 1) for n in net.neighbors[m]]

        def f_out(m: str, lam: int) -> list[tuple[int, int]]:
            return [(flowv[(m, n, lam)], 1) for n in net.neighbors[m]]

        add("flow_src", [t for lam in waves for t in f_out(s, lam)], Relation.EQ, ndest)
        for d in dests:
            add(
                f"flow_dest_{d}",
                [t for lam in waves for t in f_in(d, lam)]
                + [(i, -1) for lam in waves for i, _ in f_out(d, lam)],
                Relation.EQ,
                1,
            )
            for lam in waves:
                diff = f_out(d, lam) + [(i, -1) for i, _ in f_in(d, lam)]
                add(f"flow_dest_lo_{d}_{lam}", diff, Relation.GE, -1)
                add(f"flow_dest_hi_{d}_{lam}", diff, Relation.LE, 0)
        for lam in waves:
            for m, _ in net.nodes:
                if m == s or m in dset:
                    continue
                add(
                    f"flow_cons_{m}_{lam}",
                    f_in(m, lam) + [(i, -1) for i, _ in f_out(m, lam)],
                    Relation.EQ,
                    0,
                )
            for u, v in links:
                add(
                    f"flow_lo_{u}_{v}_{lam}",
                    [(flowv[(u, v, lam)], 1), (light[(u, v, lam)], -1)],
                    Relation.GE,
                    0,
                )
                add(
                    f"flow_hi_{u}_{v}_{lam}",
                    [(flowv[(u, v, lam)], 1), (light[(u, v, lam)], -ndest)],
                    Relation.LE,
                    0,
                )

    objective = [
        (light[(u, v, lam)], delta * net.link_cost[(u, v)]) for lam in waves for u, v in links
    ] + [(wave[lam], 1) for lam in waves]

    return IlpModel(
        net=net,
        session=ms,
        mode=mode,
        connectivity=connectivity,
        delta=delta,
        vars=tuple(vars_),
        constraints=tuple(cons),
        objective=tuple(objective),
    )


# ---------------------------------------------------------------------------
# LP text format


def _format_terms(terms: list[tuple[str, int]]) -> list[str]:
    """Render '+ 3 x' style tokens; wrapping is handled by the caller."""
    parts: list[str] = []
    for name, coef in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{mag} {name}"
        if not parts and sign == "+":
            parts.append(body)
        else:
            parts.append(f"{sign} {body}")
    if not parts:
        parts.append(f"0 {terms[0][0]}" if terms else "0")
    return parts


def emit_lp(model: IlpModel) -> str:
    """Standard LP text (CPLEX dialect): objective, constraints, bounds,
    integrality sections.  Deterministic ordering throughout."""
    lines: list[str] = []
    lines.append(
        f"\\ multicast structure model: mode={model.mode.value}"
        f" connectivity={'on' if model.connectivity else 'off'}"
        f" wavelengths={model.net.wavelengths} delta={model.delta}"
    )
    lines.append("Minimize")
    obj_terms = [(model.vars[i].name, coef) for i, coef in model.objective]
    lines.extend(_wrap(" obj: ", _format_terms(obj_terms)))
    lines.append("Subject To")
    for c in model.constraints:
        terms = [(model.vars[i].name, coef) for i, coef in c.terms]
        body = _format_terms(terms) + [f"{c.relation.value} {c.rhs}"]
        lines.extend(_wrap(f" {c.name}: ", body))
    lines.append("Bounds")
    for v in model.vars:
        lines.append(f" 0 <= {v.name} <= {v.upper}")
    binaries = [v.name for v in model.vars if v.kind in (VarKind.LIGHT, VarKind.WAVE)]
    generals = [v.name for v in model.vars if v.kind is VarKind.FLOW]
    lines.append("Binary")
    for name in binaries:
        lines.append(f" {name}")
    if generals:
        lines.append("General")
        for name in generals:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _wrap(prefix: str, tokens: list[str], per_line: int = 12) -> list[str]:
    lines = []
    for i in range(0, len(tokens), per_line):
        chunk = " ".join(tokens[i : i + per_line])
        lines.append((prefix if i == 0 else " " * len(prefix)) + chunk)
    return lines


def import_solution(model: IlpModel, text: str) -> Assignment:
    """Read `name value` lines into an assignment.

    Unknown names are rejected; values must be integral within 1e-6 and
    inside the declared bounds.  Variables not mentioned default to 0.
    """
    values = [0] * len(model.vars)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {line_no}: expected 'name value', got {line!r}")
        name, raw_val = parts
        var = model.by_name.get(name)
        if var is None:
            raise ValueError(f"line {line_no}: unknown variable {name!r}")
        try:
            x = float(raw_val)
        except ValueError:
            raise ValueError(f"line {line_no}: bad numeric value {raw_val!r}") from None
        rounded = round(x)
        if abs(x - rounded) > 1e-6:
            raise ValueError(f"line {line_no}: value {x} for {name} is not integral")
        if not var.lower <= rounded <= var.upper:
            raise ValueError(
                f"line {line_no}: value {rounded} for {name} outside bounds [{var.lower}, {var.upper}]"
            )
        values[var.index] = int(rounded)
    return Assignment(values=tuple(values))


def check_feasible(model: IlpModel, a: Assignment) -> ValidationReport:
    """Evaluate every constraint and bound at the assignment."""
    violations: list[Violation] = []
    if len(a.values) != len(model.vars):
        raise ValueError("assignment does not cover all variables")
    for v in model.vars:
        x = a.values[v.index]
        if not v.lower <= x <= v.upper:
            violations.append(
                Violation("bounds", v.name, f"value {x} outside [{v.lower}, {v.upper}]")
            )
    for c in model.constraints:
        lhs = sum(coef * a.values[i] for i, coef in c.terms)
        ok = (
            lhs <= c.rhs
            if c.relation is Relation.LE
            else lhs >= c.rhs
            if c.relation is Relation.GE
            else lhs == c.rhs
        )
        if not ok:
            violations.append(
                Violation(c.name, c.name, f"lhs {lhs} {c.relation.value} {c.rhs} violated (slack {c.rhs - lhs})")
            )
    return ValidationReport(violations=tuple(violations))


def extract_structures(
    model: IlpModel, a: Assignment, net: Network, ms: MulticastSession
) -> LightStructureSet:
    """Read the per-wavelength structures out of a feasible assignment."""
    structures = []
    for lam in range(net.wavelengths):
        if a.values[model.wave_index[lam]] != 1:
            continue
        links = tuple(
            (u, v)
            for u, v in net.directed_links
            if a.values[model.light_index[(u, v, lam)]] == 1
        )
        if links:
            structures.append(LightStructure(wavelength=lam, root=ms.source, links=links))
    return LightStructureSet(session=ms, structures=tuple(structures))
