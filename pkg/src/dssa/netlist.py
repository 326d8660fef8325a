"""Line-oriented small-signal netlist parsing.

Supported lines::

    .title <text>
    .input <node>
    .output <node>
    .vary <param|*> <percent>
    G <name> <out+> <out-> <ctrl+> <ctrl-> <value_S>
    R <name> <n+> <n-> <value_ohms>
    C <name> <n+> <n-> <value_F>

``#`` starts a comment. Node ``0`` is ground; any other token names a node.
Resistors become conductance parameters named ``g_<name>`` (names already
starting with ``g`` are kept as-is).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

DEFAULT_VARIATION = 50.0

CONDUCTANCE = "conductance"
CAPACITANCE = "capacitance"
VCCS = "vccs"


class NetlistError(ValueError):
    """Raised for malformed or inconsistent netlists."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Parameter:
    name: str
    nominal: float
    lower: float
    upper: float
    variation: float = DEFAULT_VARIATION  # percent, as written

    def __post_init__(self):
        if not (0 < self.lower <= self.nominal <= self.upper):
            raise NetlistError(
                f"parameter {self.name!r}: bounds must satisfy 0 < L <= nominal <= H"
            )


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    terminals: tuple[int, ...]
    parameter_index: int
    source_value: float  # as written (ohms for resistors)


@dataclass(frozen=True)
class CircuitModel:
    title: str
    node_count: int
    input_node: int
    output_node: int
    elements: tuple[Element, ...]
    parameters: tuple[Parameter, ...]
    # node_labels[i] is the source label of node id i (index 0 is ground)
    node_labels: tuple[str, ...] = field(default=("0",))

    @property
    def K(self) -> int:
        return len(self.parameters)

    @property
    def parameter_names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def nominal(self) -> list[float]:
        return [p.nominal for p in self.parameters]

    @property
    def lower(self) -> list[float]:
        return [p.lower for p in self.parameters]

    @property
    def upper(self) -> list[float]:
        return [p.upper for p in self.parameters]

    @property
    def capacitor_count(self) -> int:
        return sum(1 for e in self.elements if e.kind == CAPACITANCE)

    def parameter_index(self, name: str) -> int:
        for k, p in enumerate(self.parameters):
            if p.name == name:
                return k
        raise KeyError(name)

    def with_variation(self, percent: float) -> "CircuitModel":
        """Return a copy with every parameter varied by +-percent around nominal."""
        params = tuple(_vary(p, percent) for p in self.parameters)
        return replace(self, parameters=params)


def _vary(p: Parameter, percent: float) -> Parameter:
    if not 0 <= percent < 100:
        raise NetlistError(f"variation {percent}% outside [0, 100)")
    f = percent / 100.0
    return Parameter(p.name, p.nominal, p.nominal * (1 - f), p.nominal * (1 + f), percent)


def _value(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise NetlistError(f"bad numeric value {tok!r}", lineno) from None
    if not math.isfinite(v) or v <= 0:
        raise NetlistError(f"value must be positive, got {tok}", lineno)
    return v


_ARITY = {"G": 7, "R": 5, "C": 5}


def parse_netlist(text: str) -> CircuitModel:
    title = ""
    input_label = output_label = None
    raw = []  # (kind, name, labels, written value, lineno)
    varies = []  # (target, percent, lineno)

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("*"):
            continue
        toks = line.split()
        head = toks[0]
        if head == ".title":
            title = line[len(".title"):].strip()
        elif head in (".input", ".output"):
            if len(toks) != 2:
                raise NetlistError(f"{head} takes exactly one node", lineno)
            if head == ".input":
                input_label = toks[1]
            else:
                output_label = toks[1]
        elif head == ".vary":
            if len(toks) != 3:
                raise NetlistError(".vary takes a parameter name (or *) and a percent", lineno)
            try:
                pct = float(toks[2])
            except ValueError:
                raise NetlistError(f"bad percent {toks[2]!r}", lineno) from None
            if not 0 <= pct < 100:
                raise NetlistError(f"variation {pct}% outside [0, 100)", lineno)
            varies.append((toks[1], pct, lineno))
        elif head in _ARITY:
            if len(toks) != _ARITY[head]:
                raise NetlistError(
                    f"{head} element expects {_ARITY[head] - 1} fields, got {len(toks) - 1}",
                    lineno,
                )
            name = toks[1]
            labels = toks[2:-1]
            value = _value(toks[-1], lineno)
            if labels[0] == labels[1]:
                raise NetlistError(f"element {name!r} has both terminals on node {labels[0]}", lineno)
            if head == "R":
                raw.append((CONDUCTANCE, name, labels, value, lineno))
            elif head == "C":
                raw.append((CAPACITANCE, name, labels, value, lineno))
            else:
                raw.append((VCCS, name, labels, value, lineno))
        else:
            raise NetlistError(f"unknown statement {head!r}", lineno)

    if not raw:
        raise NetlistError("no elements")
    if input_label is None:
        raise NetlistError("missing .input")
    if output_label is None:
        raise NetlistError("missing .output")

    labels = _order_labels(lbl for _, _, lbls, _, _ in raw for lbl in lbls)
    node_id = {lbl: i for i, lbl in enumerate(labels)}
    for directive, lbl in ((".input", input_label), (".output", output_label)):
        if lbl not in node_id:
            raise NetlistError(f"{directive} refers to unknown node {lbl!r}")
        if node_id[lbl] == 0:
            raise NetlistError(f"{directive} cannot be ground")

    elements = []
    params = []
    seen = set()
    for kind, name, lbls, value, lineno in raw:
        if name in seen:
            raise NetlistError(f"duplicate element name {name!r}", lineno)
        seen.add(name)
        pname = name
        if kind == CONDUCTANCE and not name.startswith("g"):
            pname = f"g_{name}"
        if any(p.name == pname for p in params):
            raise NetlistError(f"duplicate parameter name {pname!r}", lineno)
        nominal = 1.0 / value if kind == CONDUCTANCE else value
        params.append(_vary(Parameter(pname, nominal, nominal, nominal), DEFAULT_VARIATION))
        elements.append(
            Element(kind, name, tuple(node_id[x] for x in lbls), len(params) - 1, value)
        )

    by_name = {p.name: k for k, p in enumerate(params)}
    for target, pct, lineno in varies:
        if target == "*":
            params = [_vary(p, pct) for p in params]
        elif target in by_name:
            k = by_name[target]
            params[k] = _vary(params[k], pct)
        else:
            raise NetlistError(f".vary refers to unknown parameter {target!r}", lineno)

    return CircuitModel(
        title=title,
        node_count=len(labels) - 1,
        input_node=node_id[input_label],
        output_node=node_id[output_label],
        elements=tuple(elements),
        parameters=tuple(params),
        node_labels=tuple(labels),
    )


def _order_labels(labels) -> list[str]:
    """Ground first, then integer labels ascending, then the rest by first use."""
    ints, others = set(), []
    for lbl in labels:
        if lbl == "0":
            continue
        if lbl.isdigit():
            ints.add(lbl)
        elif lbl not in others:
            others.append(lbl)
    return ["0"] + sorted(ints, key=int) + others


def load_netlist(path) -> CircuitModel:
    return parse_netlist(Path(path).read_text(encoding="utf-8"))


def render_netlist(model: CircuitModel) -> str:
    """Canonical text form; parsing it reproduces ``model``."""
    lab = model.node_labels
    out = []
    if model.title:
        out.append(f".title {model.title}")
    for e in model.elements:
        nodes = " ".join(lab[n] for n in e.terminals)
        letter = {CONDUCTANCE: "R", CAPACITANCE: "C", VCCS: "G"}[e.kind]
        out.append(f"{letter} {e.name} {nodes} {e.source_value!r}")
    out.append(f".input {lab[model.input_node]}")
    out.append(f".output {lab[model.output_node]}")
    for p in model.parameters:
        if p.variation != DEFAULT_VARIATION:
            out.append(f".vary {p.name} {p.variation!r}")
    return "\n".join(out) + "\n"
