"""Arithmetic circuits over GF(p) for the prove-stage predicates.

Gates are in SSA form, one output wire each. Inputs are message chunks (the
same chunking the sharing layer uses), the single output must be 0/1.

Text format, one gate per line (`#` comments allowed):

    <id> input <chunk_index>
    <id> const <value>
    <id> add <a> <b>
    <id> sub <a> <b>
    <id> mul <a> <b>
    <id> output <a>
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bits import as_bits
from .errors import ParameterError
from .vss import FieldParams, message_to_chunks

OPS = ("input", "const", "add", "sub", "mul", "output")


@dataclass(frozen=True)
class Gate:
    op: str
    args: tuple[int, ...]


@dataclass
class Circuit:
    p: int
    n_inputs: int  # chunk count of the committed message
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        outputs = 0
        for gid, g in enumerate(self.gates):
            if g.op not in OPS:
                raise ParameterError(f"unknown op {g.op!r}")
            if g.op == "input":
                if not (0 <= g.args[0] < self.n_inputs):
                    raise ParameterError("input chunk index out of range")
            elif g.op == "const":
                if not (0 <= g.args[0] < self.p):
                    raise ParameterError("constant out of field range")
            elif g.op == "output":
                outputs += 1
                if not (0 <= g.args[0] < gid):
                    raise ParameterError("output wire must reference an earlier gate")
            else:
                if any(not (0 <= a < gid) for a in g.args):
                    raise ParameterError("gate argument must reference an earlier gate")
        if outputs != 1 or self.gates[-1].op != "output":
            raise ParameterError("circuit needs exactly one trailing output gate")

    @property
    def mul_gates(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.op == "mul"]


def eval_clear(circuit: Circuit, chunk_values: list[int]) -> int:
    """Direct evaluation on clear chunk values (the functionality's spec)."""
    if len(chunk_values) != circuit.n_inputs:
        raise ParameterError("input chunk count mismatch")
    p = circuit.p
    wires: list[int] = []
    for g in circuit.gates:
        if g.op == "input":
            wires.append(int(chunk_values[g.args[0]]) % p)
        elif g.op == "const":
            wires.append(g.args[0] % p)
        elif g.op == "add":
            wires.append((wires[g.args[0]] + wires[g.args[1]]) % p)
        elif g.op == "sub":
            wires.append((wires[g.args[0]] - wires[g.args[1]]) % p)
        elif g.op == "mul":
            wires.append((wires[g.args[0]] * wires[g.args[1]]) % p)
        else:
            return wires[g.args[0]]
    raise AssertionError("unreachable")


def predicate_on_message(circuit: Circuit, message, field_params: FieldParams) -> int:
    """phi(m) for a bitstring message; by convention phi(None) = 0."""
    if message is None:
        return 0
    chunks = message_to_chunks(as_bits(message), field_params)
    if len(chunks) != circuit.n_inputs:
        return 0
    return eval_clear(circuit, chunks)


def compile_equality_predicate(
    constraints,
    n_inputs: int,
    field_params: FieldParams = FieldParams(),
) -> Circuit:
    """Circuit for AND_j (chunk_j == c_j) over the constrained positions.

    ``constraints`` is a bitstring (constraining every chunk of it) or a
    {chunk_index: value} mapping; an empty constraint set compiles to the
    constant-1 circuit. EQ(a,b) = 1 - (a-b)^(p-1) via square-and-multiply.
    """
    p = field_params.p
    if isinstance(constraints, dict):
        pairs = sorted(constraints.items())
    else:
        vals = message_to_chunks(as_bits(constraints), field_params)
        pairs = list(enumerate(vals))
    if len(pairs) > n_inputs:
        raise ParameterError("more constraints than input chunks")
    gates: list[Gate] = []

    def emit(op, *args) -> int:
        gates.append(Gate(op, tuple(int(a) for a in args)))
        return len(gates) - 1

    one = emit("const", 1)
    acc = None
    exp_bits = [int(b) for b in bin(p - 1)[2:]]
    for idx, val in pairs:
        if not (0 <= idx < n_inputs):
            raise ParameterError("constraint index out of range")
        x = emit("input", idx)
        cst = emit("const", val % p)
        d = emit("sub", x, cst)
        # d^(p-1) by square-and-multiply, MSB first
        pw = d
        for b in exp_bits[1:]:
            pw = emit("mul", pw, pw)
            if b:
                pw = emit("mul", pw, d)
        eq = emit("sub", one, pw)
        acc = eq if acc is None else emit("mul", acc, eq)
    if acc is None:
        acc = one
    emit("output", acc)
    return Circuit(p=p, n_inputs=n_inputs, gates=gates)


def circuit_to_text(circuit: Circuit) -> str:
    lines = [f"# p={circuit.p} inputs={circuit.n_inputs}"]
    lines.append(f"p {circuit.p}")
    lines.append(f"inputs {circuit.n_inputs}")
    for gid, g in enumerate(circuit.gates):
        lines.append(" ".join([str(gid), g.op, *map(str, g.args)]))
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    p = None
    n_inputs = None
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "p":
            p = int(parts[1])
            continue
        if parts[0] == "inputs":
            n_inputs = int(parts[1])
            continue
        gid, op, *args = parts
        if int(gid) != len(gates):
            raise ParameterError("gate ids must be dense and in order")
        gates.append(Gate(op, tuple(int(a) for a in args)))
    if p is None or n_inputs is None:
        raise ParameterError("circuit text needs 'p' and 'inputs' headers")
    return Circuit(p=p, n_inputs=n_inputs, gates=gates)
