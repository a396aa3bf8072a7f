"""n-party BGW-style circuit evaluation run "in the head".

Party i's input is its sharing-phase view; the constant coefficient of each
chunk polynomial is its degree-t Shamir share of that chunk, so the circuit
starts from already-shared wires. Linear gates are local; each mul gate does
local product + fresh degree-t resharing + Lagrange recombination; the output
wire is opened by broadcast and RS-decoded, so up to
floor((n-t-1)/2) wrong final shares cannot flip an honest output.

A party's view is its sharing view (verbatim bytes, the *prefix*), its
resharing tape, and all incoming messages; outgoing messages are recomputed
from those during consistency checks.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .errors import ParameterError, ProtocolViolation
from .gf import lagrange_weights, polyval, rs_decode
from .vss import VssView, decode_view, encode_view, vss_view_consistent

_OUT_NONE = 0xFFFF


@dataclass
class MpcView:
    """Prefix-extended view: sharing view bytes, then the protocol run."""

    prefix: bytes
    mpc_randomness: np.ndarray  # (n_mul, t) int64, resharing coeffs x^1..x^t
    rounds: list[np.ndarray]  # one (n-1,) incoming vector per mul gate + output round
    output: int | None

    def prefix_view(self) -> VssView:
        return decode_view(self.prefix)


def _common_params(input_views: list[VssView], circuit: Circuit):
    n, t, p = input_views[0].n, input_views[0].t, input_views[0].p
    for i, v in enumerate(input_views):
        if (v.n, v.t, v.p) != (n, t, p) or v.party_index != i + 1:
            raise ParameterError("input views disagree on parameters or order")
    if len(input_views) != n or t > n // 3:
        raise ParameterError("need all n views with t <= n/3")
    if p != circuit.p:
        raise ParameterError("circuit field does not match views")
    if circuit.n_inputs > input_views[0].chunks:
        raise ParameterError("circuit reads more chunks than the views carry")
    return n, t, p


def mpc_execute(
    circuit: Circuit,
    input_views: list[VssView],
    rng: np.random.Generator,
    tapes: np.ndarray | None = None,
    corrupt: dict | None = None,
):
    """Run the virtual parties; returns (views, outputs).

    ``tapes`` (n_mul, n, t) overrides the resharing randomness (test hook).
    ``corrupt`` maps a 1-based party index to deviation callbacks:
    ``reshare(gate_no, sent: (n,) incl. self, rng) -> (n,)`` and/or
    ``output(share, rng) -> int``. Honest parties follow the protocol on
    whatever they receive; views record the actual traffic.
    """
    n, t, p = _common_params(input_views, circuit)
    corrupt = corrupt or {}
    mul_ids = circuit.mul_gates
    if tapes is None:
        tapes = rng.integers(0, p, size=(len(mul_ids), n, t)).astype(np.int64)
    else:
        tapes = np.asarray(tapes, dtype=np.int64) % p
        if tapes.shape != (len(mul_ids), n, t):
            raise ParameterError("tape shape mismatch")
    lam = lagrange_weights(list(range(1, n + 1)), 0, p)
    xs = np.arange(1, n + 1, dtype=np.int64)
    vand = np.stack([xs**0] + [pow_mod_vec(xs, d, p) for d in range(1, t + 1)], axis=0)  # (t+1, n)

    shares: list[np.ndarray] = []  # per gate, (n,) share vector
    incoming: list[list[np.ndarray]] = [[] for _ in range(n)]
    mul_no = 0
    out_gate = None
    for g in circuit.gates:
        if g.op == "input":
            shares.append(np.array([v.coeffs[g.args[0], 0] for v in input_views], dtype=np.int64))
        elif g.op == "const":
            shares.append(np.full(n, g.args[0] % p, dtype=np.int64))
        elif g.op == "add":
            shares.append((shares[g.args[0]] + shares[g.args[1]]) % p)
        elif g.op == "sub":
            shares.append((shares[g.args[0]] - shares[g.args[1]]) % p)
        elif g.op == "mul":
            z = shares[g.args[0]] * shares[g.args[1]] % p
            coeffs = np.concatenate([z[:, None], tapes[mul_no]], axis=1)  # (n, t+1)
            # Q[i, j] = q_i(x_j)
            Q = np.zeros((n, n), dtype=np.int64)
            for d in range(t + 1):
                Q = (Q + np.outer(coeffs[:, d], vand[d])) % p
            for i, hooks in corrupt.items():
                if "reshare" in hooks:
                    Q[i - 1] = np.asarray(hooks["reshare"](mul_no, Q[i - 1].copy(), rng), dtype=np.int64) % p
            for i in range(n):
                incoming[i].append(np.delete(Q[:, i], i))
            shares.append(lam @ Q % p)
            mul_no += 1
        else:
            out_gate = g.args[0]
    z_out = shares[out_gate].copy()
    for i, hooks in corrupt.items():
        if "output" in hooks:
            z_out[i - 1] = int(hooks["output"](int(z_out[i - 1]), rng)) % p
    outputs: list[int | None] = []
    for i in range(n):
        incoming[i].append(np.delete(z_out, i))
        poly = rs_decode(list(range(1, n + 1)), [int(v) for v in z_out], t, p)
        outputs.append(None if poly is None else poly[0])
    views = [
        MpcView(
            prefix=encode_view(input_views[i]),
            mpc_randomness=tapes[:, i, :].copy(),
            rounds=incoming[i],
            output=outputs[i],
        )
        for i in range(n)
    ]
    return views, outputs


def pow_mod_vec(xs: np.ndarray, d: int, p: int) -> np.ndarray:
    out = np.ones_like(xs)
    base = xs % p
    e = d
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    return out


def replay_party(view: MpcView, circuit: Circuit):
    """Recompute party i's outgoing messages from (prefix, tape, incoming).

    Returns (outgoing_per_round, recomputed_output) where each mul round's
    outgoing is the (n-1,) vector sent to the others (ascending index) and
    the output round's outgoing is the broadcast share (same to everyone).
    Raises ProtocolViolation if the prefix is missing/undecodable.
    """
    if not view.prefix:
        raise ProtocolViolation("view has no sharing prefix")
    try:
        pre = view.prefix_view()
    except ParameterError as exc:
        raise ProtocolViolation("undecodable sharing prefix") from exc
    n, t, p, i = pre.n, pre.t, pre.p, pre.party_index
    mul_ids = circuit.mul_gates
    if view.mpc_randomness.shape != (len(mul_ids), t):
        return None
    if len(view.rounds) != len(mul_ids) + 1 or any(r.shape != (n - 1,) for r in view.rounds):
        return None
    if (view.mpc_randomness < 0).any() or (view.mpc_randomness >= p).any():
        return None
    if any((r < 0).any() or (r >= p).any() for r in view.rounds):
        return None
    others = [j for j in range(1, n + 1) if j != i]
    lam = lagrange_weights(list(range(1, n + 1)), 0, p)
    my_lam = int(lam[i - 1])
    lam_others = np.delete(lam, i - 1)
    wires: list[int] = []
    outgoing: list[np.ndarray] = []
    mul_no = 0
    out_gate = None
    for g in circuit.gates:
        if g.op == "input":
            wires.append(int(pre.coeffs[g.args[0], 0]))
        elif g.op == "const":
            wires.append(g.args[0] % p)
        elif g.op == "add":
            wires.append((wires[g.args[0]] + wires[g.args[1]]) % p)
        elif g.op == "sub":
            wires.append((wires[g.args[0]] - wires[g.args[1]]) % p)
        elif g.op == "mul":
            z = wires[g.args[0]] * wires[g.args[1]] % p
            coeffs = [z, *view.mpc_randomness[mul_no].tolist()]
            outgoing.append(np.array([polyval(coeffs, j, p) for j in others], dtype=np.int64))
            own = polyval(coeffs, i, p)
            new = (my_lam * own + int(lam_others @ view.rounds[mul_no])) % p
            wires.append(new)
            mul_no += 1
        else:
            out_gate = g.args[0]
    z_i = wires[out_gate]
    outgoing.append(np.full(n - 1, z_i, dtype=np.int64))
    ys: list[int | None] = [None] * n
    ys[i - 1] = z_i
    for idx, j in enumerate(others):
        ys[j - 1] = int(view.rounds[-1][idx]) % p
    poly = rs_decode(list(range(1, n + 1)), ys, t, p)
    return outgoing, (None if poly is None else poly[0])


def mpc_view_well_formed(view: MpcView, circuit: Circuit) -> bool:
    """Shapes sane and the recorded output matches the recomputed decode."""
    try:
        replayed = replay_party(view, circuit)
    except (ProtocolViolation, ParameterError, IndexError):
        return False
    if replayed is None:
        return False
    return replayed[1] == view.output


def mpc_view_consistent(v_i: MpcView, v_j: MpcView, circuit: Circuit) -> bool:
    """Both directions of message consistency plus sharing-prefix consistency."""
    if v_i.prefix is None or v_j.prefix is None or not v_i.prefix or not v_j.prefix:
        raise ProtocolViolation("consistency check requires sharing prefixes")
    try:
        pre_i, pre_j = v_i.prefix_view(), v_j.prefix_view()
    except ParameterError as exc:
        raise ProtocolViolation("undecodable sharing prefix") from exc
    if pre_i.party_index == pre_j.party_index:
        raise ParameterError("consistency check needs two distinct parties")
    if not vss_view_consistent(pre_i, pre_j):
        return False
    if not (mpc_view_well_formed(v_i, circuit) and mpc_view_well_formed(v_j, circuit)):
        return False
    out_i = replay_party(v_i, circuit)[0]
    out_j = replay_party(v_j, circuit)[0]
    i, j = pre_i.party_index, pre_j.party_index
    idx_j_in_i = [x for x in range(1, pre_i.n + 1) if x != i].index(j)
    idx_i_in_j = [x for x in range(1, pre_j.n + 1) if x != j].index(i)
    for rnd in range(len(out_i)):
        if int(out_i[rnd][idx_j_in_i]) != int(v_j.rounds[rnd][idx_i_in_j]) % pre_i.p:
            return False
        if int(out_j[rnd][idx_i_in_j]) != int(v_i.rounds[rnd][idx_j_in_i]) % pre_i.p:
            return False
    return True


def simulate_subset_views(
    circuit: Circuit,
    fake_input_views: list[VssView],
    subset: tuple[int, ...],
    rng: np.random.Generator,
) -> dict[int, MpcView]:
    """Honest run on the fake sharing, with the output round doctored so the
    opened subset decodes output 1 (views stay pairwise consistent)."""
    n, t, p = _common_params(fake_input_views, circuit)
    if len(subset) != t:
        raise ParameterError("subset size must be t")
    views, _ = mpc_execute(circuit, fake_input_views, rng)
    # degree-t polynomial through (0,1) and the subset's true output shares
    own_shares = {}
    for i in subset:
        replayed = replay_party(views[i - 1], circuit)
        own_shares[i] = int(replayed[0][-1][0])
    xs = [0, *subset]
    ys = [1, *[own_shares[i] for i in subset]]
    from .gf import interpolate

    poly = interpolate(xs, ys, p)
    broadcast = [polyval(poly, j, p) for j in range(1, n + 1)]
    out: dict[int, MpcView] = {}
    for i in subset:
        v = views[i - 1]
        rounds = [r.copy() for r in v.rounds]
        rounds[-1] = np.array([broadcast[j - 1] for j in range(1, n + 1) if j != i], dtype=np.int64)
        out[i] = MpcView(prefix=v.prefix, mpc_randomness=v.mpc_randomness.copy(), rounds=rounds, output=1)
    return out


# --- canonical encoding (extends the sharing-view layout) --------------------

_MPC_HDR = struct.Struct(">HH")


def encode_mpc_view(view: MpcView) -> bytes:
    n_mul, t = view.mpc_randomness.shape
    body = _MPC_HDR.pack(n_mul, t)
    body += view.mpc_randomness.astype(">u2").tobytes()
    for r in view.rounds:
        body += np.asarray(r, dtype=">u2").tobytes()
    out_val = _OUT_NONE if view.output is None else int(view.output)
    body += struct.pack(">H", out_val)
    return view.prefix + body


def decode_mpc_view(data: bytes, prefix_len: int) -> MpcView:
    prefix = data[:prefix_len]
    pre = decode_view(prefix)  # validates the prefix slice
    off = prefix_len
    if len(data) < off + _MPC_HDR.size:
        raise ParameterError("mpc view too short")
    n_mul, t = _MPC_HDR.unpack_from(data, off)
    off += _MPC_HDR.size
    n = pre.n
    need = 2 * n_mul * t + 2 * (n_mul + 1) * (n - 1) + 2
    if len(data) != off + need:
        raise ParameterError("mpc view length mismatch")
    tape = np.frombuffer(data, dtype=">u2", count=n_mul * t, offset=off).astype(np.int64)
    off += 2 * n_mul * t
    rounds = []
    for _ in range(n_mul + 1):
        r = np.frombuffer(data, dtype=">u2", count=n - 1, offset=off).astype(np.int64)
        rounds.append(r)
        off += 2 * (n - 1)
    (out_val,) = struct.unpack_from(">H", data, off)
    return MpcView(
        prefix=prefix,
        mpc_randomness=tape.reshape(n_mul, t),
        rounds=rounds,
        output=None if out_val == _OUT_NONE else out_val,
    )
