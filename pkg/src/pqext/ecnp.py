"""ExtCom-and-Prove: extractable commit stage plus an MPC-in-the-head
prove stage for an arbitrary circuit predicate over the committed message.

Commit stage: VSS the message into n views, commit each view under a full
strongly-extractable commitment (n parallel sub-sessions, multiplexed over
ECNP_SUB frames).

Prove stage: run the n-party protocol for "reconstruct and evaluate phi"
on the same views, commit each protocol view bitwise under the plain base
commitment, coin-flip an audit subset T (verifier commits r1 under a fresh
strong ExtCom, prover replies r2, verifier opens), then open commit-stage
views and protocol views for T. The verifier checks openings, the byte
prefix property, revealed outputs, and pairwise view consistency.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import extcom, wextcom
from .bits import as_bits, ints_to_packed, packed_to_ints, rand_bits
from .circuits import Circuit
from .errors import ParameterError, ProtocolViolation
from .mpchead import (
    MpcView,
    decode_mpc_view,
    encode_mpc_view,
    mpc_view_consistent,
    mpc_execute,
)
from .naor import commit_slots, sample_receiver_strings, sample_seeds, verify_slots
from .transport import Final, Frame, frame_decode, frame_encode
from .extcom import SCCommitterState, StrongParams, StrongSession, derive_subset
from .vss import decode_view, encode_view, view_byte_length, vss_recon, vss_share

_IDX = struct.Struct(">H")


def inner_params(params: StrongParams) -> StrongParams:
    """Parameters of the per-view strong commitments (message = one view)."""
    return StrongParams(
        n=params.n,
        t=params.t,
        lam=params.lam,
        k=params.k,
        ell=params.view_ell,
        coin_len=params.coin_bits,
        p=params.p,
        backend=params.backend,
        prg_key=params.prg_key,
    )


def coin_params(params: StrongParams) -> StrongParams:
    """Parameters of the prove-stage coin commitment (message = r1)."""
    return StrongParams(
        n=params.n,
        t=params.t,
        lam=params.lam,
        k=params.k,
        ell=params.coin_bits,
        coin_len=params.coin_bits,
        p=params.p,
        backend=params.backend,
        prg_key=params.prg_key,
    )


def mpc_view_bit_length(params: StrongParams, circuit: Circuit) -> int:
    n_mul = len(circuit.mul_gates)
    prefix = view_byte_length(params.n, params.t, params.chunks)
    body = 4 + 2 * n_mul * params.t + 2 * (n_mul + 1) * (params.n - 1) + 2
    return 8 * (prefix + body)


@dataclass
class EcnpProverState:
    params: StrongParams
    message: np.ndarray
    views: list  # outer VssView objects
    sc_states: list[SCCommitterState]
    commit_accept: bool | None = None
    mpc_views: list[MpcView] | None = None
    com_seeds: np.ndarray | None = None  # (n, L) step-2 commitment seeds
    com_r: np.ndarray | None = None  # (n, L) step-2 receiver strings


@dataclass
class EcnpVerifierState:
    params: StrongParams
    sessions: list[StrongSession]
    commit_accept: bool = False


@dataclass
class EcnpVerdict:
    commit_accept: bool
    prove_accept: bool = False
    opened: tuple[int, ...] = ()
    failure_reason: str = "none"


# --- sub-session multiplexing ---------------------------------------------------


def _wrap(session_idx: int, frames) -> list[Frame]:
    return [Frame("ECNP_SUB", _IDX.pack(session_idx) + frame_encode(f)) for f in frames]


def _demux(turn, n: int) -> list[list[Frame]]:
    out: list[list[Frame]] = [[] for _ in range(n)]
    for f in turn:
        if f.msg_type != "ECNP_SUB":
            raise ProtocolViolation(f"expected ECNP_SUB, got {f.msg_type}")
        (idx,) = _IDX.unpack_from(f.payload, 0)
        if not (0 <= idx < n):
            raise ProtocolViolation("bad sub-session index")
        out[idx].append(frame_decode(f.payload[_IDX.size :]))
    return out


def _step_all(subgens, turns):
    """Advance every live sub-generator one turn; returns (outs, results)."""
    outs, results = [], []
    for g, turn in zip(subgens, turns):
        try:
            out = g.send(turn)
        except StopIteration as stop:
            outs.append(None)
            results.append(stop.value)
            continue
        outs.append(out)
        results.append(None)
    return outs, results


# --- commit stage ----------------------------------------------------------------


def commit_prover_gen(params: StrongParams, message, rng: np.random.Generator):
    """Commit-stage prover; returns EcnpProverState."""
    message = as_bits(message, params.ell)
    views, _dealer = vss_share(message, params.n, params.t, rng, params.field)
    ip = inner_params(params)
    subgens = [
        extcom.committer_gen(ip, np.unpackbits(np.frombuffer(encode_view(v), dtype=np.uint8)), rng)
        for v in views
    ]
    for g in subgens:
        next(g)  # committers listen first
    state = EcnpProverState(params, message, views, [])
    turn = yield None
    while True:
        sub_turns = _demux(turn, params.n)
        if any(f.msg_type == "ABORT" for f in turn):
            state.commit_accept = False
            state.sc_states = [None] * params.n  # type: ignore[list-item]
            return state
        outs, results = _step_all(subgens, sub_turns)
        if all(out is None for out in outs):
            state.sc_states = [r for r in results]
            state.commit_accept = all(st.accepted for st in state.sc_states)
            return state
        if any(out is None for out in outs):
            raise ProtocolViolation("sub-sessions fell out of lockstep")
        frames = []
        for i, out in enumerate(outs):
            frames.extend(_wrap(i, out))
        turn = yield frames


def commit_verifier_gen(params: StrongParams, rng: np.random.Generator):
    """Commit-stage verifier; returns EcnpVerifierState."""
    subgens = [extcom.receiver_gen(inner_params(params), rng) for _ in range(params.n)]
    outs = [next(g) for g in subgens]
    results: list = [None] * params.n
    while True:
        frames = []
        finals = [isinstance(out, Final) for out in outs]
        for i, out in enumerate(outs):
            frames.extend(_wrap(i, out))
        if any(finals):
            if not all(finals):
                # a sub-receiver rejected early; abort the whole stage
                frames.append(Frame("ABORT", b"sub-session rejected"))
                yield Final(frames)
                for i, g in enumerate(subgens):
                    if finals[i]:
                        try:
                            g.send(None)
                        except StopIteration as stop:
                            results[i] = stop.value
                sessions = [r[1] if r else StrongSession(inner_params(params)) for r in results]
                return EcnpVerifierState(params, sessions, commit_accept=False)
            turn = yield Final(frames)
            break
        turn = yield frames
        sub_turns = _demux(turn, params.n)
        outs, step_results = _step_all(subgens, sub_turns)
        for i, r in enumerate(step_results):
            if r is not None:
                results[i] = r
        if all(out is None for out in outs):
            break
    # collect remaining results (receivers return after their Final turn)
    for i, g in enumerate(subgens):
        if results[i] is None:
            try:
                g.send(None)
            except StopIteration as stop:
                results[i] = stop.value
    sessions = [r[1] for r in results]
    accept = all(r[0] for r in results)
    return EcnpVerifierState(params, sessions, commit_accept=accept)


# --- prove stage -------------------------------------------------------------------


def prove_prover_gen(state: EcnpProverState, circuit: Circuit, rng: np.random.Generator):
    """Prove-stage prover; returns updated EcnpProverState (verdict applied)."""
    params = state.params
    if not state.commit_accept:
        raise ParameterError("prove stage requires an accepted commit stage")
    spec = params.spec()
    mpc_views, _outputs = mpc_execute(circuit, state.views, rng)
    state.mpc_views = mpc_views
    blobs = [encode_mpc_view(v) for v in mpc_views]
    L = mpc_view_bit_length(params, circuit)
    assert all(8 * len(b) == L for b in blobs)
    vbits = np.stack([np.unpackbits(np.frombuffer(b, dtype=np.uint8)) for b in blobs])

    turn = yield None
    com_r_frames = [f for f in turn if f.msg_type == "ECNP_PR_COM_R"]
    if len(com_r_frames) != params.n:
        raise ProtocolViolation("expected n ECNP_PR_COM_R frames")
    bb = params.view_wparams().block_bytes
    com_r = np.empty((params.n, L), dtype=np.uint64)
    for f in com_r_frames:
        (idx,) = _IDX.unpack_from(f.payload, 0)
        com_r[idx] = packed_to_ints(f.payload[_IDX.size :], 8 * bb, L)
    seeds = sample_seeds(rng, params.n * L, spec).reshape(params.n, L)
    state.com_seeds, state.com_r = seeds, com_r
    blocks = commit_slots(
        vbits.reshape(-1).astype(np.uint8), seeds.reshape(-1), com_r.reshape(-1), spec
    ).reshape(params.n, L)
    frames = [
        Frame("ECNP_PR_COMS", _IDX.pack(i) + ints_to_packed(blocks[i], 8 * bb))
        for i in range(params.n)
    ]

    # coin: prover is the receiver of the verifier's strong commitment to r1
    cp = coin_params(params)
    coin_gen = extcom.receiver_gen(cp, rng)
    frames.extend(next(coin_gen))
    turn = yield frames
    coin_result = None
    while coin_result is None:
        try:
            out = coin_gen.send([f for f in turn if f.msg_type.startswith("SC_")])
        except StopIteration as stop:
            coin_result = stop.value
            break
        if isinstance(out, Final):
            # receiver's verdict turn; piggyback r2 on it
            r2 = rand_bits(rng, cp.ell)
            turn = yield [*out, Frame("ECNP_PR_R2", np.packbits(r2).tobytes())]
            try:
                coin_gen.send(None)
            except StopIteration as stop:
                coin_result = stop.value
        else:
            turn = yield list(out)
    coin_accept, coin_session = coin_result
    if not coin_accept:
        yield Final([Frame("ABORT", b"coin commitment rejected")])
        state.commit_accept = state.commit_accept
        return state

    # verifier opens r1 via the strong decommit stage
    dec_gen = extcom.decommit_receiver_gen(coin_session)
    next(dec_gen)
    try:
        dec_gen.send([f for f in turn if f.msg_type == "SC_DECOMMIT"])
        r1 = None
    except StopIteration:
        r1 = None
    if r1 is None:
        # decommit receiver yields its STATUS turn before returning
        pass
    raise AssertionError("unreachable")


def _run_embedded(gen, first_turn):
    """Drive an embedded generator that only ever yields Final once."""
    raise NotImplementedError
