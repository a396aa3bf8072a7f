"""k-pair XOR-share commitment with selective opening (wExtCom).

Commit phase: the committer splits m into k pairs (v0_i, v1_i) with
v0_i XOR v1_i = m, commits to all 2k strings bitwise under the Naor-style
base commitment, opens the challenged half of every pair, and the receiver
verifies those openings. Cross-pair XOR consistency is checked only at
decommit time, so a commit-stage accept says nothing about pair agreement.

Receiver strings are shared per bit slot: one 3λ-bit string per message bit
position, reused across all 2k share strings of the session.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .bits import as_bits, ints_to_packed, packed_to_ints, rand_bits
from .errors import ParameterError
from .naor import (
    BaseCommitment,
    base_val,
    commit_slots,
    sample_receiver_strings,
    sample_seeds,
    verify_slots,
)
from .prg import PrgSpec
from .transport import Final, Frame

_WINIT_HDR = struct.Struct(">HHI")


@dataclass(frozen=True)
class WParams:
    lam: int
    k: int
    ell: int
    backend: str = "toy"
    prg_key: int = 0

    def __post_init__(self):
        if self.k < 1 or self.ell < 1:
            raise ParameterError("need k >= 1 and ell >= 1")
        self.spec()  # validates lambda/backend

    def spec(self) -> PrgSpec:
        return PrgSpec(self.lam, backend_id=self.backend, key=self.prg_key)

    @property
    def block_bytes(self) -> int:
        return (3 * self.lam + 7) // 8

    @property
    def seed_bytes(self) -> int:
        return (self.lam + 7) // 8


@dataclass
class ShareMatrix:
    """The k pairs of XOR shares of the message."""

    k: int
    message: np.ndarray  # (ell,) bits
    v0: np.ndarray  # (k, ell) bits
    v1: np.ndarray  # (k, ell) bits


@dataclass
class WCommitment:
    """Receiver's transcript of one wExtCom session."""

    params: WParams
    receiver_r: np.ndarray  # (ell,) uint64
    blocks: np.ndarray  # (k, 2, ell) uint64
    challenge: np.ndarray | None = None  # (k,) bits
    opening: tuple[np.ndarray, np.ndarray] | None = None  # values (k,ell), seeds (k,ell)
    accepted: str = "pending"

    def base_com(self, i: int, b: int) -> BaseCommitment:
        return BaseCommitment(self.params.lam, self.receiver_r, self.blocks[i, b])


@dataclass
class WDecommit:
    message: np.ndarray  # (ell,) bits
    values: np.ndarray  # (k, 2, ell) bits
    seeds: np.ndarray  # (k, 2, ell) uint64


@dataclass
class WCommitterState:
    params: WParams
    shares: ShareMatrix
    seeds: np.ndarray  # (k, 2, ell) uint64
    receiver_r: np.ndarray  # (ell,) uint64
    challenge: np.ndarray | None = None

    def decommit(self) -> WDecommit:
        values = np.stack([self.shares.v0, self.shares.v1], axis=1)
        return WDecommit(self.shares.message.copy(), values, self.seeds.copy())


@dataclass
class WReceiverResult:
    accept: bool
    com: WCommitment


# --- bulk helpers (also used by the parallel layers) -------------------------


def make_shares(params: WParams, message, rng: np.random.Generator) -> ShareMatrix:
    m = as_bits(message, params.ell)
    v0 = rng.integers(0, 2, size=(params.k, params.ell), dtype=np.uint8)
    v1 = v0 ^ m[None, :]
    return ShareMatrix(params.k, m, v0, v1)


def commit_blocks(params: WParams, shares: ShareMatrix, receiver_r: np.ndarray, rng: np.random.Generator):
    """Commit all 2k share strings; returns (seeds (k,2,ell), blocks (k,2,ell))."""
    spec = params.spec()
    k, ell = params.k, params.ell
    mbits = np.stack([shares.v0, shares.v1], axis=1).reshape(-1)
    seeds = sample_seeds(rng, mbits.size, spec)
    r_full = np.broadcast_to(receiver_r, (2 * k, ell)).reshape(-1)
    blocks = commit_slots(mbits, seeds, r_full, spec)
    return seeds.reshape(k, 2, ell), blocks.reshape(k, 2, ell)


def check_opening(params: WParams, receiver_r, blocks, challenge, values, seeds) -> bool:
    """Base-verify at every challenged position (the commit-phase check)."""
    k, ell = params.k, params.ell
    challenge = as_bits(challenge, k)
    picked = blocks[np.arange(k), challenge.astype(np.int64), :]  # (k, ell)
    r_full = np.broadcast_to(receiver_r, (k, ell))
    ok = verify_slots(
        picked.reshape(-1),
        np.asarray(values, dtype=np.uint8).reshape(-1),
        np.asarray(seeds, dtype=np.uint64).reshape(-1),
        r_full.reshape(-1),
        params.spec(),
    )
    return bool(ok.all())


def w_verify_decommit(com: WCommitment, message, decom: WDecommit) -> bool:
    """All 2k openings verify and every pair XORs to the message."""
    params = com.params
    try:
        m = as_bits(message, params.ell)
    except ParameterError:
        return False
    if decom.values.shape != (params.k, 2, params.ell) or decom.seeds.shape != decom.values.shape:
        return False
    r_full = np.broadcast_to(com.receiver_r, (2 * params.k, params.ell)).reshape(-1)
    ok = verify_slots(
        com.blocks.reshape(-1),
        decom.values.reshape(-1).astype(np.uint8),
        decom.seeds.reshape(-1),
        r_full,
        params.spec(),
    )
    if not ok.all():
        return False
    xors = decom.values[:, 0, :] ^ decom.values[:, 1, :]
    return bool((xors == m[None, :]).all())


def accepting_opening_check(com: WCommitment, c, values, decoms) -> bool:
    """Accepting opening w.r.t. challenge c: base_verify at challenged slots."""
    c = as_bits(c)
    if c.size != com.params.k:
        raise ParameterError("challenge length must be k")
    return check_opening(com.params, com.receiver_r, com.blocks, c, values, decoms)


def vcom_val(com: WCommitment, cap: int = 12):
    """Committed value of the 2k-commitment bundle: m if every base
    commitment decodes uniquely and all pairs XOR to the same m, else None.

    Oracle operation (exhaustive seed search per slot).
    """
    params = com.params
    spec = params.spec()
    vals = np.empty((params.k, 2, params.ell), dtype=np.uint8)
    for i in range(params.k):
        for b in (0, 1):
            got = base_val(com.base_com(i, b), spec, cap=cap)
            if got is None:
                return None
            vals[i, b] = got
    xors = vals[:, 0, :] ^ vals[:, 1, :]
    if not (xors == xors[0]).all():
        return None
    return xors[0]


# --- wire formats -------------------------------------------------------------


def pack_w_init(params: WParams, receiver_r: np.ndarray) -> bytes:
    head = _WINIT_HDR.pack(params.lam, params.k, params.ell)
    return head + ints_to_packed(receiver_r, 8 * params.block_bytes)


def parse_w_init(payload: bytes) -> tuple[int, int, int, np.ndarray]:
    if len(payload) < _WINIT_HDR.size:
        raise ParameterError("short W_INIT")
    lam, k, ell = _WINIT_HDR.unpack_from(payload, 0)
    bb = (3 * lam + 7) // 8
    r = packed_to_ints(payload[_WINIT_HDR.size :], 8 * bb, ell)
    return lam, k, ell, r


def pack_blocks(params: WParams, blocks: np.ndarray) -> bytes:
    return ints_to_packed(blocks.reshape(-1), 8 * params.block_bytes)


def parse_blocks(params: WParams, payload: bytes) -> np.ndarray:
    flat = packed_to_ints(payload, 8 * params.block_bytes, 2 * params.k * params.ell)
    return flat.reshape(params.k, 2, params.ell)


def pack_challenge(challenge: np.ndarray) -> bytes:
    return np.packbits(challenge).tobytes()


def parse_challenge(params: WParams, payload: bytes) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))
    if bits.size < params.k:
        raise ParameterError("short challenge")
    return bits[: params.k]


def pack_opening(params: WParams, values: np.ndarray, seeds: np.ndarray) -> bytes:
    vb = np.packbits(values.reshape(-1)).tobytes()
    sb = ints_to_packed(seeds.reshape(-1), 8 * params.seed_bytes)
    return vb + sb


def parse_opening(params: WParams, payload: bytes) -> tuple[np.ndarray, np.ndarray]:
    k, ell = params.k, params.ell
    nv = (k * ell + 7) // 8
    values = np.unpackbits(np.frombuffer(payload[:nv], dtype=np.uint8))[: k * ell].reshape(k, ell)
    seeds = packed_to_ints(payload[nv:], 8 * params.seed_bytes, k * ell).reshape(k, ell)
    return values, seeds


def pack_decommit(params: WParams, decom: WDecommit) -> bytes:
    mb = np.packbits(decom.message).tobytes()
    vb = np.packbits(decom.values.reshape(-1)).tobytes()
    sb = ints_to_packed(decom.seeds.reshape(-1), 8 * params.seed_bytes)
    return mb + vb + sb


def parse_decommit(params: WParams, payload: bytes) -> WDecommit:
    k, ell = params.k, params.ell
    nm = (ell + 7) // 8
    nv = (2 * k * ell + 7) // 8
    if len(payload) != nm + nv + 2 * k * ell * params.seed_bytes:
        raise ParameterError("decommit length mismatch")
    message = np.unpackbits(np.frombuffer(payload[:nm], dtype=np.uint8))[:ell]
    values = np.unpackbits(np.frombuffer(payload[nm : nm + nv], dtype=np.uint8))[: 2 * k * ell]
    seeds = packed_to_ints(payload[nm + nv :], 8 * params.seed_bytes, 2 * k * ell)
    return WDecommit(message, values.reshape(k, 2, ell), seeds.reshape(k, 2, ell))


# --- party generators ---------------------------------------------------------


def committer_gen(params: WParams, message, rng: np.random.Generator):
    """Commit-phase committer; returns its state (accept comes from STATUS)."""
    turn = yield None
    lam, k, ell, receiver_r = parse_w_init(turn[0].payload)
    if (lam, k, ell) != (params.lam, params.k, params.ell):
        raise ParameterError("receiver announced different parameters")
    shares = make_shares(params, message, rng)
    seeds, blocks = commit_blocks(params, shares, receiver_r, rng)
    state = WCommitterState(params, shares, seeds, receiver_r)
    turn = yield [Frame("W_COMS", pack_blocks(params, blocks))]
    challenge = parse_challenge(params, turn[0].payload)
    state.challenge = challenge
    idx = np.arange(k)
    values = np.stack([shares.v0, shares.v1], axis=1)[idx, challenge.astype(np.int64), :]
    open_seeds = seeds[idx, challenge.astype(np.int64), :]
    turn = yield [Frame("W_OPENING", pack_opening(params, values, open_seeds))]
    accepted = turn[0].msg_type == "STATUS" and turn[0].payload == b"\x01"
    return state, accepted


def receiver_gen(params: WParams, rng: np.random.Generator):
    """Commit-phase receiver; returns WReceiverResult."""
    spec = params.spec()
    receiver_r = sample_receiver_strings(rng, params.ell, spec)
    turn = yield [Frame("W_INIT", pack_w_init(params, receiver_r))]
    blocks = parse_blocks(params, turn[0].payload)
    challenge = rand_bits(rng, params.k)
    turn = yield [Frame("W_CHALLENGE", pack_challenge(challenge))]
    values, seeds = parse_opening(params, turn[0].payload)
    ok = check_opening(params, receiver_r, blocks, challenge, values, seeds)
    com = WCommitment(
        params,
        receiver_r,
        blocks,
        challenge=challenge,
        opening=(values, seeds),
        accepted="accept" if ok else "reject",
    )
    yield Final([Frame("STATUS", b"\x01" if ok else b"\x00")])
    return WReceiverResult(ok, com)


def decommitter_gen(state: WCommitterState):
    turn = yield [Frame("W_DECOMMIT", pack_decommit(state.params, state.decommit()))]
    return turn[0].payload == b"\x01"


def decommit_receiver_gen(com: WCommitment):
    turn = yield None
    decom = parse_decommit(com.params, turn[0].payload)
    m = decom.message
    ok = com.accepted == "accept" and w_verify_decommit(com, m, decom)
    yield Final([Frame("STATUS", b"\x01" if ok else b"\x00")])
    return (m if ok else None), ok


# --- in-process conveniences ---------------------------------------------------


def w_commit_stage(message, params: WParams, committer_rng, receiver_rng, transcript=None):
    """One honest commit-stage run; returns (WCommitment, state, accept)."""
    from .transport import run_local_pair

    (state, c_accept), result = run_local_pair(
        committer_gen(params, message, committer_rng),
        receiver_gen(params, receiver_rng),
        names=("committer", "receiver"),
        transcript=transcript,
    )
    assert c_accept == result.accept
    return result.com, state, result.accept


def w_decommit_stage(com: WCommitment, state: WCommitterState, transcript=None):
    from .transport import run_local_pair

    ok_c, (message, ok_r) = run_local_pair(
        decommitter_gen(state),
        decommit_receiver_gen(com),
        names=("committer", "receiver"),
        transcript=transcript,
    )
    return message, ok_r
