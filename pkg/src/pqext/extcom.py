"""Strongly extractable commitment: VSS views under parallel wExtCom, a
one-sided coin flip choosing a size-t audit subset, and pairwise
consistency checks of the opened sharing views.

Round schedule (C = committer, R = receiver):

    R->C  SC_INIT x n        per-session receiver strings
    C->R  SC_WCOMS x n       share-string commitments for each view
    R->C  SC_CHALLENGES      all n challenge vectors
    C->R  SC_OPENINGS x n    challenged halves
    R->C  STATUS             opening verdict (reject ends the session)
    C->R  SC_COIN_INIT       committer plays wExtCom-receiver for r1
    R->C  SC_COIN_COMS       receiver commits to r1
    C->R  SC_COIN_CHALLENGE
    R->C  SC_COIN_OPENING
    C->R  SC_COIN_R2         committer's half of the coin
    R->C  SC_COIN_OPEN       full decommitment of r1
    C->R  SC_SUBSET_OPEN x t full wExtCom decommitments for i in T
    R->C  SC_VERDICT         accept iff openings valid and views consistent
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .bits import as_bits, bits_to_int, int_to_bits, rand_bits
from .errors import ParameterError, ProtocolViolation
from .prg import PrgSpec, prg_expand
from .transport import Final, Frame
from .vss import (
    FieldParams,
    VssView,
    decode_view,
    encode_view,
    view_byte_length,
    vss_recon,
    vss_share,
    vss_view_consistent,
)
from . import wextcom
from .wextcom import WCommitment, WDecommit, WParams

_IDX = struct.Struct(">H")


@dataclass(frozen=True)
class StrongParams:
    """n virtual players, t-subset audit; k pairs per inner wExtCom."""

    n: int
    t: int
    lam: int
    k: int
    ell: int
    coin_len: int | None = None
    p: int = 257
    backend: str = "toy"
    prg_key: int = 0

    def __post_init__(self):
        if self.t < 1 or self.t > self.n // 3:
            raise ParameterError("need 1 <= t <= n/3")
        if self.ell < 1:
            raise ParameterError("ell must be positive")
        self.spec()
        if self.field.p <= self.n:
            raise ParameterError("field too small for the player count")

    def spec(self) -> PrgSpec:
        return PrgSpec(self.lam, backend_id=self.backend, key=self.prg_key)

    @property
    def field(self) -> FieldParams:
        return FieldParams(self.p)

    @property
    def coin_bits(self) -> int:
        return self.coin_len if self.coin_len is not None else self.lam

    @property
    def chunks(self) -> int:
        w = self.field.chunk_width
        return -(-self.ell // w)

    @property
    def view_ell(self) -> int:
        return 8 * view_byte_length(self.n, self.t, self.chunks)

    def view_wparams(self) -> WParams:
        return WParams(self.lam, self.k, self.view_ell, self.backend, self.prg_key)

    def coin_wparams(self) -> WParams:
        return WParams(self.lam, self.k, self.coin_bits, self.backend, self.prg_key)


@dataclass
class CoinRecord:
    r1_com: WCommitment | None = None
    r1: np.ndarray | None = None
    r2: np.ndarray | None = None

    @property
    def result(self) -> np.ndarray | None:
        if self.r1 is None or self.r2 is None:
            return None
        return self.r1 ^ self.r2


@dataclass
class StrongSession:
    """Receiver-side record of one commit stage."""

    params: StrongParams
    wcoms: list[WCommitment] = field(default_factory=list)
    coin: CoinRecord = field(default_factory=CoinRecord)
    subset: tuple[int, ...] = ()
    opened_views: dict[int, VssView] = field(default_factory=dict)
    verdict: str = "pending"
    reject_reason: str = ""


@dataclass
class SCCommitterState:
    params: StrongParams
    views: list[VssView]
    wstates: list[wextcom.WCommitterState]
    subset: tuple[int, ...] = ()
    accepted: bool | None = None


def derive_subset(r, n: int, t: int, spec: PrgSpec) -> tuple[int, ...]:
    """Deterministic size-t subset of {1..n} from a coin bitstring.

    Reads ceil(log2 n)-bit chunks as candidate indices, rejection-sampling
    duplicates and overflow; the stream is extended by expanding its last
    λ bits whenever it runs dry.
    """
    if t > n:
        raise ParameterError("subset size exceeds n")
    if t == n:
        return tuple(range(1, n + 1))
    bits = [int(b) for b in as_bits(r)]
    chunk = max(1, (n - 1).bit_length())
    lam = spec.seed_len_bits
    chosen: list[int] = []
    pos = 0
    ctr = 0
    while len(chosen) < t:
        if pos + chunk > len(bits):
            # counter-tweaked expansion of the stream tail; a plain
            # tail -> expand(tail) map cycles through <= 2^lam states and can
            # starve the rejection sampler at small lam
            ctr += 1
            if ctr >= (1 << lam):
                raise ParameterError("subset derivation did not converge")
            tail = bits[-lam:] if len(bits) >= lam else [0] * (lam - len(bits)) + bits
            seed = bits_to_int(np.array(tail, dtype=np.uint8)) ^ ctr
            bits.extend(int(b) for b in prg_expand(int_to_bits(seed, lam), spec))
            continue
        cand = bits_to_int(np.array(bits[pos : pos + chunk], dtype=np.uint8))
        pos += chunk
        if cand < n and (cand + 1) not in chosen:
            chosen.append(cand + 1)
    return tuple(sorted(chosen))


def _sub(idx: int, msg_type: str, payload: bytes) -> Frame:
    return Frame(msg_type, _IDX.pack(idx) + payload)


def _unsub(frames, msg_type: str, count: int) -> list[bytes]:
    if len(frames) != count or any(f.msg_type != msg_type for f in frames):
        raise ProtocolViolation(f"expected {count} {msg_type} frames")
    out: list[bytes | None] = [None] * count
    for f in frames:
        (idx,) = _IDX.unpack_from(f.payload, 0)
        if not (0 <= idx < count) or out[idx] is not None:
            raise ProtocolViolation("bad sub-session index")
        out[idx] = f.payload[_IDX.size :]
    return out  # type: ignore[return-value]


def _check_views_consistent(views: dict[int, VssView], params: StrongParams) -> tuple[bool, str]:
    for i, v in views.items():
        if (v.party_index, v.n, v.t, v.p, v.chunks) != (i, params.n, params.t, params.p, params.chunks):
            return False, f"view {i} header mismatch"
    idxs = sorted(views)
    for a in range(len(idxs)):
        for b in range(a + 1, len(idxs)):
            if not vss_view_consistent(views[idxs[a]], views[idxs[b]]):
                return False, f"inconsistent pair ({idxs[a]},{idxs[b]})"
    return True, ""


def committer_gen(params: StrongParams, message, rng: np.random.Generator):
    """Commit-stage committer; returns SCCommitterState (accepted flag set)."""
    wp = params.view_wparams()
    cp = params.coin_wparams()
    message = as_bits(message, params.ell)
    views, _dealer = vss_share(message, params.n, params.t, rng, params.field)
    view_bits = [np.unpackbits(np.frombuffer(encode_view(v), dtype=np.uint8)) for v in views]

    turn = yield None
    inits = _unsub(turn, "SC_INIT", params.n)
    shares, seeds, r_strings, out = [], [], [], []
    for i in range(params.n):
        lam, k, ell, r_i = wextcom.parse_w_init(inits[i])
        if (lam, k, ell) != (wp.lam, wp.k, wp.ell):
            raise ProtocolViolation("inner session parameter mismatch")
        sh = wextcom.make_shares(wp, view_bits[i], rng)
        sd, blocks = wextcom.commit_blocks(wp, sh, r_i, rng)
        shares.append(sh)
        seeds.append(sd)
        r_strings.append(r_i)
        out.append(_sub(i, "SC_WCOMS", wextcom.pack_blocks(wp, blocks)))
    wstates = [
        wextcom.WCommitterState(wp, shares[i], seeds[i], r_strings[i]) for i in range(params.n)
    ]
    state = SCCommitterState(params, views, wstates)

    turn = yield out
    if len(turn) != 1 or turn[0].msg_type != "SC_CHALLENGES":
        raise ProtocolViolation("expected SC_CHALLENGES")
    all_ch = np.unpackbits(np.frombuffer(turn[0].payload, dtype=np.uint8))[: params.n * wp.k]
    all_ch = all_ch.reshape(params.n, wp.k)
    openings = []
    for i in range(params.n):
        ch = all_ch[i]
        wstates[i].challenge = ch
        idx = np.arange(wp.k)
        values = np.stack([shares[i].v0, shares[i].v1], axis=1)[idx, ch.astype(np.int64), :]
        open_seeds = seeds[i][idx, ch.astype(np.int64), :]
        openings.append(_sub(i, "SC_OPENINGS", wextcom.pack_opening(wp, values, open_seeds)))

    turn = yield openings
    if turn[0].msg_type != "STATUS":
        raise ProtocolViolation("expected STATUS")
    if turn[0].payload != b"\x01":
        state.accepted = False
        return state

    # coin flip: committer is the wExtCom receiver for r1
    coin_r = wextcom.sample_receiver_strings(rng, cp.ell, cp.spec())
    turn = yield [Frame("SC_COIN_INIT", wextcom.pack_w_init(cp, coin_r))]
    coin_blocks = wextcom.parse_blocks(cp, turn[0].payload)
    coin_ch = rand_bits(rng, cp.k)
    turn = yield [Frame("SC_COIN_CHALLENGE", wextcom.pack_challenge(coin_ch))]
    cv, cs = wextcom.parse_opening(cp, turn[0].payload)
    if not wextcom.check_opening(cp, coin_r, coin_blocks, coin_ch, cv, cs):
        yield Final([Frame("ABORT", b"coin opening invalid")])
        state.accepted = False
        return state
    r2 = rand_bits(rng, cp.ell)
    turn = yield [Frame("SC_COIN_R2", np.packbits(r2).tobytes())]
    coin_com = WCommitment(cp, coin_r, coin_blocks, challenge=coin_ch, opening=(cv, cs), accepted="accept")
    decom = wextcom.parse_decommit(cp, turn[0].payload)
    if not wextcom.w_verify_decommit(coin_com, decom.message, decom):
        raise ProtocolViolation("receiver's coin decommitment invalid")
    r1 = decom.message
    subset = derive_subset(r1 ^ r2, params.n, params.t, params.spec())
    state.subset = subset
    opens = [
        _sub(j, "SC_SUBSET_OPEN", wextcom.pack_decommit(wp, wstates[i - 1].decommit()))
        for j, i in enumerate(subset)
    ]
    turn = yield opens
    if turn[0].msg_type != "SC_VERDICT":
        raise ProtocolViolation("expected SC_VERDICT")
    state.accepted = turn[0].payload == b"\x01"
    return state


def receiver_gen(params: StrongParams, rng: np.random.Generator):
    """Commit-stage receiver; returns (accept, StrongSession)."""
    wp = params.view_wparams()
    cp = params.coin_wparams()
    spec = wp.spec()
    session = StrongSession(params)
    r_strings = [wextcom.sample_receiver_strings(rng, wp.ell, spec) for _ in range(params.n)]
    turn = yield [_sub(i, "SC_INIT", wextcom.pack_w_init(wp, r_strings[i])) for i in range(params.n)]
    blocks = [wextcom.parse_blocks(wp, pl) for pl in _unsub(turn, "SC_WCOMS", params.n)]
    challenges = rng.integers(0, 2, size=(params.n, wp.k), dtype=np.uint8)
    turn = yield [Frame("SC_CHALLENGES", np.packbits(challenges.reshape(-1)).tobytes())]
    opening_payloads = _unsub(turn, "SC_OPENINGS", params.n)
    all_ok = True
    for i in range(params.n):
        values, seeds = wextcom.parse_opening(wp, opening_payloads[i])
        ok = wextcom.check_opening(wp, r_strings[i], blocks[i], challenges[i], values, seeds)
        session.wcoms.append(
            WCommitment(
                wp,
                r_strings[i],
                blocks[i],
                challenge=challenges[i],
                opening=(values, seeds),
                accepted="accept" if ok else "reject",
            )
        )
        all_ok &= ok
    if not all_ok:
        session.verdict = "reject"
        session.reject_reason = "invalid challenged opening"
        yield Final([Frame("STATUS", b"\x00"), Frame("SC_VERDICT", b"\x00")])
        return False, session

    turn = yield [Frame("STATUS", b"\x01")]
    # coin: receiver commits to r1 under wExtCom
    lam, k, ell, coin_r = wextcom.parse_w_init(turn[0].payload)
    if (lam, k, ell) != (cp.lam, cp.k, cp.ell):
        raise ProtocolViolation("coin parameter mismatch")
    r1 = rand_bits(rng, cp.ell)
    coin_shares = wextcom.make_shares(cp, r1, rng)
    coin_seeds, coin_blocks = wextcom.commit_blocks(cp, coin_shares, coin_r, rng)
    session.coin.r1 = r1
    turn = yield [Frame("SC_COIN_COMS", wextcom.pack_blocks(cp, coin_blocks))]
    coin_ch = wextcom.parse_challenge(cp, turn[0].payload)
    idx = np.arange(cp.k)
    cv = np.stack([coin_shares.v0, coin_shares.v1], axis=1)[idx, coin_ch.astype(np.int64), :]
    cs = coin_seeds[idx, coin_ch.astype(np.int64), :]
    turn = yield [Frame("SC_COIN_OPENING", wextcom.pack_opening(cp, cv, cs))]
    if turn[0].msg_type == "ABORT":
        session.verdict = "reject"
        session.reject_reason = "committer aborted the coin"
        return False, session
    r2 = np.unpackbits(np.frombuffer(turn[0].payload, dtype=np.uint8))[: cp.ell]
    session.coin.r2 = r2
    coin_state = wextcom.WCommitterState(cp, coin_shares, coin_seeds, coin_r, challenge=coin_ch)
    turn = yield [Frame("SC_COIN_OPEN", wextcom.pack_decommit(cp, coin_state.decommit()))]

    subset = derive_subset(r1 ^ r2, params.n, params.t, params.spec())
    session.subset = subset
    payloads = _unsub(turn, "SC_SUBSET_OPEN", params.t)
    ok = True
    reason = ""
    for j, i in enumerate(subset):
        decom = wextcom.parse_decommit(wp, payloads[j])
        if not wextcom.w_verify_decommit(session.wcoms[i - 1], decom.message, decom):
            ok, reason = False, f"invalid decommitment at index {i}"
            break
        try:
            view = decode_view(np.packbits(decom.message).tobytes()[: wp.ell // 8])
        except ParameterError:
            ok, reason = False, f"undecodable view at index {i}"
            break
        session.opened_views[i] = view
    if ok:
        ok, reason = _check_views_consistent(session.opened_views, params)
    session.verdict = "accept" if ok else "reject"
    session.reject_reason = reason
    yield Final([Frame("SC_VERDICT", b"\x01" if ok else b"\x00")])
    return ok, session


def decommit_frames(state: SCCommitterState) -> list[Frame]:
    wp = state.params.view_wparams()
    return [
        _sub(i, "SC_DECOMMIT", wextcom.pack_decommit(wp, state.wstates[i].decommit()))
        for i in range(state.params.n)
    ]


def decommit_views(session: StrongSession, payloads: list[bytes]) -> list[VssView | None]:
    """Per-slot views from decommitment payloads; invalid slots become None."""
    params = session.params
    wp = params.view_wparams()
    views: list[VssView | None] = []
    for i in range(params.n):
        view = None
        try:
            decom = wextcom.parse_decommit(wp, payloads[i])
            if session.verdict == "accept" and wextcom.w_verify_decommit(
                session.wcoms[i], decom.message, decom
            ):
                view = decode_view(np.packbits(decom.message).tobytes()[: wp.ell // 8])
        except (ParameterError, ProtocolViolation):
            view = None
        views.append(view)
    return views


def decommit_message(session: StrongSession, payloads: list[bytes]):
    return recon_message(decommit_views(session, payloads), session.params)


def decommitter_gen(state: SCCommitterState):
    turn = yield decommit_frames(state)
    return turn[0].payload == b"\x01"


def decommit_receiver_gen(session: StrongSession):
    """Receiver side of the decommit stage; returns the message or None."""
    turn = yield None
    payloads = _unsub(turn, "SC_DECOMMIT", session.params.n)
    message = decommit_message(session, payloads)
    yield Final([Frame("STATUS", b"\x01" if message is not None else b"\x00")])
    return message


def recon_message(views: list[VssView | None], params: StrongParams):
    """VSS reconstruction sliced to the session's message length."""
    padded = vss_recon(views, params.field)
    if padded is None:
        return None
    return padded[: params.ell]


# --- in-process conveniences ---------------------------------------------------


def sc_commit_stage(message, params: StrongParams, committer_rng, receiver_rng, transcript=None):
    from .transport import run_local_pair

    state, (accept, session) = run_local_pair(
        committer_gen(params, message, committer_rng),
        receiver_gen(params, receiver_rng),
        names=("committer", "receiver"),
        transcript=transcript,
    )
    return session, state, accept


def sc_decommit_verify(session: StrongSession, state: SCCommitterState, transcript=None):
    from .transport import run_local_pair

    _, message = run_local_pair(
        decommitter_gen(state),
        decommit_receiver_gen(session),
        names=("committer", "receiver"),
        transcript=transcript,
    )
    return message
