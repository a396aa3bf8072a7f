"""Verifiable secret sharing from a symmetric bivariate polynomial.

The dealer samples, per message chunk, a symmetric F(x,y) of degree <= t in
each variable with F(0,0) = chunk. Player i's view holds f_i(x) = F(x,i),
the received cross evaluations f_j(i), and one complaint flag per
counterparty (set when f_i(j) != received f_j(i); the multi-round complaint
protocol is collapsed into these flags).

Reconstruction RS-decodes the diagonal {f_i(0)} with missing views as
erasures, after disqualifying the dealer when more than t views complain:
with at most t complaining views, the non-complaining >= n-t >= 2t+1 views
are pairwise consistent and pin a unique decodable value.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .bits import as_bits
from .errors import ParameterError
from .gf import is_prime, polyval_many, rs_decode


@dataclass(frozen=True)
class FieldParams:
    """Prime modulus for the sharing; must exceed n+1."""

    p: int = 257

    def __post_init__(self):
        if not is_prime(self.p):
            raise ParameterError(f"{self.p} is not prime")

    @property
    def chunk_width(self) -> int:
        return self.p.bit_length() - 1


@dataclass
class VssView:
    """One shareholder's record of the sharing phase."""

    party_index: int  # 1-based
    n: int
    t: int
    p: int
    chunks: int
    coeffs: np.ndarray  # (chunks, t+1) int64, f_i low-degree-first
    cross: np.ndarray  # (chunks, n-1) int64, received f_j(i), ascending j
    flags: np.ndarray  # (n-1,) uint8, complaint per counterparty, ascending j

    def counterparties(self) -> list[int]:
        return [j for j in range(1, self.n + 1) if j != self.party_index]


@dataclass
class DealerView:
    message: np.ndarray
    chunk_values: list[int]
    matrices: np.ndarray  # (chunks, t+1, t+1) symmetric


def message_to_chunks(message, field: FieldParams) -> list[int]:
    bits = as_bits(message)
    w = field.chunk_width
    pad = (-bits.size) % w
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    vals = []
    for c in range(padded.size // w):
        v = 0
        for b in padded[c * w : (c + 1) * w]:
            v = (v << 1) | int(b)
        vals.append(v)
    return vals


def chunks_to_bits(values, field: FieldParams) -> np.ndarray | None:
    w = field.chunk_width
    out = np.empty(len(values) * w, dtype=np.uint8)
    for c, v in enumerate(values):
        v = int(v)
        if v >> w:  # field element outside the message embedding
            return None
        for k in range(w):
            out[c * w + k] = (v >> (w - 1 - k)) & 1
    return out


def _check_share_params(n: int, t: int, field: FieldParams) -> None:
    if t < 1 or t > n // 3:
        raise ParameterError("need 1 <= t <= n/3")
    if field.p <= n:  # evaluation points 0..n must be distinct mod p
        raise ParameterError("field too small for n+1 players")


def share_with_matrices(matrices: np.ndarray, n: int, t: int, field: FieldParams) -> list[VssView]:
    """Views induced by explicit symmetric dealer matrices (test/oracle hook)."""
    p = field.p
    chunks = matrices.shape[0]
    powers = np.empty((n + 1, t + 1), dtype=np.int64)
    for x in range(n + 1):
        powers[x] = [pow(x, b, p) for b in range(t + 1)]
    # f_j(x) = F(x, j): coefficient a is sum_b M[a,b] j^b
    all_coeffs = np.einsum("cab,jb->jca", matrices, powers[1:]) % p  # (n, chunks, t+1)
    # evals[j, c, x] = f_j(x) for x in 0..n
    evals = np.einsum("jca,xa->jcx", all_coeffs, powers) % p
    views = []
    for i in range(1, n + 1):
        others = [j for j in range(1, n + 1) if j != i]
        cross = np.stack([evals[j - 1, :, i] for j in others], axis=1).astype(np.int64)
        views.append(
            VssView(
                party_index=i,
                n=n,
                t=t,
                p=p,
                chunks=chunks,
                coeffs=all_coeffs[i - 1].astype(np.int64),
                cross=cross,
                flags=np.zeros(n - 1, dtype=np.uint8),
            )
        )
    return views


def vss_share(message, n: int, t: int, rng: np.random.Generator, field: FieldParams = FieldParams()):
    """Share a bitstring among n players; returns (views, dealer_view)."""
    _check_share_params(n, t, field)
    vals = message_to_chunks(message, field)
    chunks = len(vals)
    p = field.p
    draw = rng.integers(0, p, size=(chunks, t + 1, t + 1)).astype(np.int64)
    # uniform symmetric matrix: mirror the upper triangle
    mats = np.triu(draw) + np.triu(draw, 1).transpose(0, 2, 1)
    mats[:, 0, 0] = vals
    views = share_with_matrices(mats, n, t, field)
    dealer = DealerView(as_bits(message), vals, mats)
    return views, dealer


def recomputed_flags(view: VssView) -> np.ndarray:
    p = view.p
    others = np.array(view.counterparties(), dtype=np.int64)
    own_evals = polyval_many(view.coeffs, others, p)  # (chunks, n-1)
    return (own_evals != view.cross % p).any(axis=0).astype(np.uint8)


def view_well_formed(view: VssView) -> bool:
    try:
        if not (1 <= view.party_index <= view.n and 1 <= view.t and view.chunks >= 1):
            return False
        if view.coeffs.shape != (view.chunks, view.t + 1):
            return False
        if view.cross.shape != (view.chunks, view.n - 1):
            return False
        if view.flags.shape != (view.n - 1,):
            return False
        if (view.coeffs < 0).any() or (view.coeffs >= view.p).any():
            return False
        if (view.cross < 0).any() or (view.cross >= view.p).any():
            return False
    except (AttributeError, TypeError):
        return False
    return bool((recomputed_flags(view) == view.flags).all())


def vss_view_consistent(v_i: VssView, v_j: VssView) -> bool:
    """Pairwise check: mutual cross records match the other's polynomial."""
    if not isinstance(v_i, VssView) or not isinstance(v_j, VssView):
        return False
    if v_i.party_index == v_j.party_index:
        raise ParameterError("consistency check needs two distinct parties")
    if (v_i.n, v_i.t, v_i.p, v_i.chunks) != (v_j.n, v_j.t, v_j.p, v_j.chunks):
        return False
    if not (view_well_formed(v_i) and view_well_formed(v_j)):
        return False
    p = v_i.p
    i, j = v_i.party_index, v_j.party_index
    idx_j_in_i = v_i.counterparties().index(j)
    idx_i_in_j = v_j.counterparties().index(i)
    fi_at_j = polyval_many(v_i.coeffs, np.array([j]), p)[:, 0]
    fj_at_i = polyval_many(v_j.coeffs, np.array([i]), p)[:, 0]
    return bool(
        (fi_at_j == v_j.cross[:, idx_i_in_j] % p).all()
        and (fj_at_i == v_i.cross[:, idx_j_in_i] % p).all()
    )


def vss_recon(views: list[VssView | None], field: FieldParams | None = None) -> np.ndarray | None:
    """Reconstruct the shared bitstring (chunk-padded), or None.

    Missing/malformed views are erasures; the dealer is disqualified when
    more than t usable views carry a complaint flag.
    """
    usable = {}
    header = None
    for view in views:
        if view is None or not isinstance(view, VssView):
            continue
        if not view_well_formed(view):
            continue
        h = (view.n, view.t, view.p, view.chunks)
        if header is None:
            header = h
        if h != header or view.party_index in usable:
            continue
        usable[view.party_index] = view
    if header is None:
        return None
    n, t, p, chunks = header
    if field is not None and field.p != p:
        return None
    if len(views) != n:
        return None
    complaining = sum(1 for v in usable.values() if v.flags.any())
    if complaining > t:
        return None
    xs = list(range(1, n + 1))
    values = []
    for c in range(chunks):
        ys = [int(usable[i].coeffs[c, 0]) if i in usable else None for i in xs]
        poly = rs_decode(xs, ys, t, p)
        if poly is None:
            return None
        values.append(poly[0])
    return chunks_to_bits(values, FieldParams(p))


# --- canonical encoding -----------------------------------------------------

_HDR = struct.Struct(">HHHHH")


def encode_view(view: VssView) -> bytes:
    head = _HDR.pack(view.party_index, view.n, view.t, view.p, view.chunks)
    coeffs = view.coeffs.astype(">u2").tobytes()
    cross = view.cross.astype(">u2").tobytes()
    flags = view.flags.astype(np.uint8).tobytes()
    return head + coeffs + cross + flags


def decode_view(data: bytes) -> VssView:
    if len(data) < _HDR.size:
        raise ParameterError("view too short")
    party, n, t, p, chunks = _HDR.unpack_from(data, 0)
    off = _HDR.size
    n_coeff = chunks * (t + 1)
    n_cross = chunks * (n - 1)
    want = off + 2 * n_coeff + 2 * n_cross + (n - 1)
    if len(data) != want:
        raise ParameterError("view length mismatch")
    coeffs = np.frombuffer(data, dtype=">u2", count=n_coeff, offset=off).astype(np.int64)
    off += 2 * n_coeff
    cross = np.frombuffer(data, dtype=">u2", count=n_cross, offset=off).astype(np.int64)
    off += 2 * n_cross
    flags = np.frombuffer(data, dtype=np.uint8, count=n - 1, offset=off).copy()
    return VssView(
        party_index=party,
        n=n,
        t=t,
        p=p,
        chunks=chunks,
        coeffs=coeffs.reshape(chunks, t + 1),
        cross=cross.reshape(chunks, n - 1),
        flags=flags,
    )


def view_byte_length(n: int, t: int, chunks: int) -> int:
    return _HDR.size + 2 * chunks * (t + 1) + 2 * chunks * (n - 1) + (n - 1)
