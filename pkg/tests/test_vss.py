from collections import Counter

import numpy as np
import pytest

from pqext.bits import as_bits
from pqext.errors import ParameterError
from pqext.gf import polyval
from pqext.vss import (
    FieldParams,
    VssView,
    chunks_to_bits,
    decode_view,
    encode_view,
    message_to_chunks,
    recomputed_flags,
    share_with_matrices,
    view_byte_length,
    view_well_formed,
    vss_recon,
    vss_share,
    vss_view_consistent,
)

F257 = FieldParams(257)
F7 = FieldParams(7)
F5 = FieldParams(5)


def deal_arbitrary(polys, n, t, field):
    """Views from adversarially dealt per-player polynomials, with honest
    cross exchange and honest complaint flags."""
    p = field.p
    chunks = polys[0].shape[0]
    views = []
    for i in range(1, n + 1):
        others = [j for j in range(1, n + 1) if j != i]
        cross = np.stack(
            [np.array([polyval(polys[j - 1][c], i, p) for c in range(chunks)]) for j in others],
            axis=1,
        ).astype(np.int64)
        v = VssView(
            party_index=i,
            n=n,
            t=t,
            p=p,
            chunks=chunks,
            coeffs=polys[i - 1].astype(np.int64) % p,
            cross=cross,
            flags=np.zeros(n - 1, dtype=np.uint8),
        )
        v.flags = recomputed_flags(v)
        views.append(v)
    return views


def test_worked_example_p7():
    # F(x,y) = 3 + 2x + 2y + 5xy over GF(7), one chunk, n=4, t=1
    mats = np.array([[[3, 2], [2, 5]]], dtype=np.int64)
    views = share_with_matrices(mats, 4, 1, F7)
    v1 = views[0]
    assert int(v1.coeffs[0, 0]) == 5  # f_1(0) = F(0,1) = 3 + 2 = 5
    got = vss_recon(views, F7)
    assert got is not None
    assert got.size == 2 and list(got) == [1, 1]  # chunk value 3


def test_zero_message_zero_randomness_gives_zero_shares():
    mats = np.zeros((1, 2, 2), dtype=np.int64)
    views = share_with_matrices(mats, 4, 1, F7)
    for v in views:
        assert not v.coeffs.any() and not v.cross.any() and not v.flags.any()


def test_honest_share_pairwise_consistent():
    rng = np.random.default_rng(0)
    views, dealer = vss_share(as_bits("1011"), 3, 1, rng, F257)
    assert dealer.chunk_values == message_to_chunks(as_bits("1011"), F257)
    for i in range(3):
        for j in range(3):
            if i != j:
                assert vss_view_consistent(views[i], views[j])
        assert not views[i].flags.any()


def test_recon_honest_roundtrip():
    rng = np.random.default_rng(1)
    msg = as_bits("1100101001110001")
    views, _ = vss_share(msg, 7, 2, rng, F257)
    got = vss_recon(views, F257)
    assert got is not None and (got[: msg.size] == msg).all()


def test_recon_tolerates_t_garbage_views():
    rng = np.random.default_rng(2)
    msg = as_bits("10101010")
    views, _ = vss_share(msg, 7, 2, rng, F257)
    # garbage = syntactically fine views with random content
    for idx in (1, 4):
        v = views[idx]
        coeffs = rng.integers(0, 257, size=v.coeffs.shape).astype(np.int64)
        cross = rng.integers(0, 257, size=v.cross.shape).astype(np.int64)
        bad = VssView(v.party_index, v.n, v.t, v.p, v.chunks, coeffs, cross, v.flags.copy())
        bad.flags = recomputed_flags(bad)
        views[idx] = bad
    got = vss_recon(views, F257)
    assert got is not None and (got[: msg.size] == msg).all()


def test_recon_with_erasures():
    rng = np.random.default_rng(3)
    msg = as_bits("01011010")
    views, _ = vss_share(msg, 7, 2, rng, F257)
    views[0] = None
    views[3] = None
    got = vss_recon(views, F257)
    assert got is not None and (got[: msg.size] == msg).all()


def test_recon_never_third_value_at_micro_params():
    # t+1 = 2 adversarial views on a different degree-1 polynomial at n=4
    rng = np.random.default_rng(4)
    msg = as_bits("10")
    views, _ = vss_share(msg, 4, 1, rng, F5)
    other = [int(c) for c in rng.integers(0, 5, size=2)]
    for idx in (2, 3):
        v = views[idx]
        coeffs = np.array([[polyval(other, v.party_index, 5), 0]], dtype=np.int64)
        bad = VssView(v.party_index, v.n, v.t, v.p, v.chunks, coeffs, v.cross.copy(), v.flags.copy())
        bad.flags = recomputed_flags(bad)
        views[idx] = bad
    got = vss_recon(views, F5)
    assert got is None or (got[: msg.size] == msg).all()


def test_view_consistency_detects_tampered_coefficient():
    rng = np.random.default_rng(5)
    views, _ = vss_share(as_bits("11"), 4, 1, rng, F257)
    v = views[0]
    coeffs = v.coeffs.copy()
    coeffs[0, 1] = (coeffs[0, 1] + 1) % 257
    tampered = VssView(v.party_index, v.n, v.t, v.p, v.chunks, coeffs, v.cross.copy(), v.flags.copy())
    tampered.flags = recomputed_flags(tampered)  # stays well-formed
    assert any(not vss_view_consistent(tampered, views[j]) for j in range(1, 4))


def test_view_consistency_rejects_malformed_and_same_index():
    rng = np.random.default_rng(6)
    views, _ = vss_share(as_bits("11"), 4, 1, rng, F257)
    assert not vss_view_consistent(views[0], None)
    with pytest.raises(ParameterError):
        vss_view_consistent(views[0], views[0])
    # forged flags break well-formedness
    v = views[1]
    forged = VssView(v.party_index, v.n, v.t, v.p, v.chunks, v.coeffs.copy(), v.cross.copy(), v.flags.copy())
    forged.flags = 1 - forged.flags
    assert not view_well_formed(forged)
    assert not vss_view_consistent(forged, views[2])


def test_param_validation():
    rng = np.random.default_rng(7)
    with pytest.raises(ParameterError):
        vss_share(as_bits("1"), 4, 2, rng, F257)  # t > n/3
    with pytest.raises(ParameterError):
        vss_share(as_bits("1"), 5, 1, rng, FieldParams(5))  # p <= n
    with pytest.raises(ParameterError):
        FieldParams(6)


def test_secrecy_exact_single_view_distribution():
    # p=5, n=4, t=1: enumerate all dealer randomness; any single view's
    # distribution is identical for every secret chunk value
    dists = []
    for s in range(4):
        per_view = [Counter() for _ in range(4)]
        for b in range(5):
            for c in range(5):
                mats = np.array([[[s, b], [b, c]]], dtype=np.int64)
                views = share_with_matrices(mats, 4, 1, F5)
                for i, v in enumerate(views):
                    per_view[i][encode_view(v)] += 1
        dists.append(per_view)
    for s in range(1, 4):
        for i in range(4):
            assert dists[s][i] == dists[0][i]


def test_committing_dichotomy_for_adversarial_dealers():
    # degree-bounded dealt polynomials with honest exchange: complaints are
    # either absent (unique reconstruction) or hit > t views (disqualify)
    rng = np.random.default_rng(8)
    n, t, field = 7, 2, F257
    msg = as_bits("11001010")
    honest_views, dealer = vss_share(msg, n, t, rng, field)
    honest_polys = [v.coeffs.copy() for v in honest_views]

    def outcome(polys):
        views = deal_arbitrary(polys, n, t, field)
        complaining = sum(1 for v in views if v.flags.any())
        got = vss_recon(views, field)
        return complaining, got

    # honest: no complaints, unique value
    c0, got0 = outcome(honest_polys)
    assert c0 == 0 and got0 is not None and (got0[: msg.size] == msg).all()

    # single tampered polynomial: any degree-<=t deviation hits >= n-1-t pairs
    for tamper_idx in (0, 3, 6):
        polys = [c.copy() for c in honest_polys]
        polys[tamper_idx][0, 0] = (polys[tamper_idx][0, 0] + 1) % 257
        c1, got1 = outcome(polys)
        assert c1 > t and got1 is None

    # all-random polynomials: blanket disqualification
    polys = [rng.integers(0, 257, size=honest_polys[0].shape).astype(np.int64) for _ in range(n)]
    c2, got2 = outcome(polys)
    assert c2 > t and got2 is None

    # two-faced dealer: two inconsistent bivariate sharings
    other_views, _ = vss_share(as_bits("00110101"), n, t, rng, field)
    polys = [honest_polys[i] if i < 3 else other_views[i].coeffs.copy() for i in range(n)]
    c3, got3 = outcome(polys)
    assert c3 > t and got3 is None


def test_out_of_range_chunk_reconstructs_bot():
    # dealer shares the field element 256, which has no byte encoding
    mats = np.zeros((1, 3, 3), dtype=np.int64)
    mats[0, 0, 0] = 256
    views = share_with_matrices(mats, 7, 2, F257)
    assert vss_recon(views, F257) is None
    assert chunks_to_bits([256], F257) is None


def test_encoding_roundtrip_and_length():
    rng = np.random.default_rng(9)
    views, _ = vss_share(as_bits("100111"), 5, 1, rng, F257)
    for v in views:
        raw = encode_view(v)
        assert len(raw) == view_byte_length(v.n, v.t, v.chunks)
        back = decode_view(raw)
        assert encode_view(back) == raw
        assert vss_view_consistent(back, decode_view(encode_view(views[(v.party_index) % 5])))


def test_decode_rejects_malformed():
    with pytest.raises(ParameterError):
        decode_view(b"\x00\x01")
    rng = np.random.default_rng(10)
    views, _ = vss_share(as_bits("1"), 4, 1, rng, F257)
    raw = encode_view(views[0])
    with pytest.raises(ParameterError):
        decode_view(raw[:-1])
