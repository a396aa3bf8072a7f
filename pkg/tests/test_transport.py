import socket
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqext.errors import FramingError, SessionError
from pqext.transport import (
    Final,
    Frame,
    LoopbackChannel,
    TcpChannel,
    Transcript,
    drive_over_channel,
    frame_decode,
    frame_encode,
    run_local_pair,
)


def test_empty_payload_is_five_bytes():
    raw = frame_encode(Frame("STATUS"))
    assert len(raw) == 5
    assert frame_decode(raw) == Frame("STATUS")


@given(st.sampled_from(["STATUS", "W_COMS", "SC_VERDICT"]), st.binary(max_size=2048))
def test_frame_roundtrip(msg_type, payload):
    frame = Frame(msg_type, payload)
    assert frame_decode(frame_encode(frame)) == frame


def test_truncated_frame_rejected():
    with pytest.raises(FramingError):
        frame_decode(b"\x00\x01\x02")


def test_trailing_bytes_rejected():
    raw = frame_encode(Frame("STATUS", b"x")) + b"y"
    with pytest.raises(FramingError):
        frame_decode(raw)


def test_unknown_type_rejected():
    with pytest.raises(FramingError):
        frame_decode(b"\x00\x00\x00\x01\xfe")
    with pytest.raises(FramingError):
        Frame("NOPE", b"")


@given(st.binary(max_size=64))
def test_decoder_never_crashes_on_fuzz(data):
    try:
        frame_decode(data)
    except FramingError:
        pass


def _ping(n):
    turn = yield [Frame("STATUS", b"ping0")]
    for i in range(1, n):
        turn = yield [Frame("STATUS", b"ping%d" % i)]
    return turn[0].payload


def _pong(n):
    turn = yield None
    for i in range(n - 1):
        turn = yield [Frame("STATUS", b"pong%d" % i)]
    yield Final([Frame("STATUS", b"done")])
    return b"".join(f.payload for f in turn)


def test_run_local_pair_and_transcript():
    t = Transcript()
    res_a, res_b = run_local_pair(_ping(3), _pong(3), names=("A", "B"), transcript=t)
    assert res_a == b"done"
    assert res_b == b"ping2"
    assert [r.round for r in t.records] == list(range(len(t.records)))
    assert t.records[0].sender == "A"
    json_text = t.to_json()
    back = Transcript.from_json(json_text)
    assert back.to_json() == json_text


def test_run_local_pair_requires_single_first_speaker():
    with pytest.raises(SessionError):
        run_local_pair(_ping(2), _ping(2))


def test_tcp_channel_matches_loopback():
    s1, s2 = socket.socketpair()
    ch1, ch2 = TcpChannel(s1), TcpChannel(s2)
    t_tcp_a, t_tcp_b = Transcript(), Transcript()
    results = {}

    def side_b():
        results["b"] = drive_over_channel(_pong(3), ch2, names=("B", "A"), transcript=t_tcp_b)

    thread = threading.Thread(target=side_b)
    thread.start()
    results["a"] = drive_over_channel(_ping(3), ch1, names=("A", "B"), transcript=t_tcp_a)
    thread.join()
    ch1.close()
    ch2.close()
    assert results["a"] == b"done"
    assert results["b"] == b"ping2"

    t_local = Transcript()
    run_local_pair(_ping(3), _pong(3), names=("A", "B"), transcript=t_local)
    assert t_tcp_a.to_json() == t_local.to_json()
    assert t_tcp_b.to_json() == t_local.to_json()
