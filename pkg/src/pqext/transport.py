"""Wire framing, channels and the two-party session driver.

Frame layout: 4-byte big-endian length, 1-byte msg type, payload; the length
counts type byte + payload. Parties are generator coroutines exchanging
*turns* (lists of frames): a party that speaks first yields its opening turn
from the first ``next()``; a party that listens first yields ``None`` once.
After its final turn a party returns its result when resumed with ``None``.
"""

from __future__ import annotations

import json
import socket
import struct
from dataclasses import dataclass, field

from .errors import FramingError, SessionError

MAX_PAYLOAD = 1 << 24

MSG_TYPES = {
    "HELLO": 0x01,
    "TURN_END": 0x02,
    "ABORT": 0x03,
    "STATUS": 0x04,
    "W_INIT": 0x10,
    "W_COMS": 0x11,
    "W_CHALLENGE": 0x12,
    "W_OPENING": 0x13,
    "W_DECOMMIT": 0x14,
    "SC_INIT": 0x20,
    "SC_WCOMS": 0x21,
    "SC_CHALLENGES": 0x22,
    "SC_OPENINGS": 0x23,
    "SC_COIN_INIT": 0x24,
    "SC_COIN_COMS": 0x25,
    "SC_COIN_CHALLENGE": 0x26,
    "SC_COIN_OPENING": 0x27,
    "SC_COIN_R2": 0x28,
    "SC_COIN_OPEN": 0x29,
    "SC_SUBSET_OPEN": 0x2A,
    "SC_VERDICT": 0x2B,
    "SC_DECOMMIT": 0x2C,
    "ECNP_SUB": 0x30,
    "ECNP_PR_COM_R": 0x31,
    "ECNP_PR_COMS": 0x32,
    "ECNP_PR_R2": 0x33,
    "ECNP_PR_OPEN": 0x34,
    "ECNP_PR_VERDICT": 0x35,
    "ECNP_DECOMMIT": 0x36,
    "COIN_R2": 0x40,
    "COIN_R1_ANNOUNCE": 0x41,
    "ZK_STATEMENT": 0x42,
    "SOCOM_COMMIT": 0x48,
    "SOCOM_RECEIPT": 0x49,
    "SOCOM_REVEAL": 0x4A,
    "SOCOM_OPEN": 0x4B,
}
_CODE_TO_NAME = {v: k for k, v in MSG_TYPES.items()}


@dataclass(frozen=True)
class Frame:
    msg_type: str
    payload: bytes = b""

    def __post_init__(self):
        if self.msg_type not in MSG_TYPES:
            raise FramingError(f"unregistered msg type {self.msg_type!r}")
        if len(self.payload) > MAX_PAYLOAD - 1:
            raise FramingError("payload too large")


def frame_encode(frame: Frame) -> bytes:
    body = bytes([MSG_TYPES[frame.msg_type]]) + frame.payload
    return struct.pack(">I", len(body)) + body


def frame_decode(data: bytes) -> Frame:
    """Decode exactly one frame; rejects truncation and trailing bytes."""
    frame, used = frame_decode_prefix(data)
    if used != len(data):
        raise FramingError("trailing bytes after frame")
    return frame


def frame_decode_prefix(data: bytes) -> tuple[Frame, int]:
    if len(data) < 5:
        raise FramingError("truncated frame header")
    (length,) = struct.unpack_from(">I", data, 0)
    if length < 1 or length > MAX_PAYLOAD:
        raise FramingError("bad frame length")
    if len(data) < 4 + length:
        raise FramingError("truncated frame body")
    code = data[4]
    if code not in _CODE_TO_NAME:
        raise FramingError(f"unknown msg type code {code:#x}")
    return Frame(_CODE_TO_NAME[code], bytes(data[5 : 4 + length])), 4 + length


@dataclass
class TranscriptRecord:
    round: int
    sender: str
    msg_type: str
    payload: bytes


@dataclass
class Transcript:
    records: list[TranscriptRecord] = field(default_factory=list)

    def add(self, sender: str, frame: Frame) -> None:
        self.records.append(TranscriptRecord(len(self.records), sender, frame.msg_type, frame.payload))

    def to_json(self) -> str:
        return json.dumps(
            [
                {"round": r.round, "from": r.sender, "type": r.msg_type, "payload_hex": r.payload.hex()}
                for r in self.records
            ],
            indent=0,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        t = cls()
        for row in json.loads(text):
            t.records.append(
                TranscriptRecord(row["round"], row["from"], row["type"], bytes.fromhex(row["payload_hex"]))
            )
        return t


class Channel:
    """Turn-oriented transport; a turn is a list of frames ended by TURN_END."""

    def send_frames(self, frames: list[Frame]) -> None:
        raise NotImplementedError

    def recv_frames(self) -> list[Frame]:
        raise NotImplementedError

    def close(self) -> None:
        pass


class LoopbackChannel(Channel):
    def __init__(self):
        self._queues = ([], [])
        self._side = 0

    def pair(self) -> "LoopbackChannel":
        other = LoopbackChannel.__new__(LoopbackChannel)
        other._queues = self._queues
        other._side = 1 - self._side
        return other

    def send_frames(self, frames):
        self._queues[1 - self._side].append(list(frames))

    def recv_frames(self):
        q = self._queues[self._side]
        if not q:
            raise SessionError("peer sent nothing (deadlock or disconnect)")
        return q.pop(0)


class TcpChannel(Channel):
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buf = b""

    def send_frames(self, frames):
        blob = b"".join(frame_encode(f) for f in frames)
        blob += frame_encode(Frame("TURN_END"))
        try:
            self._sock.sendall(blob)
        except OSError as exc:
            raise SessionError(f"send failed: {exc}") from exc

    def _read_frame(self) -> Frame:
        while True:
            try:
                frame, used = frame_decode_prefix(self._buf)
            except FramingError:
                chunk = self._recv_more()
                self._buf += chunk
                continue
            self._buf = self._buf[used:]
            return frame

    def _recv_more(self) -> bytes:
        try:
            chunk = self._sock.recv(1 << 16)
        except OSError as exc:
            raise SessionError(f"recv failed: {exc}") from exc
        if not chunk:
            raise SessionError("peer disconnected")
        return chunk

    def recv_frames(self):
        out = []
        while True:
            frame = self._read_frame()
            if frame.msg_type == "TURN_END":
                return out
            out.append(frame)

    def close(self):
        try:
            self._sock.close()
        except OSError:
            pass


class Final(list):
    """A party's last turn: after yielding this, the party returns."""


def _finish(gen):
    try:
        gen.send(None)
    except StopIteration as stop:
        return stop.value
    raise SessionError("party yielded after its final turn")


def run_local_pair(gen_a, gen_b, names=("P1", "P2"), transcript: Transcript | None = None):
    """Drive two party generators in lockstep; returns (result_a, result_b).

    ``transcript`` (optional) records every protocol frame in delivery order.
    """
    out_a = next(gen_a)
    out_b = next(gen_b)
    if (out_a is None) == (out_b is None):
        raise SessionError("exactly one party must speak first")
    first = 0 if out_a is not None else 1
    gens = [gen_a, gen_b]
    turn, sender = (out_a if first == 0 else out_b), first
    results: list[object] = [None, None]
    while True:
        if transcript is not None:
            for f in turn:
                transcript.add(names[sender], f)
        final = isinstance(turn, Final)
        receiver = 1 - sender
        try:
            reply = gens[receiver].send(list(turn))
        except StopIteration as stop:
            results[receiver] = stop.value
            results[sender] = _finish(gens[sender])
            return results[0], results[1]
        if final:
            raise SessionError("party replied to a final turn")
        if reply is None:
            raise SessionError("listening party yielded no turn mid-protocol")
        turn, sender = reply, receiver


def drive_over_channel(gen, channel: Channel, names=("local", "remote"),
                       transcript: Transcript | None = None):
    """Drive one party generator over a real channel; returns its result.

    ``names[0]`` labels the local party in the transcript.
    """
    local, remote = names
    to_send = next(gen)
    while True:
        if to_send is not None:
            if transcript is not None:
                for f in to_send:
                    transcript.add(local, f)
            channel.send_frames(to_send)
            if isinstance(to_send, Final):
                return _finish(gen)
        turn = channel.recv_frames()
        if transcript is not None:
            for f in turn:
                transcript.add(remote, f)
        try:
            to_send = gen.send(turn)
        except StopIteration as stop:
            return stop.value
        if to_send is None:
            raise SessionError("party yielded None mid-protocol")
