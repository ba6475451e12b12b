"""Binary wire format: framing and query/answer serialization.

Every message is a frame: a 4-byte big-endian payload length followed by the
payload.  Query payload: 1 version byte (0x01), 1 tag byte (0x00 null,
0x01 clean, 0x02 structured); a clean query adds a 2-byte big-endian file
index; a structured query adds a 2-byte combination count, then per
combination a 1-byte term count and per term a 2-byte file index, a 4-byte
segment index, and the coefficient as a raw field-element value (1 byte,
widened to 2 bytes when the field order exceeds 256).  Answer payload:
a 4-byte symbol count followed by the raw symbols, ceil(w/8) bytes each,
big-endian.  The query class is never carried on the wire; receivers
re-derive it from the payload.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import AnswerString, QueryToken, Tag, clean_token, null_token, structured_token
from .galois import Field

PROTOCOL_VERSION = 0x01
FRAME_HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 1 << 28


class ProtocolError(Exception):
    pass


def coefficient_width(field: Field) -> int:
    return 1 if field.order <= 256 else 2


def symbol_width(field: Field) -> int:
    return (field.bits_per_symbol + 7) // 8


def encode_query(token: QueryToken, field: Field) -> bytes:
    out = bytearray([PROTOCOL_VERSION, int(token.tag)])
    if token.tag == Tag.CLEAN:
        out += struct.pack(">H", token.clean_index)
    elif token.tag == Tag.STRUCTURED:
        cw = coefficient_width(field)
        if len(token.combos) > 0xFFFF:
            raise ProtocolError("too many combinations for the wire format")
        out += struct.pack(">H", len(token.combos))
        for combo in token.combos:
            if len(combo) > 0xFF:
                raise ProtocolError("combination exceeds 255 terms")
            out.append(len(combo))
            for file_idx, seg, coeff in combo:
                out += struct.pack(">HI", file_idx, seg)
                out += int(coeff).to_bytes(cw, "big")
    return bytes(out)


def decode_query(data: bytes, field: Field) -> QueryToken:
    try:
        if len(data) < 2:
            raise ProtocolError("query payload too short")
        if data[0] != PROTOCOL_VERSION:
            raise ProtocolError(f"protocol version mismatch: {data[0]:#x}")
        tag = data[1]
        pos = 2
        if tag == Tag.NULL:
            token = null_token()
        elif tag == Tag.CLEAN:
            (k,) = struct.unpack_from(">H", data, pos)
            pos += 2
            token = clean_token(k)
        elif tag == Tag.STRUCTURED:
            cw = coefficient_width(field)
            (n_combos,) = struct.unpack_from(">H", data, pos)
            pos += 2
            combos = []
            for _ in range(n_combos):
                n_terms = data[pos]
                pos += 1
                terms = []
                for _ in range(n_terms):
                    file_idx, seg = struct.unpack_from(">HI", data, pos)
                    pos += 6
                    coeff = int.from_bytes(data[pos:pos + cw], "big")
                    if len(data) < pos + cw:
                        raise ProtocolError("truncated coefficient")
                    pos += cw
                    if coeff >= field.order:
                        raise ProtocolError("coefficient outside the field")
                    terms.append((file_idx, seg, coeff))
                combos.append(tuple(terms))
            token = structured_token(combos)
        else:
            raise ProtocolError(f"unknown query tag {tag:#x}")
        if pos != len(data):
            raise ProtocolError("trailing bytes in query payload")
        return token
    except (struct.error, IndexError) as exc:
        raise ProtocolError(f"malformed query payload: {exc}") from exc


def encode_answer(answer: AnswerString) -> bytes:
    sw = symbol_width(answer.field)
    out = bytearray(struct.pack(">I", len(answer.symbols)))
    for v in np.asarray(answer.symbols, dtype=np.int64).tolist():
        out += int(v).to_bytes(sw, "big")
    return bytes(out)


def decode_answer(data: bytes, field: Field) -> AnswerString:
    try:
        (count,) = struct.unpack_from(">I", data, 0)
    except struct.error as exc:
        raise ProtocolError("answer payload too short") from exc
    sw = symbol_width(field)
    if len(data) != 4 + count * sw:
        raise ProtocolError("answer payload length mismatch")
    symbols = np.frombuffer(data[4:], dtype=">u2" if sw == 2 else np.uint8).astype(np.int64)
    if (symbols >= field.order).any():
        raise ProtocolError("symbol outside the field")
    return AnswerString(symbols, field)


def write_frame(stream, payload: bytes):
    stream.write(FRAME_HEADER.pack(len(payload)) + payload)


def read_frame(read_exactly) -> bytes:
    """Read one frame through a callable returning exactly n bytes (or None at EOF)."""
    header = read_exactly(4)
    if header is None:
        raise EOFError("connection closed before frame header")
    (length,) = FRAME_HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame of {length} bytes exceeds limit")
    if length == 0:
        return b""
    payload = read_exactly(length)
    if payload is None:
        raise ProtocolError("connection closed mid-frame")
    return payload
