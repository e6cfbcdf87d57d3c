"""On-air frame construction and parsing.

A frame carries 1280 information bits: a 32-bit header (8-bit stream id,
24-bit sequence number), 1224 payload bits, and a trailing CRC-24.  The
encoded 2176-bit codeword is prefixed with a fixed 256-bit synchronization
preamble, giving 2432 bits on air.  All serialization is MSB-first.

The CRC generator is the 5G-NR CRC24A polynomial (0x864CFB), zero initial
state, no reflection, no final XOR.  Since that CRC is linear over GF(2),
the production path evaluates it as a precomputed bit-matrix product,
which also vectorizes over frame batches.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HEADER_BITS = 32
STREAM_ID_BITS = 8
SEQ_BITS = 24
PAYLOAD_BITS = 1224
PAYLOAD_BYTES = PAYLOAD_BITS // 8
CRC_BITS = 24
INFO_BITS = HEADER_BITS + PAYLOAD_BITS + CRC_BITS  # 1280
SYNC_BITS = 256
CODED_BITS = 2176
FRAME_BITS = SYNC_BITS + CODED_BITS  # 2432

CRC24_POLY = 0x864CFB  # x^24+x^23+x^18+x^17+x^14+x^11+x^10+x^7+x^6+x^5+x^4+x^3+x+1

# Degree-8 maximal-length LFSR generating the sync preamble (period 255,
# cycled to 256 bits).  Feedback polynomial x^8 + x^6 + x^5 + x^4 + 1,
# i.e. bit[n+8] = bit[n+6] ^ bit[n+5] ^ bit[n+4] ^ bit[n].
SYNC_LFSR_POLY = (8, 6, 5, 4, 0)
SYNC_LFSR_SEED = 0x9D


@dataclass(frozen=True)
class FrameHeader:
    stream_id: int
    seq: int

    def __post_init__(self):
        if not 0 <= self.stream_id < (1 << STREAM_ID_BITS):
            raise ValueError(f"stream_id must fit in {STREAM_ID_BITS} bits")
        if not 0 <= self.seq < (1 << SEQ_BITS):
            raise ValueError(f"seq must fit in {SEQ_BITS} bits")


@dataclass(frozen=True)
class Frame:
    preamble: np.ndarray
    coded: np.ndarray

    def __post_init__(self):
        if self.preamble.shape != (SYNC_BITS,):
            raise ValueError(f"preamble must have {SYNC_BITS} bits")
        if self.coded.shape != (CODED_BITS,):
            raise ValueError(f"coded block must have {CODED_BITS} bits")


def int_to_bits(value: int, width: int) -> np.ndarray:
    """MSB-first bit vector of ``value``."""
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)],
                    dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.uint8):
        out = (out << 1) | int(b)
    return out


def pack_header(header: FrameHeader) -> np.ndarray:
    return np.concatenate([
        int_to_bits(header.stream_id, STREAM_ID_BITS),
        int_to_bits(header.seq, SEQ_BITS),
    ])


def unpack_header(bits) -> FrameHeader:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (HEADER_BITS,):
        raise ValueError(f"header must have {HEADER_BITS} bits")
    return FrameHeader(
        stream_id=bits_to_int(bits[:STREAM_ID_BITS]),
        seq=bits_to_int(bits[STREAM_ID_BITS:]),
    )


@lru_cache(maxsize=None)
def _crc_matrix(n_bits: int) -> np.ndarray:
    """(n_bits, 24) matrix with CRC(e_i) as row i; CRC(m) = m @ M mod 2."""
    mat = np.zeros((n_bits, CRC_BITS), dtype=np.uint8)
    # row i is the remainder of x^(24 + n - 1 - i) modulo the generator
    for i in range(n_bits):
        mat[i] = int_to_bits(_poly_mod(1 << (n_bits - 1 - i + CRC_BITS)), CRC_BITS)
    return mat


def _poly_mod(value: int) -> int:
    """Remainder of the GF(2) polynomial ``value`` modulo the generator."""
    gen = CRC24_POLY | (1 << CRC_BITS)
    top = value.bit_length() - 1
    while top >= CRC_BITS:
        value ^= gen << (top - CRC_BITS)
        top = value.bit_length() - 1
    return value


def crc24(bits) -> np.ndarray:
    """CRC-24 of an MSB-first bit vector, as 24 bits."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    return crc24_batch(bits)[0]


def crc24_batch(bits: np.ndarray) -> np.ndarray:
    """Row-wise CRC-24 of a (B, n) bit array."""
    bits = np.asarray(bits, dtype=np.uint8)
    mat = _crc_matrix(bits.shape[1])
    return (bits.astype(np.float64) @ mat.astype(np.float64)).astype(np.int64) % 2


def assemble_info(header: FrameHeader, payload) -> np.ndarray:
    """header || payload || crc24(header || payload), 1280 bits total."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape != (PAYLOAD_BITS,):
        raise ValueError(f"payload must have {PAYLOAD_BITS} bits, got {payload.shape}")
    body = np.concatenate([pack_header(header), payload])
    return np.concatenate([body, crc24(body).astype(np.uint8)])


def assemble_info_batch(stream_id: int, seqs: np.ndarray, payloads: np.ndarray) -> np.ndarray:
    """Vectorized assembly of one stream's frames: (B, 1280)."""
    b = len(seqs)
    payloads = np.asarray(payloads, dtype=np.uint8)
    if payloads.shape != (b, PAYLOAD_BITS):
        raise ValueError("payload batch shape mismatch")
    headers = np.zeros((b, HEADER_BITS), dtype=np.uint8)
    for i, seq in enumerate(seqs):
        headers[i] = pack_header(FrameHeader(stream_id, int(seq)))
    body = np.concatenate([headers, payloads], axis=1)
    crc = crc24_batch(body).astype(np.uint8)
    return np.concatenate([body, crc], axis=1)


def verify_and_split(info) -> tuple[FrameHeader, np.ndarray, bool]:
    """Split an info block; crc_ok tells whether the trailing CRC matches."""
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (INFO_BITS,):
        raise ValueError(f"info block must have {INFO_BITS} bits")
    body, crc = info[:-CRC_BITS], info[-CRC_BITS:]
    header = unpack_header(body[:HEADER_BITS])
    payload = body[HEADER_BITS:]
    crc_ok = bool(np.array_equal(crc24(body), crc))
    return header, payload, crc_ok


def crc_ok_batch(infos: np.ndarray) -> np.ndarray:
    """Row-wise CRC verdict for a (B, 1280) info batch."""
    infos = np.asarray(infos, dtype=np.uint8)
    body, crc = infos[:, :-CRC_BITS], infos[:, -CRC_BITS:]
    return (crc24_batch(body) == crc).all(axis=1)


def address_match(header: FrameHeader, expected_stream: int) -> bool:
    return header.stream_id == expected_stream


def _lfsr_bits(poly, seed: int, n: int) -> np.ndarray:
    """Fibonacci LFSR output for the given feedback polynomial exponents."""
    degree = max(poly)
    low_taps = sorted(e for e in poly if e != degree)
    state = [(seed >> (degree - 1 - i)) & 1 for i in range(degree)]
    if not any(state):
        raise ValueError("LFSR seed must be nonzero")
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        out[i] = state[0]
        fb = 0
        for e in low_taps:
            fb ^= state[e]
        state = state[1:] + [fb]
    return out


@lru_cache(maxsize=1)
def sync_sequence() -> np.ndarray:
    """The fixed 256-bit preamble; sidelobe bound is enforced at build time."""
    seq = _lfsr_bits(SYNC_LFSR_POLY, SYNC_LFSR_SEED, SYNC_BITS)
    peak, worst = sync_autocorrelation_profile(seq)
    if worst >= 0.5 * peak:
        raise AssertionError("sync sequence violates the sidelobe bound")
    seq.setflags(write=False)
    return seq


def sync_autocorrelation_profile(bits) -> tuple[int, int]:
    """(peak, worst aperiodic sidelobe) of the bipolar sequence."""
    bipolar = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    corr = np.correlate(bipolar, bipolar, mode="full")
    n = len(bipolar)
    peak = int(round(corr[n - 1]))
    side = np.abs(np.concatenate([corr[:n - 1], corr[n:]]))
    return peak, int(round(side.max()))


def build_frame(codeword) -> Frame:
    codeword = np.asarray(codeword, dtype=np.uint8)
    if codeword.shape != (CODED_BITS,):
        raise ValueError(f"codeword must have {CODED_BITS} bits")
    return Frame(preamble=sync_sequence(), coded=codeword)


def frame_bits(frame: Frame) -> np.ndarray:
    return np.concatenate([frame.preamble, frame.coded])


def frame_bits_batch(codewords: np.ndarray) -> np.ndarray:
    """(B, 2176) codewords -> (B, 2432) on-air bits."""
    codewords = np.asarray(codewords, dtype=np.uint8)
    pre = np.broadcast_to(sync_sequence(), (codewords.shape[0], SYNC_BITS))
    return np.concatenate([pre, codewords], axis=1)


def payloads_from_bytes(data: bytes) -> np.ndarray:
    """Chunk a byte stream into 153-byte payloads; the last one zero-padded."""
    if len(data) == 0:
        raise ValueError("empty byte stream")
    n_chunks = -(-len(data) // PAYLOAD_BYTES)
    padded = data + b"\x00" * (n_chunks * PAYLOAD_BYTES - len(data))
    arr = np.frombuffer(padded, dtype=np.uint8).reshape(n_chunks, PAYLOAD_BYTES)
    return np.unpackbits(arr, axis=1)
