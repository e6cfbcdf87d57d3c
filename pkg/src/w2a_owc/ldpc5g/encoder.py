"""Systematic encoder for the lifted BG2 code.

Parity is computed in two stages: the four core parity blocks solve the
double-diagonal subsystem (via a precomputed GF(2) inverse of the 4Z x 4Z
core block), and the remaining 38 extension blocks follow directly, one
per base row.  Everything is vectorized over a batch of information words.
"""

import numpy as np

from .basegraph import (
    BG2_CORE_PARITY_COLS,
    BG2_SYSTEMATIC_COLS,
    LiftedCode,
    build_lifted_code,
)

_CORE_ROWS = 4


class Encoder:
    def __init__(self, code: LiftedCode | None = None):
        self.code = code if code is not None else build_lifted_code()
        self._core_inv = _invert_core_block(self.code)
        self._core_inv_f32 = self._core_inv.T.astype(np.float32)
        # (col, shift) lists per base row, systematic+core columns only
        self._row_edges = [
            [(c, s) for c, s in self.code.bg.row_edges(r)
             if c < BG2_SYSTEMATIC_COLS + BG2_CORE_PARITY_COLS]
            for r in range(self.code.bg.rows)
        ]

    def encode(self, info) -> np.ndarray:
        """1280 info bits -> the 2176 transmitted bits."""
        return self.encode_batch(_as_batch(info, self.code.k))[0]

    def encode_full(self, info) -> np.ndarray:
        """1280 info bits -> all 52 Z codeword positions (punctured included)."""
        return self.encode_full_batch(_as_batch(info, self.code.k))[0]

    def encode_batch(self, info: np.ndarray) -> np.ndarray:
        full = self.encode_full_batch(info)
        start = self.code.tx_start
        return full[:, start:start + self.code.n_tx]

    def encode_full_batch(self, info: np.ndarray) -> np.ndarray:
        code = self.code
        z = code.z
        info = np.asarray(info, dtype=np.uint8)
        if info.ndim != 2 or info.shape[1] != code.k:
            raise ValueError(f"info batch must be (B, {code.k}), got {info.shape}")
        if info.max(initial=0) > 1:
            raise ValueError("info bits must be 0/1")
        b = info.shape[0]

        sys_blocks = info.reshape(b, BG2_SYSTEMATIC_COLS, z)
        lam = np.zeros((b, _CORE_ROWS * z), dtype=np.uint8)
        for r in range(_CORE_ROWS):
            acc = np.zeros((b, z), dtype=np.uint8)
            for c, s in self._row_edges[r]:
                if c < BG2_SYSTEMATIC_COLS:
                    acc ^= np.roll(sys_blocks[:, c, :], -s, axis=1)
            lam[:, r * z:(r + 1) * z] = acc

        # core_block @ p_core = lam  =>  p_core = core_inv @ lam  (over GF(2));
        # float32 matmul is exact here (row sums stay far below 2**24)
        p_core = (lam.astype(np.float32) @ self._core_inv_f32) % 2
        p_core = p_core.astype(np.uint8)

        full = np.zeros((b, code.n_positions), dtype=np.uint8)
        full[:, :code.k] = info
        core_start = BG2_SYSTEMATIC_COLS * z
        full[:, core_start:core_start + _CORE_ROWS * z] = p_core

        blocks = full.reshape(b, code.bg.cols, z)
        for r in range(_CORE_ROWS, code.bg.rows):
            acc = np.zeros((b, z), dtype=np.uint8)
            for c, s in self._row_edges[r]:
                acc ^= np.roll(blocks[:, c, :], -s, axis=1)
            # extension entry of row r sits at column r + 10 with shift 0
            blocks[:, r + BG2_SYSTEMATIC_COLS, :] = acc
        return blocks.reshape(b, code.n_positions)


def _invert_core_block(code: LiftedCode) -> np.ndarray:
    """Dense GF(2) inverse of the core parity subsystem (rows 0..3, cols 10..13)."""
    z = code.z
    n = _CORE_ROWS * z
    mat = np.zeros((n, n), dtype=np.uint8)
    for (r, c), s in code.bg.entries.items():
        if r < _CORE_ROWS and BG2_SYSTEMATIC_COLS <= c < BG2_SYSTEMATIC_COLS + BG2_CORE_PARITY_COLS:
            k = np.arange(z)
            mat[r * z + k, (c - BG2_SYSTEMATIC_COLS) * z + (k + s) % z] = 1

    aug = np.concatenate([mat, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if pivots.size == 0:
            raise ValueError("core parity block is singular")
        p = pivots[0] + col
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        elim = np.nonzero(aug[:, col])[0]
        elim = elim[elim != col]
        aug[elim] ^= aug[col]
    return aug[:, n:]


def _as_batch(bits, length: int) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.shape != (length,):
        raise ValueError(f"expected {length} bits, got shape {arr.shape}")
    return arr[None, :]


_DEFAULT: Encoder | None = None


def default_encoder() -> Encoder:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Encoder()
    return _DEFAULT


def encode(info) -> np.ndarray:
    return default_encoder().encode(info)


def encode_full(info) -> np.ndarray:
    return default_encoder().encode_full(info)
