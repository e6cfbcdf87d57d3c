"""Normalized min-sum decoding with a flooding schedule.

The receiver only sees 17 Z of the 52 Z codeword positions, so decoding
runs on the subgraph that carries information: base rows 0..8 and columns
0..18 (the punctured 2 Z systematic bits enter with zero LLR).  Rows 9..41
each bind one untransmitted degree-one parity column whose LLR is zero;
under min-sum those rows emit zero-magnitude messages forever, so pruning
them changes nothing about the message passing and only removes dead work.

A check is treated as satisfied when the sign product of its incident
posteriors is strictly positive; a zero posterior leaves the check
undecided.  Convergence therefore requires every active bit to be decided,
and an all-zero input can never converge.

Messages are vectorized over a batch of frames; frames that converge are
retired from the working set so high-SNR batches cost one or two
iterations.  Each frame's result is independent of how frames are batched.
"""

import numpy as np

from .basegraph import BG2_SYSTEMATIC_COLS, LiftedCode, build_lifted_code

ACTIVE_ROWS = 9
ACTIVE_COLS = 19

DEFAULT_ALPHA = 0.75
DEFAULT_MAX_ITERS = 20


class MinSumDecoder:
    def __init__(self, code: LiftedCode | None = None,
                 alpha: float = DEFAULT_ALPHA,
                 max_iters: int = DEFAULT_MAX_ITERS):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("normalization factor must be in (0, 1]")
        self.code = code if code is not None else build_lifted_code()
        self.alpha = float(alpha)
        self.max_iters = int(max_iters)
        # per active row: column indices and shifts as arrays
        self._rows = []
        for r in range(ACTIVE_ROWS):
            edges = self.code.bg.row_edges(r)
            cols = np.array([c for c, _ in edges])
            shifts = np.array([s for _, s in edges])
            if cols.max() >= ACTIVE_COLS:
                raise ValueError("active subgraph is not closed over columns 0..18")
            self._rows.append((cols, shifts))

    def decode(self, llrs, max_iters: int | None = None):
        """One LLR block -> (info bits, converged flag, iterations used)."""
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.shape != (self.code.n_tx,):
            raise ValueError(f"expected {self.code.n_tx} LLRs, got {llrs.shape}")
        bits, conv, iters = self.decode_batch(llrs[None, :], max_iters)
        return bits[0], bool(conv[0]), int(iters[0])

    def decode_batch(self, llrs, max_iters: int | None = None):
        """(B, 2176) LLRs -> ((B, 1280) bits, (B,) converged, (B,) iters)."""
        code = self.code
        z = code.z
        max_iters = self.max_iters if max_iters is None else int(max_iters)
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.ndim != 2 or llrs.shape[1] != code.n_tx:
            raise ValueError(f"LLR batch must be (B, {code.n_tx}), got {llrs.shape}")
        if not np.isfinite(llrs).all():
            raise ValueError("LLRs must be finite")

        b_total = llrs.shape[0]
        # channel LLRs on the active grid; columns 0..1 are punctured (zero)
        ch = np.zeros((b_total, ACTIVE_COLS, z))
        ch[:, 2:, :] = llrs.reshape(b_total, ACTIVE_COLS - 2, z)

        out_bits = np.zeros((b_total, code.k), dtype=np.uint8)
        out_conv = np.zeros(b_total, dtype=bool)
        out_iters = np.full(b_total, max_iters, dtype=np.int64)

        active = np.arange(b_total)
        post = ch.copy()
        c2v = [np.zeros((b_total, len(cols), z)) for cols, _ in self._rows]

        for it in range(1, max_iters + 1):
            new_msgs = []
            for r, (cols, shifts) in enumerate(self._rows):
                v2c = self._gather(post, cols, shifts) - c2v[r]
                new_msgs.append(self._check_update(v2c))

            post = ch.copy()
            for r, (cols, shifts) in enumerate(self._rows):
                msgs = new_msgs[r]
                for e, (c, s) in enumerate(zip(cols, shifts)):
                    post[:, c, :] += np.roll(msgs[:, e, :], s, axis=1)
            c2v = new_msgs

            ok = self._satisfied(post)
            if ok.any():
                done = active[ok]
                out_bits[done] = (post[ok, :BG2_SYSTEMATIC_COLS, :] < 0).reshape(
                    len(done), code.k).astype(np.uint8)
                out_conv[done] = True
                out_iters[done] = it
                keep = ~ok
                active = active[keep]
                if active.size == 0:
                    return out_bits, out_conv, out_iters
                post = post[keep]
                ch = ch[keep]
                c2v = [m[keep] for m in c2v]

        out_bits[active] = (post[:, :BG2_SYSTEMATIC_COLS, :] < 0).reshape(
            active.size, code.k).astype(np.uint8)
        return out_bits, out_conv, out_iters

    def _gather(self, post, cols, shifts):
        """Align posterior blocks to check-node order: (B, d, Z)."""
        return np.stack(
            [np.roll(post[:, c, :], -s, axis=1) for c, s in zip(cols, shifts)],
            axis=1)

    def _check_update(self, v2c):
        neg = v2c < 0
        row_sign = 1.0 - 2.0 * (neg.sum(axis=1) & 1)        # (B, Z)
        mag = np.abs(v2c)
        amin = mag.argmin(axis=1)[:, None, :]               # (B, 1, Z)
        min1 = np.take_along_axis(mag, amin, axis=1)
        tmp = mag.copy()
        np.put_along_axis(tmp, amin, np.inf, axis=1)
        min2 = tmp.min(axis=1, keepdims=True)
        d = v2c.shape[1]
        is_min = np.arange(d)[None, :, None] == amin
        out_mag = np.where(is_min, min2, min1)
        edge_sign = row_sign[:, None, :] * (1.0 - 2.0 * neg)
        return self.alpha * edge_sign * out_mag

    def _satisfied(self, post):
        """Per-frame: all checks decided and even-parity (sign product > 0)."""
        ok = np.ones(post.shape[0], dtype=bool)
        for cols, shifts in self._rows:
            g = self._gather(post, cols, shifts)
            decided = (g != 0).all(axis=1)
            even = (g < 0).sum(axis=1) % 2 == 0
            ok &= (decided & even).all(axis=1)
        return ok


_DEFAULT: MinSumDecoder | None = None


def default_decoder() -> MinSumDecoder:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = MinSumDecoder()
    return _DEFAULT


def decode_min_sum(llrs, max_iters: int = DEFAULT_MAX_ITERS):
    """1 frame of 2176 LLRs -> (1280 info bits, converged, iters_used)."""
    return default_decoder().decode(llrs, max_iters)
