"""Acceptance suite: one test per system-level criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -s``);
tolerances are pinned in the assertions.  The wavy-regime check runs
200k frames per path and takes tens of minutes; everything else is
seconds to a few minutes.
"""

import numpy as np
import pytest
from scipy.stats import norm

from w2a_owc import harness as hs
from w2a_owc.config import load_settings
from w2a_owc.framing import FRAME_BITS
from w2a_owc.ldpc5g import (
    Encoder,
    MinSumDecoder,
    build_lifted_code,
    expand_parity_matrix,
)
from w2a_owc.scheduler import DecodeJob, run_shared_decoder

CODE = build_lifted_code()
ENC = Encoder(CODE)
DEC = MinSumDecoder(CODE)


def _report(name: str, ok: bool, detail: str):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


class TestAcceptance:
    def test_a1_code_structure(self):
        ok = (CODE.z == 128 and CODE.k == 1280 and CODE.n_tx == 2176
              and round(CODE.k / CODE.n_tx, 3) == 0.588
              and CODE.n_full == 6400
              and FRAME_BITS == 2432)
        _report("A1 code structure", ok,
                f"Z={CODE.z} K={CODE.k} N_tx={CODE.n_tx} rate={CODE.k/CODE.n_tx:.4f}")

    def test_a2_codec_roundtrip_10k(self):
        rng = np.random.default_rng(101)
        n = 10_000
        h = expand_parity_matrix(CODE)
        failures = 0
        syndrome_bad = 0
        for lo in range(0, n, 1000):
            info = rng.integers(0, 2, size=(1000, 1280), dtype=np.uint8)
            full = ENC.encode_full_batch(info)
            syndrome_bad += int((((full @ h.T.astype(np.int64)) % 2).any(axis=1)).sum())
            tx = full[:, CODE.tx_start:CODE.tx_start + CODE.n_tx]
            llrs = 30.0 * (1.0 - 2.0 * tx.astype(np.float64))
            bits, conv, _ = DEC.decode_batch(llrs)
            failures += int((~((bits == info).all(axis=1) & conv)).sum())
        _report("A2 codec round trip", failures == 0 and syndrome_bad == 0,
                f"{n} blocks, {failures} decode failures, "
                f"{syndrome_bad} syndrome-oracle rejections")

    def test_a3_error_correction_sanity(self):
        # per-bit SNR chosen so hard decisions err at ~1e-2
        rng = np.random.default_rng(102)
        amplitude = norm.isf(1e-2)
        n = 10_000
        failures = 0
        hard_errors = 0
        total_bits = 0
        for lo in range(0, n, 500):
            info = rng.integers(0, 2, size=(500, 1280), dtype=np.uint8)
            tx = ENC.encode_batch(info)
            y = amplitude * (1.0 - 2.0 * tx) + rng.standard_normal(tx.shape)
            hard_errors += int(((y < 0) != (tx == 1)).sum())
            total_bits += tx.size
            llrs = np.clip(2.0 * amplitude * y, -30, 30)
            bits, _, _ = DEC.decode_batch(llrs)
            failures += int((~(bits == info).all(axis=1)).sum())
        raw_ber = hard_errors / total_bits
        fer = failures / n
        ok = 0.8e-2 < raw_ber < 1.25e-2 and fer < 1e-3
        _report("A3 error-correction sanity", ok,
                f"raw BER {raw_ber:.3e}, decoded FER {fer:.1e} over {n} frames")

    def test_a4_calm_reproduction(self):
        settings = load_settings(preset="calm", n_frames=10_000, seed=2024)
        report = hs.run_experiment(settings)
        ok = (report.frames_crc_ok == report.frames_sent).all() \
            and report.average_fer == 0.0
        _report("A4 calm-surface reproduction", ok,
                f"sent {report.frames_sent.tolist()} crc_ok "
                f"{report.frames_crc_ok.tolist()} avg FER {report.average_fer:.1e}")

    @pytest.mark.slow
    def test_a5_wavy_regime(self):
        settings = load_settings(preset="wavy", n_frames=200_000, seed=77)
        report = hs.run_experiment(settings)
        fer = report.average_fer
        ok = 1e-5 <= fer <= 1e-4
        _report("A5 wavy-surface regime", ok,
                f"avg FER {fer:.3e} over {int(report.frames_sent.sum())} frames, "
                f"per path crc_ok {report.frames_crc_ok.tolist()}, "
                f"received {report.frames_received.tolist()}")

    def test_a6_multiplexing_equivalence(self):
        settings = load_settings(preset="wavy", n_frames=4000, seed=33)
        points = [5.5, 7.0, 9.06675]
        comparisons = hs.compare_modes(settings, points)  # raises on any diff
        errored = sum(int(c.shared.frames_sent.sum() - c.shared.frames_crc_ok.sum())
                      for c in comparisons)
        fers = {c.vpp: c.shared.average_fer for c in comparisons}
        _report("A6 multiplexing equivalence", True,
                f"bit-identical at vpp {points}; shared FERs "
                + ", ".join(f"{v:g}:{f:.2e}" for v, f in fers.items())
                + f"; {errored} errored frames exercised")

    def test_a7_scheduler_timing(self):
        rng = np.random.default_rng(103)
        def jobs():
            out = []
            for k, t in enumerate((0.0, 80e-6, 160e-6)):
                info = rng.integers(0, 2, size=1280, dtype=np.uint8)
                llrs = 20.0 * (1.0 - 2.0 * ENC.encode(info))
                out.append(DecodeJob(stream_hint=k, llrs=llrs, arrival_time=t))
            return out

        _, tl70 = run_shared_decoder(jobs(), 70e-6)
        _, tl90 = run_shared_decoder(jobs(), 90e-6)
        queue_90 = tl90.records[1].queue_delay
        ok = (tl70.overlap_free
              and not tl90.overlap_free
              and queue_90 == pytest.approx(10e-6, abs=1e-12)
              and tl90.records[1].start == pytest.approx(90e-6, abs=1e-12))
        _report("A7 scheduler timing", ok,
                f"70us overlap_free={tl70.overlap_free}; "
                f"90us second-job queue delay {queue_90*1e6:.1f} us")

    @pytest.mark.slow
    def test_a8_fer_monotonicity(self):
        settings = load_settings(preset="wavy", n_frames=10_000, seed=55)
        points = [5.0, 6.5, 8.0, 9.06675]
        results = hs.sweep_vpp(settings, points)
        fers = [r.average_fer for _, r in results]
        diffs_ok = all(a >= b for a, b in zip(fers, fers[1:]))
        _report("A8 FER monotonicity in vpp", diffs_ok,
                " -> ".join(f"{v:g}:{f:.3e}" for v, f in zip(points, fers)))

    def test_a9_determinism(self, tmp_path):
        settings = load_settings(preset="wavy", n_frames=2000, seed=99)
        points = [6.0, 9.06675]
        paths = [tmp_path / "run1.csv", tmp_path / "run2.csv"]
        for p in paths:
            hs.sweep_vpp(settings, points, csv_out=p)
        same = paths[0].read_bytes() == paths[1].read_bytes()
        _report("A9 determinism", same,
                f"two seeded sweeps emit byte-identical CSV ({paths[0].stat().st_size} bytes)")
