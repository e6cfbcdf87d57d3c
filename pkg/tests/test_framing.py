"""Framing: CRC, header packing, sync sequence, payload chunking."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from w2a_owc import framing as fr


def crc24_shift_register(bits):
    """Naive long-division oracle: message followed by 24 zeros, divided
    MSB-first by the generator polynomial."""
    reg = list(np.asarray(bits, dtype=np.uint8)) + [0] * fr.CRC_BITS
    gen = [1] + [(fr.CRC24_POLY >> (fr.CRC_BITS - 1 - i)) & 1
                 for i in range(fr.CRC_BITS)]
    for i in range(len(bits)):
        if reg[i]:
            for j, g in enumerate(gen):
                reg[i + j] ^= g
    return np.array(reg[-fr.CRC_BITS:], dtype=np.uint8)


class TestCrc:
    def test_zero_message_zero_crc(self):
        assert not fr.crc24(np.zeros(1256, dtype=np.uint8)).any()

    def test_matches_shift_register_oracle(self):
        rng = np.random.default_rng(0)
        for length in (24, 100, 1256):
            for _ in range(10):
                msg = rng.integers(0, 2, size=length, dtype=np.uint8)
                assert np.array_equal(fr.crc24(msg), crc24_shift_register(msg))

    def test_single_flip_always_changes_crc(self):
        rng = np.random.default_rng(1)
        msg = rng.integers(0, 2, size=1256, dtype=np.uint8)
        base = fr.crc24(msg)
        for pos in rng.choice(1256, size=100, replace=False):
            flipped = msg.copy()
            flipped[pos] ^= 1
            assert not np.array_equal(fr.crc24(flipped), base)

    def test_random_blocks_virtually_never_pass(self):
        # false-pass probability is 2^-24 per block; over 1e6 random
        # blocks the expected count is ~0.06
        rng = np.random.default_rng(2)
        n = 1_000_000
        chunk = 50_000
        false_passes = 0
        for _ in range(n // chunk):
            blocks = rng.integers(0, 2, size=(chunk, fr.INFO_BITS), dtype=np.uint8)
            false_passes += int(fr.crc_ok_batch(blocks).sum())
        assert false_passes <= 2


class TestHeader:
    def test_pack_unpack_roundtrip(self):
        h = fr.FrameHeader(stream_id=2, seq=0xABCDEF)
        assert fr.unpack_header(fr.pack_header(h)) == h

    def test_packs_to_32_bits(self):
        assert fr.pack_header(fr.FrameHeader(1, 1)).shape == (32,)

    def test_field_ranges(self):
        with pytest.raises(ValueError):
            fr.FrameHeader(stream_id=256, seq=0)
        with pytest.raises(ValueError):
            fr.FrameHeader(stream_id=0, seq=1 << 24)

    def test_address_match(self):
        assert fr.address_match(fr.FrameHeader(2, 9), 2)
        assert not fr.address_match(fr.FrameHeader(2, 9), 0)


class TestAssembleVerify:
    def test_bit_budget(self):
        assert fr.HEADER_BITS + fr.PAYLOAD_BITS + fr.CRC_BITS == fr.INFO_BITS == 1280

    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        payload = rng.integers(0, 2, size=1224, dtype=np.uint8)
        header = fr.FrameHeader(1, 77)
        info = fr.assemble_info(header, payload)
        assert info.shape == (1280,)
        got_header, got_payload, ok = fr.verify_and_split(info)
        assert ok and got_header == header
        assert np.array_equal(got_payload, payload)

    def test_all_zero_input_gives_zero_crc(self):
        info = fr.assemble_info(fr.FrameHeader(0, 0), np.zeros(1224, dtype=np.uint8))
        assert not info.any()

    def test_crc_oracle_agreement(self):
        rng = np.random.default_rng(4)
        payload = rng.integers(0, 2, size=1224, dtype=np.uint8)
        header = fr.FrameHeader(1, 0)
        info = fr.assemble_info(header, payload)
        body = np.concatenate([fr.pack_header(header), payload])
        assert np.array_equal(info[-24:], crc24_shift_register(body))

    def test_single_flip_detected(self):
        rng = np.random.default_rng(5)
        info = fr.assemble_info(fr.FrameHeader(0, 5),
                                rng.integers(0, 2, size=1224, dtype=np.uint8))
        for pos in rng.choice(1280, size=60, replace=False):
            bad = info.copy()
            bad[pos] ^= 1
            assert not fr.verify_and_split(bad)[2]

    def test_header_payload_returned_even_on_bad_crc(self):
        info = np.zeros(1280, dtype=np.uint8)
        info[-1] = 1  # nonzero crc over zero body
        header, payload, ok = fr.verify_and_split(info)
        assert not ok
        assert header == fr.FrameHeader(0, 0)
        assert payload.shape == (1224,)

    def test_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            fr.assemble_info(fr.FrameHeader(0, 0), np.zeros(1223, dtype=np.uint8))
        with pytest.raises(ValueError):
            fr.verify_and_split(np.zeros(1281, dtype=np.uint8))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(6)
        payloads = rng.integers(0, 2, size=(7, 1224), dtype=np.uint8)
        batch = fr.assemble_info_batch(2, np.arange(7), payloads)
        for i in range(7):
            single = fr.assemble_info(fr.FrameHeader(2, i), payloads[i])
            assert np.array_equal(batch[i], single)
        assert fr.crc_ok_batch(batch).all()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**63 - 1))
    def test_roundtrip_property(self, seed):
        rng = np.random.default_rng(seed)
        header = fr.FrameHeader(int(rng.integers(0, 256)), int(rng.integers(0, 1 << 24)))
        payload = rng.integers(0, 2, size=1224, dtype=np.uint8)
        got_header, got_payload, ok = fr.verify_and_split(
            fr.assemble_info(header, payload))
        assert ok and got_header == header and np.array_equal(got_payload, payload)


class TestSyncSequence:
    def test_length_and_values(self):
        seq = fr.sync_sequence()
        assert seq.shape == (256,)
        assert set(np.unique(seq)) <= {0, 1}

    def test_sidelobe_invariant(self):
        peak, worst = fr.sync_autocorrelation_profile(fr.sync_sequence())
        assert peak == 256
        assert worst < 0.5 * peak

    def test_lfsr_is_maximal_length(self):
        bits = fr._lfsr_bits(fr.SYNC_LFSR_POLY, fr.SYNC_LFSR_SEED, 1024)
        assert np.array_equal(bits[:-255], bits[255:])       # period divides 255
        for p in (5, 15, 17, 51, 85):                        # proper divisors
            assert not np.array_equal(bits[:-p], bits[p:])

    def test_preamble_not_mimicked_by_coded_payloads(self):
        # correlation of the preamble against random coded content stays
        # far below the detection threshold at every alignment
        from w2a_owc.ldpc5g import Encoder
        rng = np.random.default_rng(7)
        enc = Encoder()
        info = rng.integers(0, 2, size=(50, 1280), dtype=np.uint8)
        coded = enc.encode_batch(info)
        pre = 1.0 - 2.0 * fr.sync_sequence().astype(np.float64)
        body = 1.0 - 2.0 * coded.astype(np.float64)
        for row in body:
            corr = np.correlate(row, pre, mode="valid") / 256.0
            assert np.abs(corr).max() < 0.6


class TestFrame:
    def test_build_frame_layout(self):
        rng = np.random.default_rng(8)
        codeword = rng.integers(0, 2, size=2176, dtype=np.uint8)
        bits = fr.frame_bits(fr.build_frame(codeword))
        assert bits.shape == (2432,)
        assert np.array_equal(bits[:256], fr.sync_sequence())
        assert np.array_equal(bits[256:], codeword)

    def test_duration_at_air_rate(self):
        assert fr.FRAME_BITS / 5e6 == pytest.approx(486.4e-6)

    def test_rejects_bad_codeword(self):
        with pytest.raises(ValueError):
            fr.build_frame(np.zeros(2175, dtype=np.uint8))


class TestPayloadChunking:
    def test_exact_multiple(self):
        data = bytes(range(256)) * 2  # not a multiple; then force one
        exact = bytes(153)
        assert fr.payloads_from_bytes(exact).shape == (1, 1224)

    def test_padding(self):
        chunks = fr.payloads_from_bytes(b"\xff" * 200)
        assert chunks.shape == (2, 1224)
        # second chunk: 47 data bytes then zero padding
        assert chunks[1][:47 * 8].all()
        assert not chunks[1][47 * 8:].any()

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fr.payloads_from_bytes(b"")
