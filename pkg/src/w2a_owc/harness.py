"""End-to-end frame-error-rate experiments.

Each transmit stream is simulated frame by frame through the complete
chain: payload framing with CRC, LDPC encoding, preamble attachment, OOK
modulation, the water-to-air channel (static gain, surface fluctuation at
each sample's absolute time, additive noise), correlation sync, per-bit
downsampling, preamble-based level estimation, LLR computation, and
min-sum decoding either through the single shared decoder resource or
through per-stream dedicated decoders.

Streams start at their stagger offsets, so a frame's absolute window
position determines the surface gain it experiences.  The emitters are
spaced to keep the channels independent (identity crosstalk), which lets
the simulator process each stream in windowed batches; this is exactly
equivalent to mixing the staggered waveforms on a common timeline.
Cross-channel mixing experiments live at the channel-op level
(channel.apply_channel), outside this harness.

Everything is deterministic for a fixed seed: payload bytes, noise, and
batching boundaries are all derived from the configuration alone.
"""

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import channel as ch
from . import framing as fr
from . import modem as md
from .config import ConfigError, ExperimentSettings
from .ldpc5g import MinSumDecoder, build_lifted_code, default_encoder
from .scheduler import (
    DecodeJob,
    DecodeTimeline,
    FerCounters,
    StaggerPlan,
    run_shared_decoder,
)

log = logging.getLogger("w2a_owc.harness")

BATCH_FRAMES = 256      # fixed so batching never influences results
EMBED_OFFSET = 64       # samples of pre-frame guard inside each window
POST_GUARD = 64


@dataclass
class FerReport:
    n_paths: int
    vpp: float
    mode: str
    frames_sent: np.ndarray
    frames_received: np.ndarray
    frames_crc_ok: np.ndarray
    unroutable: int
    fer_per_path: np.ndarray
    average_fer: float
    overlap_free: bool
    max_queue_delay_s: float
    duration_s: float
    settings: dict
    decoded: "_DecodedStore | None" = None

    def lines(self) -> list[str]:
        out = [f"mode={self.mode} vpp={self.vpp:g} frames/path={int(self.frames_sent[0])}"]
        for p in range(self.n_paths):
            out.append(
                f"path {p}: sent={self.frames_sent[p]} received={self.frames_received[p]} "
                f"crc_ok={self.frames_crc_ok[p]} fer={self.fer_per_path[p]:.6e}")
        out.append(f"average fer: {self.average_fer:.6e}")
        if self.mode == "shared":
            out.append(f"shared decoder overlap_free={self.overlap_free} "
                       f"max_queue_delay={self.max_queue_delay_s * 1e6:.1f} us")
        return out


@dataclass
class _StreamBatch:
    """Decode-ready frames of one stream for one batch of frame indices."""
    stream: int
    frame_idx: np.ndarray       # global frame numbers within the stream
    arrivals: np.ndarray        # decoder arrival time per frame (seconds)
    llrs: np.ndarray            # (n_detected, 2176)
    detected: np.ndarray        # bool per frame in the batch


def run_experiment(settings: ExperimentSettings, collect_decoded: bool = False,
                   timeline_out=None) -> FerReport:
    """Run the configured experiment and return its FER report."""
    t_begin = time.monotonic()
    _validate(settings)
    code = build_lifted_code()
    encoder = default_encoder()
    decoder = MinSumDecoder(code, alpha=settings.min_sum_alpha,
                            max_iters=settings.max_iters)
    cfg = _modem_config(settings, settings.vpp)
    geom, params, surface = _channel_setup(settings)
    plan = StaggerPlan.evenly_staggered(settings.n_streams, settings.stagger_s,
                                        cfg.frame_duration)

    gain = ch.static_gain(geom, params)
    counters = FerCounters(n_paths=settings.n_streams)
    counters.frames_sent += settings.n_frames
    decoded_store = _DecodedStore(settings) if collect_decoded else None
    timeline_records = [] if timeline_out is not None else None

    payload_gens = [_payload_source(settings, k) for k in range(settings.n_streams)]
    shared_busy = -np.inf
    overlap_free = True
    max_queue = 0.0

    n_batches = -(-settings.n_frames // BATCH_FRAMES)
    for b in range(n_batches):
        lo = b * BATCH_FRAMES
        hi = min(lo + BATCH_FRAMES, settings.n_frames)
        batches = []
        for k in range(settings.n_streams):
            sb = _simulate_stream_batch(
                settings, cfg, encoder, payload_gens[k], k, lo, hi,
                gain, surface, params.noise_std, plan)
            counters.frames_received[k] += int(sb.detected.sum())
            batches.append(sb)

        if settings.mode == "shared":
            jobs, owners = _merge_jobs(batches)
            results, timeline = run_shared_decoder(
                jobs, settings.decode_latency_s, decoder,
                max_iters=settings.max_iters, busy_from=shared_busy)
            if timeline.records:
                shared_busy = timeline.records[-1].finish
                overlap_free &= timeline.overlap_free
                max_queue = max(max_queue, max(r.queue_delay for r in timeline.records))
                if timeline_records is not None:
                    timeline_records.extend(timeline.records)
            decoded = np.stack([r[0] for r in results]) if results else \
                np.zeros((0, code.k), dtype=np.uint8)
            _tally_batch(decoded, counters, decoded_store, owners)
        else:
            for sb in batches:
                if sb.llrs.shape[0] == 0:
                    continue
                bits, _, _ = decoder.decode_batch(sb.llrs, settings.max_iters)
                owners = [(sb.stream, int(i)) for i in sb.frame_idx[sb.detected]]
                _tally_batch(bits, counters, decoded_store, owners)

    counters.check_invariants()
    if timeline_out is not None and timeline_records is not None:
        _write_timeline(timeline_out, DecodeTimeline(timeline_records, overlap_free))

    return FerReport(
        n_paths=settings.n_streams,
        vpp=settings.vpp,
        mode=settings.mode,
        frames_sent=counters.frames_sent.copy(),
        frames_received=counters.frames_received.copy(),
        frames_crc_ok=counters.frames_crc_ok.copy(),
        unroutable=counters.unroutable,
        fer_per_path=counters.fer_per_path(),
        average_fer=counters.average_fer(),
        overlap_free=overlap_free if settings.mode == "shared" else True,
        max_queue_delay_s=max_queue,
        duration_s=time.monotonic() - t_begin,
        settings=asdict(settings),
        decoded=decoded_store,
    )


def _validate(settings: ExperimentSettings) -> None:
    if settings.surface == "wavy" and not settings.wave_components:
        raise ConfigError("wavy surface needs wave components")
    cfg = _modem_config(settings, settings.vpp)  # raises on bad rates / vpp
    frame_span = settings.stagger_s * (settings.n_streams - 1)
    if frame_span >= cfg.frame_duration:
        raise ConfigError("stagger offsets exceed one frame period")


def _modem_config(settings: ExperimentSettings, vpp: float) -> md.ModemConfig:
    return md.ModemConfig(
        sample_rate=settings.sample_rate_hz,
        bit_rate=settings.bit_rate_hz,
        vpp=vpp,
        sync_threshold=settings.sync_threshold,
        llr_clip=settings.llr_clip,
        sigma_floor=settings.sigma_floor,
    )


def _channel_setup(settings: ExperimentSettings):
    geom = ch.ChannelGeometry(
        d_w=settings.depth_m, d_a=settings.height_m,
        n_channels=settings.n_streams, spacing_m=settings.led_spacing_m)
    params = ch.ChannelParams(
        attenuation_c=settings.attenuation_c,
        gain_scale=settings.gain_scale,
        noise_std=settings.noise_std,
        background_mw=settings.background_mw)
    if settings.surface == "calm":
        surface = ch.calm_surface()
    else:
        surface = ch.wavy_surface(settings.modulation_depth, settings.wave_components)
    return geom, params, surface


def _payload_source(settings: ExperimentSettings, stream: int):
    """Per-stream payload generator; consumption order is batch-size free."""
    if settings.payload_file:
        with open(settings.payload_file, "rb") as f:
            chunks = fr.payloads_from_bytes(f.read())
        cursor = stream

        def from_file(n: int):
            nonlocal cursor
            rows = []
            for _ in range(n):
                rows.append(chunks[cursor % len(chunks)])
                cursor += settings.n_streams
            return np.stack(rows)
        return from_file

    rng = np.random.default_rng(np.random.SeedSequence([settings.seed, stream, 0x9A710AD]))

    def random_bits(n: int):
        return rng.integers(0, 2, size=(n, fr.PAYLOAD_BITS), dtype=np.uint8)
    return random_bits


def _simulate_stream_batch(settings, cfg, encoder, payload_gen, stream, lo, hi,
                           gain, surface, noise_std, plan) -> _StreamBatch:
    n = hi - lo
    seqs = (np.arange(lo, hi)) % (1 << fr.SEQ_BITS)
    infos = fr.assemble_info_batch(stream, seqs, payload_gen(n))
    codewords = encoder.encode_batch(infos)
    bits = fr.frame_bits_batch(codewords)

    spb = cfg.samples_per_bit
    frame_samples = cfg.frame_samples
    window = EMBED_OFFSET + frame_samples + POST_GUARD
    # received levels: static link gain and per-bit surface gain folded in.
    # The surface components sit below 10 Hz, so the gain is constant over
    # one 4 us bit to a few 1e-5 of itself; sampling it per bit instead of
    # per sample changes nothing measurable (the channel op itself applies
    # strictly per-sample gain).
    offset = plan.offsets[stream]
    frame_starts = offset + (lo + np.arange(n)) * cfg.frame_duration
    levels = (0.5 * cfg.vpp * gain) * md.bipolar(bits).astype(np.float32)
    if surface.mode != "calm":
        bit_centers = (np.arange(fr.FRAME_BITS) + 0.5) / cfg.bit_rate
        g_bits = ch.fluctuation_gain_at(surface, frame_starts, bit_centers)
        levels *= g_bits.astype(np.float32)
    rx = np.zeros((n, window), dtype=np.float32)
    rx[:, EMBED_OFFSET:EMBED_OFFSET + frame_samples] \
        .reshape(n, fr.FRAME_BITS, spb)[:] = levels[:, :, None]

    if noise_std > 0:
        rng = np.random.default_rng(
            np.random.SeedSequence([settings.seed, stream, lo, 0x0153]))
        noise = rng.standard_normal(rx.shape, dtype=np.float32)
        np.multiply(noise, np.float32(noise_std), out=noise)
        np.add(rx, noise, out=rx)

    detected, offsets = _sync_batch(rx, cfg)
    idx = np.nonzero(detected)[0]
    if idx.size == 0:
        return _StreamBatch(stream, np.arange(lo, hi), np.zeros(0),
                            np.zeros((0, fr.CODED_BITS)), detected)

    values = _downsample_at(rx[idx], offsets[idx], cfg)
    pre = fr.sync_sequence()
    ones = pre == 1
    head = values[:, :fr.SYNC_BITS]
    mu1 = head[:, ones].mean(axis=1)
    mu0 = head[:, ~ones].mean(axis=1)
    resid = head - np.where(ones[None, :], mu1[:, None], mu0[:, None])
    sigma = np.maximum(resid.std(axis=1), cfg.sigma_floor)
    llrs = md.compute_llrs_batch(values[:, fr.SYNC_BITS:].astype(np.float64),
                                 mu1, mu0, sigma, cfg.llr_clip)

    arrivals = offset + (lo + idx + 1) * cfg.frame_duration
    return _StreamBatch(stream, np.arange(lo, hi), arrivals, llrs, detected)


def _sync_batch(rx: np.ndarray, cfg: md.ModemConfig):
    """Correlate the expected-position neighborhood of each window.

    The preamble template is constant over each bit period, so the
    correlation numerator reduces to bipolar-weighted sums of per-bit
    sample boxes, evaluated from one cumulative sum.  This is exactly the
    full-rate correlation, just cheaper.
    """
    spb = cfg.samples_per_bit
    bip = md.bipolar(fr.sync_sequence())
    n = fr.SYNC_BITS * spb
    n_lags = 2 * EMBED_OFFSET + 1
    seg = rx[:, :n_lags - 1 + n].astype(np.float64)
    csum = np.concatenate([np.zeros((seg.shape[0], 1)), np.cumsum(seg, axis=1)], axis=1)
    box = np.ascontiguousarray(csum[:, spb:] - csum[:, :-spb])  # sliding bit sums
    strided = np.lib.stride_tricks.as_strided(
        box, shape=(box.shape[0], n_lags, fr.SYNC_BITS),
        strides=(box.strides[0], box.strides[1], spb * box.strides[1]))
    num = np.einsum("rlb,b->rl", strided, bip)
    csq = np.concatenate([np.zeros((seg.shape[0], 1)),
                          np.cumsum(np.square(seg), axis=1)], axis=1)
    energy = csq[:, n:] - csq[:, :-n]
    corr = num / (np.sqrt(np.maximum(energy, 1e-30)) * np.sqrt(float(n)))
    best = corr.argmax(axis=1)
    peak = np.take_along_axis(corr, best[:, None], axis=1)[:, 0]
    detected = peak >= cfg.sync_threshold
    return detected, best


def _downsample_at(rx: np.ndarray, offsets: np.ndarray, cfg: md.ModemConfig) -> np.ndarray:
    """Per-bit central means, grouping rows that share a sync offset."""
    spb = cfg.samples_per_bit
    lo = int(round(md.DOWNSAMPLE_KEEP[0] * spb))
    hi = int(round(md.DOWNSAMPLE_KEEP[1] * spb))
    n_bits = fr.FRAME_BITS
    out = np.empty((rx.shape[0], n_bits))
    for off in np.unique(offsets):
        rows = np.nonzero(offsets == off)[0]
        view = rx[rows, off:off + n_bits * spb].reshape(len(rows), n_bits, spb)
        out[rows] = view[:, :, lo:hi].mean(axis=2, dtype=np.float64)
    return out


def _merge_jobs(batches: list[_StreamBatch]):
    """Interleave all streams' detected frames in arrival order."""
    arrivals = np.concatenate([sb.arrivals for sb in batches])
    streams = np.concatenate([np.full(len(sb.arrivals), sb.stream) for sb in batches])
    frames = np.concatenate([sb.frame_idx[sb.detected] for sb in batches])
    llrs = np.concatenate([sb.llrs for sb in batches]) if arrivals.size else \
        np.zeros((0, fr.CODED_BITS))
    order = np.lexsort((streams, arrivals))
    jobs = [DecodeJob(stream_hint=int(streams[i]), llrs=llrs[i],
                      arrival_time=float(arrivals[i])) for i in order]
    owners = [(int(streams[i]), int(frames[i])) for i in order]
    return jobs, owners


class _DecodedStore:
    """Packed decoded info blocks keyed by (path, frame index)."""

    def __init__(self, settings: ExperimentSettings):
        self.packed = np.zeros((settings.n_streams, settings.n_frames, fr.INFO_BITS // 8),
                               dtype=np.uint8)
        self.have = np.zeros((settings.n_streams, settings.n_frames), dtype=bool)

    def put(self, owners, decoded: np.ndarray):
        packed = np.packbits(decoded, axis=1)
        for (stream, frame), row in zip(owners, packed):
            self.packed[stream, frame] = row
            self.have[stream, frame] = True

    def differing_frames(self, other: "_DecodedStore"):
        diff = (self.have != other.have) | \
               (self.packed != other.packed).any(axis=2)
        return [(int(s), int(f)) for s, f in zip(*np.nonzero(diff))]


def _tally_batch(decoded: np.ndarray, counters: FerCounters,
                 store: _DecodedStore | None, owners) -> None:
    """Vectorized twin of scheduler.demux_and_tally."""
    if decoded.shape[0] == 0:
        return
    weights8 = 1 << np.arange(fr.STREAM_ID_BITS - 1, -1, -1)
    sids = decoded[:, :fr.STREAM_ID_BITS].astype(np.int64) @ weights8
    ok = fr.crc_ok_batch(decoded)
    routable = sids < counters.n_paths
    counters.unroutable += int((~routable).sum())
    np.add.at(counters.frames_crc_ok, sids[routable & ok], 1)
    if store is not None:
        store.put(owners, decoded)


def _write_timeline(path, timeline) -> None:
    with open(path, "w") as f:
        for line in timeline.lines():
            f.write(line + "\n")


def sweep_vpp(settings: ExperimentSettings, vpp_list, csv_out=None):
    """Run the experiment across drive amplitudes; emit CSV rows per path.

    A failure at one sweep point flushes the rows gathered so far before
    the error propagates.
    """
    vpps = [float(v) for v in vpp_list]
    if len(vpps) < 2:
        raise ConfigError("a sweep needs at least two vpp points")
    results = []
    try:
        for vpp in vpps:
            point = ExperimentSettings(**{**asdict(settings), "vpp": vpp})
            report = run_experiment(point)
            log.info("sweep vpp=%g avg_fer=%.3e", vpp, report.average_fer)
            results.append((vpp, report))
    finally:
        if csv_out is not None and results:
            _write_csv(csv_out, results)
    return results


def _write_csv(path, results) -> None:
    with open(path, "w") as f:
        f.write("vpp,path,fer,avg_fer\n")
        for vpp, report in results:
            for p in range(report.n_paths):
                f.write(f"{vpp:.10g},{p},{report.fer_per_path[p]:.10e},"
                        f"{report.average_fer:.10e}\n")


@dataclass
class ModeComparison:
    vpp: float
    shared: FerReport
    individual: FerReport


def compare_modes(settings: ExperimentSettings, vpp_list) -> list[ModeComparison]:
    """Run both decoder modes on identical channel realizations.

    Shared-resource and dedicated decoding must agree bit for bit; any
    difference raises with the offending (path, frame) ids.
    """
    vpps = [float(v) for v in vpp_list]
    if not vpps:
        raise ConfigError("compare needs at least one vpp point")
    if settings.n_frames < 1:
        raise ConfigError("compare needs at least one frame")
    out = []
    for vpp in vpps:
        base = {**asdict(settings), "vpp": vpp}
        rep_shared = run_experiment(
            ExperimentSettings(**{**base, "mode": "shared"}), collect_decoded=True)
        rep_indiv = run_experiment(
            ExperimentSettings(**{**base, "mode": "individual"}), collect_decoded=True)
        diff = rep_shared.decoded.differing_frames(rep_indiv.decoded)
        if diff:
            raise AssertionError(
                f"decoder modes disagree at vpp={vpp:g} on (path, frame) ids: {diff[:20]}")
        if not np.array_equal(rep_shared.frames_crc_ok, rep_indiv.frames_crc_ok):
            raise AssertionError(f"per-path CRC tallies differ at vpp={vpp:g}")
        out.append(ModeComparison(vpp=vpp, shared=rep_shared, individual=rep_indiv))
    return out
