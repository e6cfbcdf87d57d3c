"""Stream staggering and time-multiplexed decoding on one shared resource.

Transmit streams start 80 us apart so their frames never demand the
decoder at the same instant; all decode jobs then run through a single
decoder, strictly in arrival order, one at a time.  The timeline records
when each job started relative to its arrival, which makes queueing (and
the no-queueing stagger bound) directly observable.
"""

from dataclasses import dataclass, field

import numpy as np

from .framing import FRAME_BITS, INFO_BITS, verify_and_split
from .ldpc5g import MinSumDecoder, default_decoder
from .modem import ModemConfig, WaveformBuffer, ook_modulate_batch

DEFAULT_STAGGER_S = 80e-6
DEFAULT_DECODE_LATENCY_S = 70e-6


@dataclass(frozen=True)
class StaggerPlan:
    offsets: tuple[float, ...] = (0.0, 80e-6, 160e-6)
    frame_period: float = FRAME_BITS / 5e6

    def __post_init__(self):
        offs = tuple(float(o) for o in self.offsets)
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError("offsets must be strictly increasing")
        if offs and offs[-1] >= self.frame_period:
            raise ValueError("last offset must stay below the frame period")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def evenly_staggered(cls, n_streams: int, stagger: float = DEFAULT_STAGGER_S,
                         frame_period: float = FRAME_BITS / 5e6) -> "StaggerPlan":
        return cls(offsets=tuple(i * stagger for i in range(n_streams)),
                   frame_period=frame_period)

    def sustained_throughput_ok(self, decode_latency: float) -> bool:
        """One decoder keeps up iff all streams' frames fit in one period."""
        return len(self.offsets) * decode_latency <= self.frame_period

    def zero_queueing_ok(self, decode_latency: float) -> bool:
        gaps = [b - a for a, b in zip(self.offsets, self.offsets[1:])]
        gaps.append(self.frame_period - self.offsets[-1])
        return decode_latency <= min(gaps)


def stagger_transmit(frames_per_stream: list[np.ndarray], plan: StaggerPlan,
                     cfg: ModemConfig) -> list[WaveformBuffer]:
    """Per-stream waveforms on a common timeline.

    Stream k starts at offsets[k]; within a stream, frames are contiguous
    at the air rate.  All buffers share start time zero and length, with
    zeros outside each stream's active span.
    """
    if len(frames_per_stream) != len(plan.offsets):
        raise ValueError("one frame list per stream offset")
    spb = cfg.samples_per_bit
    delays = [int(round(off * cfg.sample_rate)) for off in plan.offsets]
    spans = []
    for frames, delay in zip(frames_per_stream, delays):
        frames = np.asarray(frames, dtype=np.uint8)
        if frames.ndim != 2 or frames.shape[1] != FRAME_BITS:
            raise ValueError(f"frames must be (N, {FRAME_BITS}) bit rows")
        spans.append(delay + frames.shape[0] * frames.shape[1] * spb)
    total = max(spans)

    out = []
    for frames, delay in zip(frames_per_stream, delays):
        wave = ook_modulate_batch(np.asarray(frames, dtype=np.uint8), cfg).reshape(-1)
        samples = np.zeros(total)
        samples[delay:delay + len(wave)] = wave
        out.append(WaveformBuffer(samples=samples, sample_rate=cfg.sample_rate,
                                  start_time=0.0))
    return out


@dataclass(frozen=True)
class DecodeJob:
    stream_hint: int
    llrs: np.ndarray
    arrival_time: float


@dataclass(frozen=True)
class JobRecord:
    job_id: int
    stream: int
    arrival: float
    start: float
    finish: float

    @property
    def queue_delay(self) -> float:
        return self.start - self.arrival


@dataclass
class DecodeTimeline:
    records: list[JobRecord]
    overlap_free: bool

    def lines(self) -> list[str]:
        """`job_id stream arrival start finish` rows, times in seconds."""
        return [f"{r.job_id} {r.stream} {r.arrival:.9f} {r.start:.9f} {r.finish:.9f}"
                for r in self.records]


def run_shared_decoder(jobs: list[DecodeJob], decode_latency: float,
                       decoder: MinSumDecoder | None = None,
                       max_iters: int | None = None,
                       busy_from: float = -np.inf):
    """Serve jobs with a single decoder resource, FIFO in arrival order.

    Returns (results, timeline): results[i] is the (info_bits, converged,
    iters_used) triple for jobs[i], exactly what a dedicated decoder would
    produce; the timeline captures start/finish times and whether any job
    had to queue.  ``busy_from`` seeds the resource's availability, letting
    long runs feed the same decoder in chunks.
    """
    if decode_latency <= 0:
        raise ValueError("decode latency must be positive")
    arrivals = [j.arrival_time for j in jobs]
    if any(b < a for a, b in zip(arrivals, arrivals[1:])):
        raise ValueError("jobs must be sorted by arrival time")
    decoder = decoder if decoder is not None else default_decoder()

    records = []
    busy_until = busy_from
    for i, job in enumerate(jobs):
        start = max(job.arrival_time, busy_until)
        finish = start + decode_latency
        busy_until = finish
        records.append(JobRecord(job_id=i, stream=job.stream_hint,
                                 arrival=job.arrival_time, start=start, finish=finish))
    overlap_free = all(r.start == r.arrival for r in records)

    results = []
    if jobs:
        llrs = np.stack([np.asarray(j.llrs, dtype=np.float64) for j in jobs])
        bits, conv, iters = decoder.decode_batch(llrs, max_iters)
        results = [(bits[i], bool(conv[i]), int(iters[i])) for i in range(len(jobs))]
    return results, DecodeTimeline(records=records, overlap_free=overlap_free)


@dataclass
class FerCounters:
    """Per-path frame tallies, plus a bucket for unroutable decodes."""

    n_paths: int
    frames_sent: np.ndarray = field(default=None)
    frames_received: np.ndarray = field(default=None)
    frames_crc_ok: np.ndarray = field(default=None)
    unroutable: int = 0

    def __post_init__(self):
        for name in ("frames_sent", "frames_received", "frames_crc_ok"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(self.n_paths, dtype=np.int64))

    def fer_per_path(self) -> np.ndarray:
        sent = self.frames_sent.astype(np.float64)
        errored = self.frames_sent - self.frames_crc_ok
        return np.divide(errored, sent, out=np.zeros(self.n_paths), where=sent > 0)

    def average_fer(self) -> float:
        total_sent = int(self.frames_sent.sum())
        if total_sent == 0:
            return 0.0
        return float((self.frames_sent - self.frames_crc_ok).sum() / total_sent)

    def check_invariants(self) -> None:
        if (self.frames_crc_ok > self.frames_received).any() or \
           (self.frames_received > self.frames_sent).any():
            raise AssertionError("counter ordering violated: crc_ok <= received <= sent")


def demux_and_tally(decoded_infos, counters: FerCounters) -> FerCounters:
    """Route decoded blocks by header address and count CRC passes.

    Blocks whose stream id does not name a configured path land in the
    unroutable bucket; nothing is dropped silently.  Received counts are
    maintained upstream at synchronization time.
    """
    for info in decoded_infos:
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (INFO_BITS,):
            raise ValueError(f"decoded block must have {INFO_BITS} bits")
        header, _, crc_ok = verify_and_split(info)
        if header.stream_id >= counters.n_paths:
            counters.unroutable += 1
            continue
        if crc_ok:
            counters.frames_crc_ok[header.stream_id] += 1
    return counters
