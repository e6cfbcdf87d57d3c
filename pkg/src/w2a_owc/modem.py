"""OOK baseband: waveform generation and the receiver front end.

Transmit: each bit becomes 20 rectangular samples of the AC drive,
+vpp/2 for a one and -vpp/2 for a zero (the DC operating point of the
LED is an optical-domain concern, not part of the sample stream).

Receive: per-bit values are the mean of the central half of each bit
period (robust to a few samples of residual sync error), frames are
located by normalized cross-correlation against the known preamble,
the two signal levels and the noise are estimated from the preamble,
and per-bit LLRs follow the two-level Gaussian model.  Positive LLR
means the zero bit is more likely, matching the decoder convention.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .framing import FRAME_BITS

DOWNSAMPLE_KEEP = (0.25, 0.75)  # central window of each bit period
DEFAULT_SYNC_THRESHOLD = 0.6
DEFAULT_LLR_CLIP = 30.0
DEFAULT_SIGMA_FLOOR = 1e-4


@dataclass(frozen=True)
class ModemConfig:
    sample_rate: float = 100e6
    bit_rate: float = 5e6
    vpp: float = 9.06675
    dc_bias: float = 10.8
    sync_threshold: float = DEFAULT_SYNC_THRESHOLD
    llr_clip: float = DEFAULT_LLR_CLIP
    sigma_floor: float = DEFAULT_SIGMA_FLOOR

    def __post_init__(self):
        if self.vpp <= 0:
            raise ValueError("vpp must be positive")
        spb = self.sample_rate / self.bit_rate
        if abs(spb - round(spb)) > 1e-9 or round(spb) < 2:
            raise ValueError("sample_rate must be an integral multiple (>=2) of bit_rate")

    @property
    def samples_per_bit(self) -> int:
        return int(round(self.sample_rate / self.bit_rate))

    @property
    def frame_samples(self) -> int:
        return FRAME_BITS * self.samples_per_bit

    @property
    def frame_duration(self) -> float:
        return FRAME_BITS / self.bit_rate


@dataclass
class WaveformBuffer:
    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.size and not np.isfinite(self.samples).all():
            raise ValueError("waveform samples must be finite")

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.samples)) / self.sample_rate


@dataclass(frozen=True)
class LevelEstimate:
    mu1: float
    mu0: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.mu1 + self.mu0)


def bipolar(bits) -> np.ndarray:
    """0/1 bits -> -1/+1 amplitudes (one maps to +1)."""
    return 2.0 * np.asarray(bits, dtype=np.float64) - 1.0


def ook_modulate(bits, cfg: ModemConfig, start_time: float = 0.0) -> WaveformBuffer:
    """Rectangular OOK at samples_per_bit samples per bit."""
    samples = ook_modulate_batch(np.atleast_2d(np.asarray(bits, dtype=np.uint8)), cfg)[0]
    return WaveformBuffer(samples=samples, sample_rate=cfg.sample_rate,
                          start_time=start_time)


def ook_modulate_batch(bits: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """(B, n) bits -> (B, n * samples_per_bit) sample rows."""
    bits = np.asarray(bits, dtype=np.uint8)
    amp = 0.5 * cfg.vpp
    levels = amp * bipolar(bits)
    return np.repeat(levels, cfg.samples_per_bit, axis=1)


def downsample(wave: WaveformBuffer, bit_offset_samples: int, cfg: ModemConfig,
               n_bits: int | None = None) -> np.ndarray:
    """One value per bit: mean over the central half of each bit period."""
    return downsample_batch(wave.samples[None, :], bit_offset_samples, cfg, n_bits)[0]


def downsample_batch(samples: np.ndarray, bit_offset_samples: int, cfg: ModemConfig,
                     n_bits: int | None = None) -> np.ndarray:
    samples = np.asarray(samples)
    spb = cfg.samples_per_bit
    if bit_offset_samples < 0 or bit_offset_samples > samples.shape[-1]:
        raise ValueError("offset outside buffer")
    avail = (samples.shape[-1] - bit_offset_samples) // spb
    if n_bits is None:
        n_bits = avail
    if n_bits > avail:
        raise ValueError(f"buffer truncated: need {n_bits} bits, have {avail}")
    lo = int(round(DOWNSAMPLE_KEEP[0] * spb))
    hi = int(round(DOWNSAMPLE_KEEP[1] * spb))
    view = samples[..., bit_offset_samples:bit_offset_samples + n_bits * spb]
    view = view.reshape(*samples.shape[:-1], n_bits, spb)
    return view[..., lo:hi].mean(axis=-1)


def preamble_template(preamble_bits, cfg: ModemConfig) -> np.ndarray:
    """Unit-bit bipolar preamble waveform used by the correlator."""
    return np.repeat(bipolar(preamble_bits), cfg.samples_per_bit)


def frame_sync(wave: WaveformBuffer, preamble_bits, cfg: ModemConfig,
               threshold: float | None = None) -> list[int]:
    """Start offsets of detected frames, by normalized preamble correlation.

    Local maxima of the normalized correlation at or above the threshold
    are reported; detections closer than one frame length are suppressed,
    keeping the stronger peak.
    """
    threshold = cfg.sync_threshold if threshold is None else float(threshold)
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    corr = sync_correlation(wave.samples, preamble_bits, cfg)
    if corr.size == 0:
        return []
    peaks = _local_maxima_above(corr, threshold)
    return _suppress_near_duplicates(peaks, corr, cfg.frame_samples)


def sync_correlation(samples: np.ndarray, preamble_bits, cfg: ModemConfig) -> np.ndarray:
    """Normalized correlation against the preamble at every start offset."""
    samples = np.asarray(samples, dtype=np.float64)
    tmpl = preamble_template(preamble_bits, cfg)
    n = len(tmpl)
    if len(samples) < n:
        return np.zeros(0)
    num = fftconvolve(samples, tmpl[::-1], mode="valid")
    energy = np.convolve(samples * samples, np.ones(n), mode="valid")
    denom = np.sqrt(np.maximum(energy, 1e-30)) * np.sqrt(n)
    return num / denom


def _local_maxima_above(corr: np.ndarray, threshold: float) -> np.ndarray:
    above = corr >= threshold
    left = np.empty_like(above)
    right = np.empty_like(above)
    left[0] = True
    left[1:] = corr[1:] >= corr[:-1]
    right[-1] = True
    right[:-1] = corr[:-1] > corr[1:]
    return np.nonzero(above & left & right)[0]


def _suppress_near_duplicates(peaks: np.ndarray, corr: np.ndarray,
                              min_spacing: int) -> list[int]:
    order = peaks[np.argsort(corr[peaks])[::-1]]
    kept: list[int] = []
    for p in order:
        if all(abs(p - q) >= min_spacing for q in kept):
            kept.append(int(p))
    return sorted(kept)


def estimate_levels(bit_values, preamble_bits, sigma_floor: float = DEFAULT_SIGMA_FLOOR
                    ) -> LevelEstimate:
    """Two-level estimate from the known preamble portion of a frame."""
    values = np.asarray(bit_values, dtype=np.float64)
    pre = np.asarray(preamble_bits, dtype=np.uint8)
    if len(values) < len(pre):
        raise ValueError("need at least one bit value per preamble bit")
    ones = pre == 1
    if ones.all() or not ones.any():
        raise ValueError("degenerate preamble: cannot estimate two levels")
    head = values[:len(pre)]
    mu1 = head[ones].mean()
    mu0 = head[~ones].mean()
    resid = head - np.where(ones, mu1, mu0)
    sigma = max(float(resid.std()), float(sigma_floor))
    return LevelEstimate(mu1=float(mu1), mu0=float(mu0), sigma=sigma)


def compute_llrs(bit_values, est: LevelEstimate, clip: float = DEFAULT_LLR_CLIP
                 ) -> np.ndarray:
    """Two-level Gaussian LLRs; positive favors the zero bit."""
    return compute_llrs_batch(np.atleast_2d(np.asarray(bit_values, dtype=np.float64)),
                              est.mu1, est.mu0, est.sigma, clip)[0]


def compute_llrs_batch(bit_values: np.ndarray, mu1, mu0, sigma,
                       clip: float = DEFAULT_LLR_CLIP) -> np.ndarray:
    """Row-wise LLRs with per-row level estimates (scalars broadcast)."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if (sigma <= 0).any():
        raise ValueError("sigma must be positive")
    mu1 = np.asarray(mu1, dtype=np.float64)
    mu0 = np.asarray(mu0, dtype=np.float64)
    mid = 0.5 * (mu1 + mu0)
    llr = 2.0 * (mu1 - mu0) * (mid - bit_values.T) / sigma**2
    return np.clip(llr.T, -clip, clip)


def write_waveform(path, wave: WaveformBuffer) -> None:
    """Dump samples as little-endian float32 plus a text sidecar."""
    path = Path(path)
    wave.samples.astype("<f4").tofile(path)
    sidecar = path.with_suffix(path.suffix + ".txt")
    sidecar.write_text(
        f"sample_rate_hz {wave.sample_rate!r}\n"
        f"start_time_s {wave.start_time!r}\n"
        f"n_samples {len(wave.samples)}\n"
    )


def read_waveform(path) -> WaveformBuffer:
    path = Path(path)
    samples = np.fromfile(path, dtype="<f4").astype(np.float64)
    meta = {}
    sidecar = path.with_suffix(path.suffix + ".txt")
    for line in sidecar.read_text().splitlines():
        key, value = line.split()
        meta[key] = float(value)
    return WaveformBuffer(samples=samples, sample_rate=meta["sample_rate_hz"],
                          start_time=meta["start_time_s"])
