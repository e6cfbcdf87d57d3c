"""Simulator for a real-time multi-channel water-to-air optical wireless link.

The package covers the complete baseband chain (framing with CRC-24,
5G-NR LDPC BG2 coding, OOK modulation, correlation synchronization, LLR
soft demodulation, normalized min-sum decoding), a parameterized dynamic
water-surface channel, the shared-decoder time-multiplexing scheme, and a
Monte-Carlo harness for frame-error-rate experiments.
"""

__version__ = "0.1.0"

from . import channel, config, framing, harness, ldpc5g, modem, scheduler

__all__ = ["channel", "config", "framing", "harness", "ldpc5g", "modem",
           "scheduler", "__version__"]
