"""5G-NR LDPC base graph 2: lifting, encoding, rate matching, min-sum decoding."""

from .basegraph import (
    BaseGraphBG2,
    LiftedCode,
    build_lifted_code,
    expand_parity_matrix,
    load_bg2_shifts,
    syndrome_check,
)
from .decoder import MinSumDecoder, decode_min_sum, default_decoder
from .encoder import Encoder, default_encoder, encode, encode_full

__all__ = [
    "BaseGraphBG2",
    "LiftedCode",
    "build_lifted_code",
    "expand_parity_matrix",
    "load_bg2_shifts",
    "syndrome_check",
    "MinSumDecoder",
    "decode_min_sum",
    "default_decoder",
    "Encoder",
    "default_encoder",
    "encode",
    "encode_full",
]
