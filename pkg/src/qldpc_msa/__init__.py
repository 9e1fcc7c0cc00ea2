"""Batch scaled min-sum syndrome decoding for CSS quantum LDPC codes."""

from .codes import (
    BUILTIN_CODES,
    BbCodeSpec,
    CodeParams,
    CssCode,
    TannerGraph,
    build_bb_code,
    build_tanner_graph,
    builtin_code,
    load_alist,
    load_css_json,
    save_alist,
    save_css_json,
    toy_code,
)
from .decoder import (
    DecodeOutcome,
    Decoder,
    DecoderConfig,
    decode,
    decode_batch,
    decode_css,
)
from .gf2 import Gf2Vector, SparseGf2Matrix, in_row_space, mat_vec_mul, rank

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_CODES", "BbCodeSpec", "CodeParams", "CssCode", "TannerGraph", "build_bb_code",
    "build_tanner_graph", "builtin_code", "load_alist", "load_css_json", "save_alist",
    "save_css_json", "toy_code", "DecodeOutcome", "Decoder", "DecoderConfig", "decode",
    "decode_batch", "decode_css", "Gf2Vector", "SparseGf2Matrix", "in_row_space",
    "mat_vec_mul", "rank",
]
