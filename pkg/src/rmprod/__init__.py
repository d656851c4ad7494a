"""Product codes with Hadamard-kernel component codes.

Construction, successive cancellation (list) decoding, iterative
turbo-style decoding, exact distance analysis, union bounds, and a
deterministic Monte-Carlo simulation engine, with a CLI front end.
"""

from .analysis import (
    BoundCurve,
    ensemble_avg_min_weight,
    min_weight_iowe,
    min_weight_iowe_product,
    tub,
    tub_curve,
)
from .bp import (
    BatchBpResult,
    Trellis,
    bcjr_extrinsic,
    bp_decode,
    bp_decode_batch,
    bp_decode_concat_batch,
    build_trellis,
)
from .codes import (
    ComponentCode,
    WeightEnumerator,
    crc_code,
    hadamard_matrix,
    kernel_transform,
    macwilliams_transform,
    rm_code,
    rm_frozen_vector,
    weight_enumerator_bruteforce,
)
from .concat import (
    CRC_POLYS,
    ConcatenatedCode,
    Interleaver,
    build_concat,
    crc_concat,
)
from .product import (
    ProductCode,
    build_product,
    parse_component,
    parse_product,
)
from .scl import (
    LLR_CLAMP,
    BatchDecodeResult,
    CrcChecker,
    DecodeOutcome,
    forced_path_metric,
    genie_ml_lower_bound,
    llr_check,
    llr_combine,
    outer_checker_from_crc,
    sc_decode,
    scl_decode,
    scl_decode_batch,
)
from .sim import (
    CSV_HEADER,
    DecoderSpec,
    SimConfig,
    SimRecord,
    biawgn_llrs,
    iter_experiment,
    noise_sigma,
    parse_decoder,
    run_experiment,
    wilson_interval,
    write_csv,
)

__all__ = [
    "BatchBpResult",
    "BatchDecodeResult",
    "BoundCurve",
    "CRC_POLYS",
    "CSV_HEADER",
    "ComponentCode",
    "ConcatenatedCode",
    "CrcChecker",
    "DecodeOutcome",
    "DecoderSpec",
    "Interleaver",
    "LLR_CLAMP",
    "ProductCode",
    "SimConfig",
    "SimRecord",
    "Trellis",
    "WeightEnumerator",
    "bcjr_extrinsic",
    "biawgn_llrs",
    "bp_decode",
    "bp_decode_batch",
    "bp_decode_concat_batch",
    "build_concat",
    "build_product",
    "build_trellis",
    "crc_code",
    "crc_concat",
    "ensemble_avg_min_weight",
    "forced_path_metric",
    "genie_ml_lower_bound",
    "hadamard_matrix",
    "iter_experiment",
    "kernel_transform",
    "llr_check",
    "llr_combine",
    "macwilliams_transform",
    "min_weight_iowe",
    "min_weight_iowe_product",
    "noise_sigma",
    "outer_checker_from_crc",
    "parse_component",
    "parse_decoder",
    "parse_product",
    "rm_code",
    "rm_frozen_vector",
    "run_experiment",
    "sc_decode",
    "scl_decode",
    "scl_decode_batch",
    "tub",
    "tub_curve",
    "weight_enumerator_bruteforce",
    "wilson_interval",
    "write_csv",
]

__version__ = "0.1.0"
