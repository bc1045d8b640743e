"""cqeval: full-reference quality evaluation for colour-quantized images.

The package scores reference/distorted image pairs with nine classic
full-reference measures (PSNR, SSIM, MSSIM, VSNR, VIFP, UQI, NQM, WSNR,
SNR), generates colour-quantization test fixtures, ingests subjectively
rated databases, and reproduces correlation, ranking, and statistical
significance analyses against mean opinion scores.
"""

from .dataset import (
    CQ_METHODS,
    CQD_LEVELS,
    CQD_NORMALIZATION,
    MAIN_DATABASES,
    METHOD_DATABASES,
    Database,
    DatasetEntry,
    DistortionTag,
    NormalizationParams,
    fuse,
    load_manifest,
    mos_histogram,
    normalize_mos,
    parse_cqd_filename,
    parse_tid_filename,
    read_mos_manifest,
    render_cqd_filename,
    render_tid_filename,
    select_subset,
    split_by_method,
    write_database_csv,
)
from .distort import DistortionSpec, apply_spec, count_colors, palette_dither, uniform_quantize
from .image import (
    CorruptImageError,
    ImageError,
    ImageReadError,
    LUMA_WEIGHTS,
    RasterImage,
    UnsupportedImageError,
    channel,
    load_image,
    save_png,
    to_luma,
)
from .metrics import (
    METRIC_ORDER,
    HvsParams,
    MetricError,
    MetricScore,
    SsimParams,
    csf_mannos,
    evaluate_all,
    ms_ssim,
    mse,
    mssim,
    nqm,
    psnr,
    snr,
    ssim_components,
    ssim_map,
    uqi,
    vifp,
    vsnr,
    wsnr,
)
from .stats import (
    BoxplotSummary,
    CorrelationPair,
    SignificanceCodeword,
    boxplot_summary,
    correlation_table,
    krocc,
    ks_two_sample,
    mann_whitney_u,
    midranks,
    pearson,
    rank_databases,
    significance_codewords,
    srocc,
    steiger_z,
)

__version__ = "0.1.0"

__all__ = [
    "BoxplotSummary",
    "CQD_LEVELS",
    "CQD_NORMALIZATION",
    "CQ_METHODS",
    "CorrelationPair",
    "CorruptImageError",
    "Database",
    "DatasetEntry",
    "DistortionSpec",
    "DistortionTag",
    "HvsParams",
    "ImageError",
    "ImageReadError",
    "LUMA_WEIGHTS",
    "MAIN_DATABASES",
    "METHOD_DATABASES",
    "METRIC_ORDER",
    "MetricError",
    "MetricScore",
    "NormalizationParams",
    "RasterImage",
    "SignificanceCodeword",
    "SsimParams",
    "UnsupportedImageError",
    "apply_spec",
    "boxplot_summary",
    "channel",
    "correlation_table",
    "count_colors",
    "csf_mannos",
    "evaluate_all",
    "fuse",
    "krocc",
    "ks_two_sample",
    "load_image",
    "load_manifest",
    "mann_whitney_u",
    "midranks",
    "mos_histogram",
    "ms_ssim",
    "mse",
    "mssim",
    "normalize_mos",
    "nqm",
    "palette_dither",
    "parse_cqd_filename",
    "parse_tid_filename",
    "pearson",
    "psnr",
    "rank_databases",
    "read_mos_manifest",
    "render_cqd_filename",
    "render_tid_filename",
    "save_png",
    "select_subset",
    "significance_codewords",
    "snr",
    "split_by_method",
    "srocc",
    "ssim_components",
    "ssim_map",
    "steiger_z",
    "to_luma",
    "uniform_quantize",
    "uqi",
    "vifp",
    "vsnr",
    "write_database_csv",
    "__version__",
]
