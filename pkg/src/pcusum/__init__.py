"""Quickest change detection for periodic (i.p.i.d.) data streams.

Core pieces: periodic laws and likelihood ratios (`model`), the
reflected CUSUM detector (`detect`), candidate banks with max and SR
stopping rules (`multi`), parallel-stream banks (`distributed`),
step-parameter fitting (`learn`), and Monte Carlo performance
estimation (`sim`).  CSV/figure writers live in `report`, the command
line in `cli`.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    ChangeConfig,
    FamilyMismatchError,
    Gaussian,
    IpidLaw,
    PeriodMismatchError,
    PhaseDensity,
    Poisson,
    SupportError,
    avg_kl,
    kl_divergence,
    law_from_dict,
    law_to_dict,
    llr,
    llr_values,
    load_law,
    phase_of,
    sample_law,
    save_law,
)
from .detect import (
    CusumState,
    DetectionRun,
    TrajectoryPoint,
    brute_force_statistic,
    brute_force_trajectory,
    cusum_init,
    cusum_step,
    cusum_trajectory,
    first_crossing,
    observe,
    run_detector,
    threshold_for_mtfa,
)
from .multi import (
    MartingaleReport,
    MultiRun,
    MultiState,
    log_sr,
    martingale_check,
    multi_init,
    multi_step,
    run_multi,
    stop_cm,
    stop_sr,
)
from .distributed import (
    BankRun,
    StreamBank,
    bank_init,
    dist_step,
    log_sr_total,
    run_bank,
    stop_dm,
    stop_srd,
)
from .learn import (
    BatchSpec,
    StepParams,
    expand_to_law,
    fit_step_params,
    scale_post,
)
from .sim import (
    MtfaEstimate,
    PerfPoint,
    WaddEstimate,
    estimate_mtfa,
    estimate_wadd,
    generate,
    tradeoff_curve,
)

__all__ = [
    "__version__",
    "ChangeConfig",
    "FamilyMismatchError",
    "Gaussian",
    "IpidLaw",
    "PeriodMismatchError",
    "PhaseDensity",
    "Poisson",
    "SupportError",
    "avg_kl",
    "kl_divergence",
    "law_from_dict",
    "law_to_dict",
    "llr",
    "llr_values",
    "load_law",
    "phase_of",
    "sample_law",
    "save_law",
    "CusumState",
    "DetectionRun",
    "TrajectoryPoint",
    "brute_force_statistic",
    "brute_force_trajectory",
    "cusum_init",
    "cusum_step",
    "cusum_trajectory",
    "first_crossing",
    "observe",
    "run_detector",
    "threshold_for_mtfa",
    "MartingaleReport",
    "MultiRun",
    "MultiState",
    "log_sr",
    "martingale_check",
    "multi_init",
    "multi_step",
    "run_multi",
    "stop_cm",
    "stop_sr",
    "BankRun",
    "StreamBank",
    "bank_init",
    "dist_step",
    "log_sr_total",
    "run_bank",
    "stop_dm",
    "stop_srd",
    "BatchSpec",
    "StepParams",
    "expand_to_law",
    "fit_step_params",
    "scale_post",
    "MtfaEstimate",
    "PerfPoint",
    "WaddEstimate",
    "estimate_mtfa",
    "estimate_wadd",
    "generate",
    "tradeoff_curve",
]
