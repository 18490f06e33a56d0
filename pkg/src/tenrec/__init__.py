"""Tensor recovery with a capped logarithmic singular-value penalty.

Dense tube-product algebra, the penalty family with its closed-form
weight minimiser and proximal shrinkage, two alternating solvers
(completion and robust PCA), synthetic-instance generators, quality
metrics, and a flat binary tensor file format.
"""

__version__ = "0.1.0"

from .algebra import (
    TubalFactorization,
    conj_transpose,
    dft_mode3,
    fold_mode_pair,
    fourier_singular_values,
    identity_tensor,
    idft_mode3,
    mode_pairs,
    multi_rank,
    n_tubal_rank,
    t_product,
    t_svd,
    tnn,
    tubal_rank,
    unfold_mode_pair,
)
from .completion import complete
from .config import SolverConfig, build_config, load_config_file
from .metrics import ergas, evaluate_all, psnr, ssim
from .penalty import (
    WeightState,
    lgamma_norm,
    log_weighted_norm,
    mlcp,
    mlcp_tensor,
    mlcp_weight_minimizer,
    prox_lgamma_norm,
    shrink_singular_values,
    update_lambda_bar,
    update_weights,
    weighted_log_prox,
)
from .report import RecoveryReport
from .rpca import decompose, soft_threshold
from .simulate import NoiseSpec, SamplingMask, add_mixed_noise, gen_lowrank, gen_mask, make_rng
from .tensorfile import TensorFormatError, load_tensor, save_tensor

__all__ = [
    "NoiseSpec",
    "RecoveryReport",
    "SamplingMask",
    "SolverConfig",
    "TensorFormatError",
    "TubalFactorization",
    "WeightState",
    "add_mixed_noise",
    "build_config",
    "complete",
    "conj_transpose",
    "decompose",
    "dft_mode3",
    "ergas",
    "evaluate_all",
    "fold_mode_pair",
    "fourier_singular_values",
    "gen_lowrank",
    "gen_mask",
    "identity_tensor",
    "idft_mode3",
    "lgamma_norm",
    "load_config_file",
    "load_tensor",
    "log_weighted_norm",
    "make_rng",
    "mlcp",
    "mlcp_tensor",
    "mlcp_weight_minimizer",
    "mode_pairs",
    "multi_rank",
    "n_tubal_rank",
    "prox_lgamma_norm",
    "psnr",
    "save_tensor",
    "shrink_singular_values",
    "soft_threshold",
    "ssim",
    "t_product",
    "t_svd",
    "tnn",
    "tubal_rank",
    "unfold_mode_pair",
    "update_lambda_bar",
    "update_weights",
    "weighted_log_prox",
]
