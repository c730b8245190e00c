"""Coupled CTRW simulation, Skorohod time changes and limit-law checks."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetError, ConfigError, CTRWError, HorizonError, NumericalError, UnsupportedModelError,
)
from .models import ModelSpec, model_from_any, psi, sample_pair, sample_pairs  # noqa: E402
from .paths import StepPath, remark_paths  # noqa: E402
from .walk import build_row_sum, ctrw_batch, ctrw_state, matching_audit  # noqa: E402
from .limit import JointSampleBatch, batch_sample, joint_sample, levy_skeleton  # noqa: E402
from .laws import (  # noqa: E402
    age_cdf, age_density, age_grid, atom_mass_R0, joint_ar_density, joint_ar_grid,
    laplace_invert,
)
from .stats import convergence_sweep, ks_distance, wasserstein1  # noqa: E402

__all__ = [
    "BudgetError", "ConfigError", "CTRWError", "HorizonError", "NumericalError",
    "UnsupportedModelError", "ModelSpec", "model_from_any", "psi", "sample_pair", "sample_pairs",
    "StepPath", "remark_paths", "build_row_sum", "ctrw_batch", "ctrw_state", "matching_audit",
    "JointSampleBatch", "batch_sample", "joint_sample", "levy_skeleton", "age_cdf",
    "age_density", "age_grid", "atom_mass_R0", "joint_ar_density", "joint_ar_grid",
    "laplace_invert", "convergence_sweep", "ks_distance", "wasserstein1",
]
