"""Phase-type and inhomogeneous phase-type distributions: evaluation, simulation and EM fitting."""

from .data import Sample
from .em import (
    EmOptions,
    FitReport,
    SufficientStats,
    beta_objective,
    default_step_length,
    e_step,
    fit_iph,
    fit_ph,
    m_step,
    tail_index,
)
from .errors import DomainError, NumericError, ParseError, PhaseTypeError, UnsupportedError, ValidationError
from .iph import (
    FAMILIES,
    GEV,
    Gompertz,
    InhomPhaseType,
    Loglogistic,
    Lognormal,
    Pareto,
    Transform,
    Weibull,
    iph_loglik,
    iph_max,
    iph_min,
    make_transform,
)
from .io import load_model, read_dataset, save_model
from .linalg import kron_product, kron_sum, lin_solve, mat_exp, mat_power_real
from .optimize import nelder_mead
from .ph import STRUCTURES, PhaseType, ph_max, ph_min, ph_random, ph_sum
from .sampling import sim_iph, sim_mgev, sim_ph

__version__ = "0.1.0"
