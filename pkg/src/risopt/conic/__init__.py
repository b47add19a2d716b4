from .cones import (
    EXP,
    NONNEG,
    PSD,
    SOC,
    ZERO,
    hermitian_embed,
    project_exp,
    project_psd,
    project_soc,
    smat,
    svec,
    svec_dim,
    unembed_hermitian,
)
from .solver import (
    INFEASIBLE,
    MAX_ITER,
    OPTIMAL,
    UNBOUNDED,
    ConeBlock,
    ConicProblem,
    ConicSolution,
    solve,
)

__all__ = [
    "ZERO", "NONNEG", "SOC", "EXP", "PSD",
    "svec", "smat", "svec_dim", "hermitian_embed", "unembed_hermitian",
    "project_soc", "project_exp", "project_psd",
    "ConeBlock", "ConicProblem", "ConicSolution", "solve",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "MAX_ITER",
]
