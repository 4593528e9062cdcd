"""Sparse regression via perspective and semidefinite relaxations.

The toolkit solves and relaxes the L0-penalized ridge problem

    min_b  0.5*||X b - y||^2 + 0.5*mu*||b||^2 + lambda*||b||_0

four ways: a nonconvex but exact penalty reformulation (MCP), the
perspective convex relaxation for any admissible diagonal split delta,
a semidefinite relaxation whose value equals the best perspective bound
and whose dual exposes that optimal delta, and desk-scale exact solvers
(brute force, branch-and-bound).  Hyperplane rounding turns relaxation
solutions into good feasible supports.
"""

from .core import (
    FitResult,
    GramCache,
    ProblemInstance,
    build_gram,
    load_instance,
    objective_l0,
    save_instance,
)
from .exact import (
    BnbConfig,
    BnbResult,
    TooLargeError,
    big_m,
    branch_and_bound,
    branch_and_bound_auto_m,
    brute_force,
)
from .numerics import NotPDError, NotPSDError, restricted_ls
from .penalties import (
    StepTooLargeError,
    mcp_prox,
    mcp_value,
    mcp_value_mcp_parameterization,
    pwg_penalty,
    reverse_huber,
)
from .perspective import (
    MuZeroError,
    NotAdmissibleError,
    PerspectiveParams,
    PrConfig,
    PrSolution,
    check_admissible,
    delta_pwg,
    delta_uniform,
    solve_pr,
)
from .rounding import CorrelationLift, RoundingResult, build_lift, gw_round
from .sdp import (
    DualCertificate,
    ExactSolution,
    SdpConfig,
    SdpPrimal,
    SdpProblem,
    SolveStats,
    build_sdp,
    extract_delta_star,
    lambda_max,
    rank1_certificate,
    sdp_problem_from_json,
    solve_sdp,
)

__version__ = "0.1.0"

__all__ = [
    "BnbConfig",
    "BnbResult",
    "CorrelationLift",
    "DualCertificate",
    "ExactSolution",
    "FitResult",
    "GramCache",
    "MuZeroError",
    "NotAdmissibleError",
    "NotPDError",
    "NotPSDError",
    "PerspectiveParams",
    "PrConfig",
    "PrSolution",
    "ProblemInstance",
    "RoundingResult",
    "SdpConfig",
    "SdpPrimal",
    "SdpProblem",
    "SolveStats",
    "StepTooLargeError",
    "TooLargeError",
    "big_m",
    "branch_and_bound",
    "branch_and_bound_auto_m",
    "brute_force",
    "build_gram",
    "build_lift",
    "build_sdp",
    "check_admissible",
    "delta_pwg",
    "delta_uniform",
    "extract_delta_star",
    "gw_round",
    "lambda_max",
    "load_instance",
    "mcp_prox",
    "mcp_value",
    "mcp_value_mcp_parameterization",
    "objective_l0",
    "pwg_penalty",
    "rank1_certificate",
    "restricted_ls",
    "reverse_huber",
    "save_instance",
    "sdp_problem_from_json",
    "solve_pr",
    "solve_sdp",
]
