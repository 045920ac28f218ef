from cowlab.optim.lp import (
    BACKEND,
    InfeasibleError,
    IterationLimitError,
    LinearProgram,
    LpError,
    LpSolution,
    UnboundedError,
    solve_lp,
)
from cowlab.optim.scalar import NoSignChangeError, find_root, maximize_1d
from cowlab.optim.sdp import (
    SdpConvergenceError,
    SdpError,
    SdpProblem,
    SdpSolution,
    facial_reduction,
    solve_sdp,
)

__all__ = [
    "BACKEND",
    "InfeasibleError",
    "IterationLimitError",
    "LinearProgram",
    "LpError",
    "LpSolution",
    "NoSignChangeError",
    "SdpConvergenceError",
    "SdpError",
    "SdpProblem",
    "SdpSolution",
    "UnboundedError",
    "facial_reduction",
    "find_root",
    "maximize_1d",
    "solve_lp",
    "solve_sdp",
]
