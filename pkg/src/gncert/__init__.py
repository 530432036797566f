"""Pure Gauss-Newton with certified local convergence radii.

The majorant function ``f`` bounds how fast the Jacobian varies around a
stationary point ``x*``; from ``f`` and the constants ``c = ||F(x*)||`` and
``beta = ||F'(x*)^+||`` follow the radius of guaranteed convergence, the error
recursion along the iterates, and a uniqueness radius. This package computes
those quantities and checks each of them numerically.
"""
from .certify import (
    Certificate,
    build_certificate,
    cycle_demo,
    empirical_radius,
    fit_convergence_order,
    uniqueness_probe,
    verify_majorant_condition,
    verify_q2,
    worst_case_problem,
)
from .errors import (
    DomainError,
    GNCertError,
    H3Violated,
    H4Violated,
    InsufficientData,
    InvalidMajorant,
    PreconditionViolated,
    RankDeficient,
)
from .majorant import (
    MajorantFunction,
    ProblemConstants,
    RadiusSet,
    compute_radii,
    lipschitz_majorant,
    smale_majorant,
)
from .problems import REGISTRY, build
from .solver import IterateTrace, ResidualProblem, Status, gn_step, solve

__version__ = "0.1.0"
