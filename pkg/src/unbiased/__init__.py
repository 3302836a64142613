"""Solver and certifier for algebraically unbiased systems of projectors.

The package finds critical points of the unbiasedness potential on a
gauge-fixed matrix torus, certifies that each one yields a valid unbiased
pair of projector systems, validates the associated symplectic structures
numerically, and certifies the lattice-polytope facts about the Birkhoff
polytope in exact arithmetic.
"""

from .errors import NoConvergence, SingularMatrix, SizeGuard, UnbiasedError, ZeroEntry
from .linalg import (
    ComplexSquareMatrix,
    SpectrumReport,
    det,
    fourier_matrix,
    invert,
    random_torus_matrix,
    singular_spectrum,
)
from .potential import (
    GaugeSlicePoint,
    GradientMatrix,
    WeightMatrix,
    critical_residual,
    grad_F,
    hessian_slice,
    log_potential,
    potential_power,
    uniform_weights,
    validate_weights,
)
from .report import CheckReport, Violation
from .solver import (
    CriticalPointRecord,
    FamilyProbeReport,
    SolveConfig,
    canonicalize,
    family_probe,
    multistart,
    newton_solve,
    regauge,
)

__version__ = "0.1.0"
