"""splitlab: high-precision splitting-of-separatrices laboratory.

Computes the Melnikov function of a fast-forced meromorphic pendulum in
every parameter regime (periodic and quasiperiodic forcing), the complex
singularities and residue constants that control it, and cross-validates
the asymptotic formulas against a direct multiprecision integration of the
perturbed invariant manifolds.
"""

from .mpnum import (
    PrecisionScalar,
    PrecisionComplex,
    QuadratureResult,
    arcsinh_branch,
    quad_finite,
    quad_semi_infinite,
    residue_double_pole,
    find_root,
)
from .model import (
    ModelSpec,
    ForcingSpec,
    FourierSpectrum,
    SeparatrixPoint,
    separatrix,
    beta,
    T0_generating,
    dT0_generating,
    check_T0_identity,
    psi_potential,
    example_forcing_spectrum,
)
from .singular import SingularityData, solve_singularities, strip_width, delta_constants
from .melnikov_p import (
    MelnikovResult,
    Regime,
    classify_regime,
    melnikov_residue,
    melnikov_quadrature,
    melnikov_asymptotic,
    half_melnikov,
    melnikov_potential,
)
from .melnikov_qp import (
    HarmonicAmplitude,
    EnvelopeData,
    golden_convergents,
    c_of_delta,
    harmonic_amplitude,
    leading_harmonic,
    envelope_bounds,
    melnikov_qp_eval,
    qp_narrow_bounds,
)
from .oracle import (
    ManifoldSeed,
    SectionCrossing,
    SplittingProfile,
    monodromy_floquet,
    shoot_to_section,
    splitting_profile_periodic,
    splitting_profile_qp,
    hj_residual,
)
from .lab import SweepConfig, RegressionReport, assemble_d0, run_sweep, fit_rate_prefactor, validate_suite

__version__ = "0.1.0"
