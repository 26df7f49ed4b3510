"""Secrecy functions of l-modular lattices: theta kernels, exact theta series,
2-modular f2-polynomial certificates and rational quadratic-form equivalence."""

__version__ = "0.1.0"

from .theta import (  # noqa: E402
    CertifiedValue,
    EvalPoint,
    ModularQuantities,
    ToleranceError,
    elliptic_K,
    elliptic_K_prime,
    modular_quantities,
    nome_ratio,
    theta,
    theta_eval,
    theta_excess,
)
from .series import QSeries, RationalPoly, SturmCertificate, sturm_root_count, theta_qseries  # noqa: E402
from .lattice import (  # noqa: E402
    LatticeError,
    LatticeSpec,
    SpecSyntaxError,
    ThetaCoeffs,
    modularity_residual,
    parse_matrix,
    parse_spec,
    theta_coeffs,
    theta_eval_numeric,
    theta_value,
)
from .secrecy import ExtremumReport, SecrecyCurve, scan_extremum, symmetry_residual, xi_classic, xi_modular  # noqa: E402
from .mod2 import (  # noqa: E402
    BETA,
    BETA_UP,
    TABLE,
    TwoModularPoly,
    conjecture_verdict,
    fit_f2_polynomial,
    negativity_certificate,
    synthesize,
)
from .qforms import (  # noqa: E402
    CongruenceResult,
    QFormInvariants,
    diagonalize,
    hasse_witt,
    hilbert,
    invariants,
    rationally_equivalent,
)
