"""Numerical tolerances shared across the package.

Every threshold used by a validation or a solver decision lives here so that
tests and library code agree on a single set of values.
"""

# Hermiticity of an input matrix: max|M - M^H| <= HERMITIAN_REL * (1 + max|M|).
HERMITIAN_REL = 1e-12

# Correlation-matrix validation.
STATE_HERMITIAN = 1e-10
STATE_SPECTRUM_SLACK = 1e-9

# Eigendecomposition / propagator quality.
EIG_RESIDUAL = 1e-10
UNITARITY = 1e-10

# Relative gap below which two neighbouring eigenvalues count as degenerate.
DEGENERACY_REL = 1e-9

# Zero-energy modes make the half-filled ground state ambiguous.
ZERO_ENERGY = 1e-9

# Scalar denominators below this magnitude are treated as singular.
SINGULAR_DENOMINATOR = 1e-14

# Perturbative weights mu_l below this are treated as vanishing.
VANISHING_MU = 1e-14

# Smallest/largest singular value ratio at which (1 - Lambda) counts as singular.
STEADY_SINGULAR_REL = 1e-10

# Residual accepted for a direct steady-state solve.
STEADY_RESIDUAL = 1e-10

# Cokernel component of g beyond which the steady-state equation has no solution.
STEADY_COKERNEL = 1e-8

# Lindblad: every mode must be reached by the dissipator at least this strongly.
LINDBLAD_REACH = 1e-12

# Fock-space trace drift that signals an operator-construction bug.
FOCK_TRACE_DRIFT = 1e-9

# Largest system the dense steady-state solve accepts without an explicit override.
DENSE_SOLVE_MAX_N = 64

# Largest Fock-space oracle size.
FOCK_MAX_N = 10
