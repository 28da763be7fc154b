# Input handling
CLAMP_EPS = 1e-10  # u values are clamped to [CLAMP_EPS, 1 - CLAMP_EPS]
DEFAULT_INGEST_MODE = "already_uniform"

# Family domains
RHO_MAX = 0.9995
NU_MIN = 2.001
NU_MAX = 100.0  # cap for Student-t degrees of freedom
NU_START = 8.0
FRANK_MIN_ABS = 1e-6  # |theta| below this is treated as independence
FRANK_MAX_ABS = 35.0
GUMBEL_MAX = 50.0
JOE_MAX = 30.0
ARCHIMEDEAN_MIN_OFFSET = 1e-6  # Gumbel/Joe optimizer keeps theta >= 1 + offset
NU_STENCIL_REL_STEP = 2e-3  # relative step of the five-point nu stencil

# Root finding (h-inverse, tau inversion)
ROOT_MAXITER = 200
ROOT_XTOL = 1e-14

# Optimizer
DEFAULT_MAXITER = 1000
DEFAULT_GTOL = 1e-6
BOUNDARY_WARN_DIST = 1e-4
DEFAULT_START = "sequential"  # or "spec"

# Finite-difference checks
FD_STEP = 1e-6
FD_GRADIENT_TOL = 1e-5
FD_HESSIAN_TOL = 1e-4
FD_CHECK_ROWS = 200  # rows sampled from the data for cmd_check
ASYMMETRY_TOL = 1e-6

# Expected information
DEFAULT_INTEGRATION_TOL = 1e-4
MAX_QUADRATURE_DIM = 4
NORMAL_SCORE_BOUND = 8.0  # integration box in normal scores is [-8, 8]^d
MAX_SUBDIVISIONS = 20000
DEFAULT_MC_SIZE = 200000
DEFAULT_SEED = 20130101
MC_CHUNK = 20000  # rows per Monte Carlo batch

# Rolling windows
DEFAULT_WINDOW = 200
DEFAULT_STEP = 5
DEFAULT_BAND_MULTIPLIER = 2.0
DEFAULT_ROLLING_WORKERS = 1

# Simulation
DEFAULT_SIM_SIZE = 1000

# Output
DEFAULT_OUTPUT_DIR = "results"
MACHINE_FLOAT_FORMAT = "%.17g"
HUMAN_DIGITS = 4

# Exit codes (stable)
EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONVERGENCE = 3
EXIT_DOMAIN = 4
EXIT_INTEGRATION = 5

# Family codes used in spec files; "r" suffix marks the reflected second argument
FAMILY_CODES = {
    0: "Independence",
    1: "Gaussian",
    2: "StudentT",
    3: "Frank",
    4: "Gumbel",
    5: "Joe",
}
