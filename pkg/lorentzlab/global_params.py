# Absolute tolerance used by validate() and most pass/fail checks.
# Set to 0 for exact mode on synthetic integer instances.
TOL = 1e-9

# Relative tolerance for analytic hyperbolic-norm identities
NORM_TOL = 1e-10

# Relative slack when deciding that a generated grid pair is null
GRID_NULL_EPS = 1e-12

# Marginal feasibility of couplings (absolute)
MARGINAL_TOL = 1e-10

# Complementary slackness residual accepted by the network simplex
SLACKNESS_TOL = 1e-9

# Normalization slack of a probability measure
MEASURE_TOL = 1e-12

# Default seed for every randomized check
SEED = 20240601

# Dyadic refinement depth for partition infima
PARTITION_DEPTH = 12

# Step counts used by causal_speed when none are given
SPEED_LEVELS = (16, 64, 256)

# An atom must survive this fraction of its mass from the next coarser level
ATOM_PERSISTENCE = 0.5

# k-nearest causal competitors for slopes on grids
SLOPE_SCHEDULE = (4, 8, 16)

# Greedy redistribution iterations in good_geodesic
REDISTRIBUTION_CAP = 10 ** 4

# Cyclical monotonicity: all cycles up to this many pairs, sampled above
CYCLE_EXHAUSTIVE_LIMIT = 8

# Random cycles drawn when the exhaustive limit is exceeded
CYCLE_SAMPLES = 2000

# Network simplex gives up after this many pivots per arc
PIVOT_FACTOR = 50

# Largest support (per side) handed to the z3 exact oracle
EXACT_ORACLE_LIMIT = 6

# Grid tolerance multiplier: identities on grids use GRID_TOL_FACTOR * h
GRID_TOL_FACTOR = 3.0

# Quadrature margin (cells) between a test function support and the cone
CONE_MARGIN_CELLS = 2

# Timeout for a single CLI run (in secs), 0 disables it
GLOBAL_TIMEOUT = 0

# Worker processes used by batch_run
BATCH_WORKERS = 4

# Print witnesses of failed checks on the console
PRINT_WITNESSES = 1

# Cap on witnesses kept per check (the count is always exact)
MAX_WITNESSES = 1000

# Redirect results to a json summary.
STORE_RESULT = 1

# Density bound slack on grids: bound * (1 + DENSITY_SLACK_CELLS * h / l_min)
DENSITY_SLACK_CELLS = 5

# Relative quadrature tolerance of the weak-form d'Alembert comparison
WEAK_FORM_REL_TOL = 0.02
