# Configuration for the multiregeneration engine
# Edit the values below to change run-wide defaults; CLI flags override them per run.

# Randomness
DEFAULT_SEED = 20190601  # Seed used when --seed is not given

# Path Tracking
STEP_INITIAL = 0.1             # First step in t
STEP_MIN = 1e-14               # Failure below this step
STEP_MAX = 0.1                 # Steps never grow past this
STEP_GROWTH = 2.0              # Growth factor after a run of successes
STEP_GROWTH_AFTER = 5          # Consecutive successes before growing
NEWTON_ITERATIONS_MAX = 3      # Corrector iterations per step
TOL_TRACK = 1e-7               # Corrector tolerance along the path
TOL_FINAL = 1e-11              # Residual required at t=0
CONDITION_MAX = 1e13           # Condition estimate cap (IllConditioned)
DIVERGENCE_NORM = 1e12         # Chart-norm cap (Diverging)
MAX_STEPS = 20000              # Hard cap on accepted + rejected steps per path

# Endgame
ENDGAME_START = 0.1            # t where the Cauchy endgame takes over
ENDGAME_CYCLE_MAX = 8          # Largest cycle number tried
ENDGAME_SAMPLES_PER_LOOP = 16  # Sample points per loop around t=0
ENDGAME_RADIUS_RATIO = 0.25    # Radius shrink between successive estimates
ENDGAME_RADIUS_LEVELS = 6      # Radii tried before NonConvergent
ENDGAME_FALLBACK_T = 1e-8      # Straight-tracking fallback target
SINGULAR_CONDITION = 1e8       # Endpoints above this condition are singular

# Point Comparison
POINT_TOL = 1e-6               # point_equal tolerance (infinity norm on the chart)
CHART_ZERO_TOL = 1e-10         # |H_i(p)| below this uses largest-modulus normalization
ON_HYPERSURFACE_TOL = 1e-8     # N/U partition: |G(p)| < tol * term scale
RESIDUAL_TOL = 1e-8            # Endpoint must satisfy every equation to tol * term scale
SINGULAR_RESIDUAL_TOL = 1e-6   # Same check for endpoints reported singular
MEMBER_RESIDUAL_TOL = 1e-6     # Membership: points failing this are not on the variety
RANK_RCOND = 1e-8              # sigma_min / sigma_max below this means rank deficient
LOCAL_DIM_STEP = 1e-2          # Offset of the extra hyperplane in the local dimension check
LOCAL_DIM_TOL = 1e-12          # Residual counted as an exact zero by that check
LOCAL_DIM_ITERATIONS = 30      # Gauss-Newton iterations per shifted start

# Decomposition
MONODROMY_LOOPS = 10           # Loops per slice type
TRACE_SAMPLES = (1.0, 0.5, 0.0)
TRACE_TOL_REL = 1e-6           # Second-difference tolerance
PARTITION_CAP = 2 ** 20        # Block-subset candidates before giving up

# Execution
WORKERS = 1                    # Processes for batch tracking (1 = sequential)
SHOW_PROGRESS = False          # tqdm progress bars on stderr
LOG_LEVEL = "WARNING"          # Root log level when the CLI runs

# File Formats
ARCHIVE_VERSION = "mwit 1"     # First line of every .mwit archive
REPORT_VERSION = "report 1"    # Schema tag of JSON reports
DIGITS = 17                    # Significant digits for every printed float

# Exit Codes
EXIT_OK = 0
EXIT_STRUCTURAL = 1
EXIT_PATH_FAILURES = 2
EXIT_NOT_MEMBER = 3
EXIT_INCONCLUSIVE = 4
