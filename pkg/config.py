"""polytomo configuration — paths, tolerances, defaults."""

from pathlib import Path

# Paths
BASE_DIR = Path(__file__).parent
DATA_DIR = BASE_DIR / "data"
EXPERIMENTS_DIR = DATA_DIR / "experiments"
DEFAULT_OUTPUT_DIR = Path("results")

# Linear algebra
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_CLIP_TOL = 1e-8          # eigenvalues in (-PSD_CLIP_TOL, 0) are clipped to 0
STATE_EIG_TOL = 1e-10        # DensityMatrix eigenvalue floor
ZERO_EIG_RTOL = 1e-13        # relative eigenvalue noise floor in square roots
SVD_ZERO_RTOL = 1e-10        # S_j < SVD_ZERO_RTOL * S_max counts as zero
RANK_EIG_TOL = 1e-12         # eigenvalue threshold for rank inference

# Protocols
UNITY_RTOL = 1e-9
MAX_TENSOR_ENTRIES = 2**30   # cap on m^l * 4^l (measurement matrix entries)

# Reconstruction
MLE_MAX_ITER = 10_000
MLE_STEP = 0.5
MLE_MIN_STEP = 2.0**-30
MLE_RESIDUAL_TOL = 1e-8
MLE_CHANGE_TOL = 1e-10
MLE_ASCENT_SLACK = 1e-12
INTENSITY_FLOOR = 1e-12      # times n/m
START_PERTURBATION = 1e-6

# Fidelity-loss distribution
HESSIAN_STEP = 1e-4          # times ||c||
HESSIAN_CHUNK = 4096         # perturbed purifications evaluated per batch
BOUNDARY_RTOL = 1e-15        # lambda_j <= BOUNDARY_RTOL * max(lambda) is a boundary state
DEFAULT_SAMPLE_SIZE = 1_000_000
SAMPLE_CHUNK = 200_000
GOF_BINS = 10
GOF_THEORY_DRAWS = 200_000

# Adequacy
DEFAULT_ALPHA = 0.05
LOW_EXPECTATION = 5.0
ZERO_EXPECTATION = 1e-9

# Scan
DEFAULT_RESOLUTION_DEG = 1.0
MIN_RESOLUTION_DEG = 0.1
MAX_RESOLUTION_DEG = 10.0
REFINE_TOL_RAD = 1e-6
REFINE_SEEDS = 3             # best grid cells refined per extreme
POLE_MARGIN_RAD = 1e-6
BOUNDARY_OFFSET_RAD = 1e-7
BOUNDARY_OFFSET_STEPS = 5     # offsets 1e-7 .. 1e-3 rad
DEFAULT_RESTARTS = {1: 20, 2: 100, 3: 300}
EARLY_STOP_HITS = 10
EXTREME_MATCH_TOL = 1e-6

# Output
CSV_DIGITS = 17

# Exit codes
EXIT_NUMERIC = 1
EXIT_USAGE = 2
