# config/settings.py

# Generator space h = C^{2M}, labels e1..eM and eb1..ebM
DEFAULT_M = 2

# Suite bounds
DEFAULT_MAX_WEIGHT = "4"
DEFAULT_WINDOW = ("-8", "8")
DEFAULT_SEED = 20240607
DEFAULT_JOBS = 1
DEFAULT_MAX_ZERO_MODES = 1  # zero modes have weight 0, so W bases need a cap
DEFAULT_SHUFFLE_TABLES = 20  # random Phi/Psi tables per (r, mu, nu)

# Memo of total contraction numbers, LRU-evicted past this many entries
CONTRACTION_CACHE_SIZE = 200_000

# Numerical verification
CLOSED_FORM_TOL = 1e-8
AGREEMENT_TOL = 1e-7
DEFAULT_CUTOFF = 80
MAX_CUTOFF = 640

# Correlator reconstruction: trailing coefficients that must vanish (heuristic acceptance)
CERTIFY_MARGIN = 4
RECONSTRUCT_MAX_TERMS = 256

# Environment variable prefix for config overrides
ENV_PREFIX = "TWF_"

LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s"
LOG_FILE = "twf.log"

# Optional YAML defaults
CONFIG_DIR = "config"
CONFIG_FILE_NAME = "twf.yaml"

# Suite shapes
MODULE_MAX_WEIGHT = "2"  # weight cap for W test vectors
AXIOM_MAX_WEIGHT = "5/2"  # weight cap for V in the axiom suite
WICK_MAX_LETTERS = 4  # r + s for the closed-form oracles
WICK_MAX_MODE = 1
WICK_DISTINCT_MAX_LETTERS = 4  # r + s for the distinct-variable form
EXP_DELTA_MAX_MODE = 2
SHUFFLE_MAX_R = 5
PARITY_MAX_R = 7
ZERO_WORD_MAX_LEN = 6
CRT_BOUND = 6
CMN_G_BOUND = 4
ANTISYMMETRY_BOUND = 12
KERNEL_DERIVATIVE_BOUND = 2
