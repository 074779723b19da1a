"""
    Constants and options shared across the NonMarkov package.

    Tolerances are absolute unless stated otherwise.
"""

from enum import IntEnum


# polynomial / Laplace layer
ROOT_CLUSTER_FACTOR = 100.0      # an m-fold root may spread by this times eps^(1/m), relative
MULTIPLE_ROOT_TOL = 1e-10        # relative |p| at a merged root, else the group stays split
ROOT_RESIDUAL_TOL = 1e-9         # max |p(root)| for a monic p
RATIONAL_GCD_TOL = 1e-9          # shared numerator/denominator roots are cancelled below this
IMAG_RESIDUE_TOL = 1e-10         # relative imaginary residue allowed when evaluating exp-polynomials
REAL_POLE_TOL = 1e-12            # |Im p| below this (relative) snaps a pole onto the real axis
MP_DPS = 50                      # working precision for root polishing and residues
NEWTON_MAX_STEPS = 60

TALBOT_DEGREE = 64

# waiting time specs
WEIGHT_SUM_TOL = 1e-12
NORMALIZATION_TOL = 1e-10

# two-site semi-Markov layer
Q0_TOL = 1e-9
Q_BOUND_TOL = 1e-9
GAMMA_POLE_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-10
SAMPLES_PER_PERIOD = 20
MIN_SCAN_POINTS = 2000
BRENTQ_XTOL = 1e-14
NOISE_FLOOR = 1e-12              # increase intervals contributing less than this are dropped

# stochastic maps
STOCHASTIC_TOL = 1e-9
GENERATOR_COLUMN_TOL = 1e-6
CONSERVATION_TOL = 1e-9
MAX_CONDITION_NUMBER = 1e12
DIFF_STEP_FACTOR = 1e-5          # h = DIFF_STEP_FACTOR * slowest time constant
ODE_RTOL = 1e-10
ODE_ATOL = 1e-13
RENORMALIZATION_DRIFT = 1e-8

# counterexample
QUAD_TOL = 1e-10
ANALYTIC_QUAD_AGREEMENT = 1e-9
POINTS_PER_PERIOD = 10000
DEFAULT_GAMMA1 = "const:1"
DEFAULT_GAMMA2 = "cos:1,0.9"

# monte carlo
MC_BLOCK_SIZE = 1 << 14
MC_ACCEPTANCE = 4.0

# output
FLOAT_FORMAT = "%.17g"
JSON_SCHEMA_VERSION = 1
THREADS_ENV_VAR = "NMK_THREADS"


class Command(IntEnum):
    ANALYZE = 0,
    ERLANG_SWEEP = 1,
    MIXTURE_SWEEP = 2,
    COUNTEREXAMPLE = 3,
    MC_CHECK = 4


COMMAND_NAMES = {"analyze": Command.ANALYZE,
                 "erlang-sweep": Command.ERLANG_SWEEP,
                 "mixture-sweep": Command.MIXTURE_SWEEP,
                 "counterexample": Command.COUNTEREXAMPLE,
                 "mc-check": Command.MC_CHECK}


class RateForm(IntEnum):
    CONSTANT = 0,
    COSINE = 1,
    SINE = 2,
    TABULATED = 3


RATE_FORM_NAMES = {"const": RateForm.CONSTANT,
                   "cos": RateForm.COSINE,
                   "sin": RateForm.SINE,
                   "table": RateForm.TABULATED}

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
