"""Numerical constants and defaults."""

# Quadrature
QUAD_REL_TOL: float = 1e-10
QUAD_MAX_LEVELS: int = 50
QUAD_MAX_PANELS: int = 4096
LEMMA_CONSTANT_REL_TOL: float = 1e-8
PHI_REL_TOL: float = 1e-12

# Time map
PHI_INVERSE_TOL: float = 1e-10
PHI_INVERSE_MAX_ITER: int = 400

# Lemma check
LEMMA_SLACK: float = 1e-6
LEMMA_TAU_MIN: float = 1e-2
LEMMA_TAU_MAX: float = 1e3
LEMMA_TAU_POINTS: int = 40
LEMMA_DEFAULT_PAIRS: list[tuple[float, float]] = [
    (1.5, 1.0),
    (2.0, 1.0),
    (2.0, 2.0),
    (5.0, 1.0),
]

# Operators
MONOTONE_REL_TOL: float = 1e-10

# Solver
STEP_CONSTANT: float = 0.1  # dt = c_dt / psi(t)^n
DT_MAX_FACTOR: float = 1e-3  # dt_max = 1e-3 * max(1, T)
CONTRACTION_TOL: float = 1e-12
MAX_STEP_HALVINGS: int = 30
BANDED_MAX_FILL: float = 0.25  # use banded solve when (l + u + 1) <= fill * m
RANDOM_HOLD: float = 1e-2  # BoundedRandom cell width

# Picard oracle
PICARD_MAX_DIM: int = 64
PICARD_TOL: float = 1e-8
PICARD_MAX_ITER: int = 200
PICARD_GRID_POINTS: int = 2000
PICARD_CONTRACTION_TARGET: float = 0.5

# Certificates
BOUND_TOL: float = 1e-2
SUPREMUM_SAFETY: float = 1.05
SUPREMUM_TAU_MAX: float = 1e3
SUPREMUM_POINTS_PER_DECADE: int = 25
SUPREMUM_STABLE_REL: float = 1e-2
NORM_FLOOR: float = 1e-14
MIN_FIT_SAMPLES: int = 10
FIT_WINDOW_START: float = 0.1

# Heat equation with memory
DEFAULT_BETA: float = 1.0
DEFAULT_ETA_MEM: float = 1.0
DEFAULT_EPSILON: float = 1.0
DEFAULT_GAIN: float = 2.0
DEFAULT_HORIZON: float = 3.0
DEFAULT_GRID_POINTS: int = 63
REFORMULATION_TOL: float = 1e-2
REFORMULATION_DT_MAX: float = 1e-3
MIN_SNAPSHOT_DENSITY: float = 50.0  # snapshots per unit time
LOG_FLOOR: float = -14.0
SWEEP_COMPARISON_START: float = 0.5
SWEEP_COMPARISON_POINTS: int = 26
SWEEP_ORDER_TOL: float = 1e-9
FIGURE_MAX_SLICES: int = 200
