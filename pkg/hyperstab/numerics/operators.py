"""Finite-difference operators, the weighted inner product and the
monotonicity/coercivity checks that gate the decay and ISS bounds."""

from pathlib import Path

import numpy as np
import scipy.linalg

from hyperstab.config.constants import MONOTONE_REL_TOL
from hyperstab.errors import PreconditionError
from hyperstab.models.operator import (
    DiscreteOperator, HeatMemoryGeometry, InnerProduct, MonotoneVerdict,
)
from hyperstab.utils.logger import get_logger

logger = get_logger(__name__)

_MODULE = "operators"


def make_operator(
    matrix: np.ndarray | list,
    label: str = "",
    weights: np.ndarray | list | None = None,
    mesh_weight: float = 1.0,
) -> DiscreteOperator:
    """Wrap a matrix (unweighted product unless weights are given)."""
    matrix = np.array(matrix, dtype=float, ndmin=2)
    if weights is None:
        weights = np.ones(matrix.shape[0])
    return DiscreteOperator(
        matrix=matrix,
        inner_product=InnerProduct(weights=weights, mesh_weight=mesh_weight),
        label=label,
    )


def _laplacian_matrix(n: int) -> np.ndarray:
    h = 1.0 / (n + 1)
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    return (np.diag(main) + np.diag(off, 1) + np.diag(off, -1)) / h**2


def build_dirichlet_laplacian(n: int) -> DiscreteOperator:
    """(1/h^2) tridiag(-1, 2, -1) on the N interior points of (0, 1)."""
    if n < 2:
        raise PreconditionError(
            f"need N >= 2 interior points, got {n}",
            module=_MODULE, operation="build_dirichlet_laplacian",
        )
    h = 1.0 / (n + 1)
    op = make_operator(_laplacian_matrix(n), label="dirichlet_laplacian", mesh_weight=h)
    return op.model_copy(update={"monotone": check_monotone(op).passed})


def memory_inner_product(geom: HeatMemoryGeometry) -> InnerProduct:
    """<z, q> = h * sum_j (eta z1_j q1_j + z2_j q2_j)."""
    n = geom.n_points
    weights = np.concatenate([np.full(n, geom.eta_mem), np.ones(n)])
    return InnerProduct(weights=weights, mesh_weight=geom.h)


def interleaved_ordering(n: int) -> np.ndarray:
    """Permutation (v_1, w_1, v_2, w_2, ...) giving the memory block bandwidth 2."""
    return np.column_stack([np.arange(n), np.arange(n, 2 * n)]).reshape(-1)


def build_memory_operator(geom: HeatMemoryGeometry) -> DiscreteOperator:
    """Az = [-z1'' + z2; beta z2 - eta z1] with z1 = 0 at x = 0, 1."""
    n = geom.n_points
    eye = np.eye(n)
    matrix = np.block([
        [_laplacian_matrix(n), eye],
        [-geom.eta_mem * eye, geom.beta * eye],
    ])
    op = DiscreteOperator(
        matrix=matrix,
        inner_product=memory_inner_product(geom),
        label="memory_operator",
        ordering=interleaved_ordering(n),
    )
    verdict = check_monotone(op)
    if not verdict.passed:
        logger.warning("memory_operator_not_monotone", lambda_min=verdict.lambda_min)
    return op.model_copy(update={"monotone": verdict.passed})


def build_B_epsilon(geom: HeatMemoryGeometry) -> DiscreteOperator:
    """Block diagonal diag(I, eps I)."""
    n = geom.n_points
    diagonal = np.concatenate([np.ones(n), np.full(n, geom.epsilon)])
    return DiscreteOperator(
        matrix=np.diag(diagonal),
        inner_product=memory_inner_product(geom),
        label=f"B_epsilon(eps={geom.epsilon:g})",
        monotone=True,
        ordering=interleaved_ordering(n),
    )


def build_v_block_control(geom: HeatMemoryGeometry) -> DiscreteOperator:
    """diag(I, 0): feedback acting on v only (no control in the w-equation)."""
    n = geom.n_points
    diagonal = np.concatenate([np.ones(n), np.zeros(n)])
    return DiscreteOperator(
        matrix=np.diag(diagonal),
        inner_product=memory_inner_product(geom),
        label="B_v_only",
        monotone=True,
        ordering=interleaved_ordering(n),
    )


def _weighted_matrix(op: DiscreteOperator) -> tuple[np.ndarray, np.ndarray]:
    """W^{1/2} M W^{-1/2} (mesh weight cancels) and sqrt of the weights."""
    root = np.sqrt(op.inner_product.weights)
    return root[:, None] * op.matrix / root[None, :], root


def _symmetric_spectrum_min(op: DiscreteOperator) -> tuple[float, np.ndarray, np.ndarray]:
    scaled, root = _weighted_matrix(op)
    sym = 0.5 * (scaled + scaled.T)
    eigenvalues, eigenvectors = scipy.linalg.eigh(sym)
    return float(eigenvalues[0]), eigenvectors[:, 0], scaled


def check_monotone(op: DiscreteOperator, tol: float | None = None) -> MonotoneVerdict:
    """<op z, z>_w >= -tol ||z||_w^2 for all z, via the weighted symmetric part.

    The default tolerance is 1e-10 times the spectral norm of the weighted matrix.
    On failure the witness is the offending eigenvector mapped back to state
    coordinates and normalized in the weighted norm.
    """
    lambda_min, vector, scaled = _symmetric_spectrum_min(op)
    if tol is None:
        tol = MONOTONE_REL_TOL * max(float(np.linalg.norm(scaled, 2)), 1.0)
    passed = lambda_min >= -tol
    witness = None
    if not passed:
        z = vector / np.sqrt(op.inner_product.weights)
        witness = z / op.inner_product.norm(z)
    return MonotoneVerdict(passed=passed, lambda_min=lambda_min, tol=tol, witness=witness)


def coercivity_constant(op: DiscreteOperator) -> float:
    """Largest c >= 0 with <op z, z>_w >= c ||z||_w^2."""
    lambda_min, _, _ = _symmetric_spectrum_min(op)
    return max(lambda_min, 0.0)


def operator_norm(op: DiscreteOperator) -> float:
    """Operator norm induced by the weighted inner product."""
    scaled, _ = _weighted_matrix(op)
    return float(np.linalg.norm(scaled, 2))


def dump_operator(op: DiscreteOperator, path: str | Path) -> Path:
    """Write a matrix-market-style listing: 'rows cols nnz' then 1-based triples."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = np.nonzero(op.matrix)
    lines = [f"{op.dim} {op.dim} {rows.size}"]
    lines += [f"{i + 1} {j + 1} {op.matrix[i, j]:.17g}" for i, j in zip(rows, cols)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
