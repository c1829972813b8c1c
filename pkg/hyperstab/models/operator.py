"""Discrete operator models."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hyperstab.config.constants import (
    DEFAULT_BETA, DEFAULT_EPSILON, DEFAULT_ETA_MEM, DEFAULT_GRID_POINTS,
)


class InnerProduct(BaseModel):
    """Weighted inner product <z, q> = h * sum_j w_j z_j q_j."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray
    mesh_weight: float = Field(default=1.0, gt=0)

    @field_validator("weights", mode="before")
    @classmethod
    def _as_positive_vector(cls, value) -> np.ndarray:
        weights = np.asarray(value, dtype=float).reshape(-1)
        if weights.size == 0 or not np.all(weights > 0) or not np.all(np.isfinite(weights)):
            raise ValueError("inner-product weights must be finite and strictly positive")
        weights.setflags(write=False)
        return weights

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    @property
    def full_weights(self) -> np.ndarray:
        """Diagonal of W = h * diag(weights)."""
        return self.mesh_weight * self.weights

    def inner(self, z: np.ndarray, q: np.ndarray) -> float:
        return float(self.mesh_weight * np.dot(self.weights * z, q))

    def norm_sq(self, z: np.ndarray) -> float:
        return self.inner(z, z)

    def norm(self, z: np.ndarray) -> float:
        return float(np.sqrt(self.norm_sq(z)))

    def norms(self, states: np.ndarray) -> np.ndarray:
        """Row-wise weighted norms of a (samples x dim) array."""
        return np.sqrt(self.mesh_weight * np.einsum("ij,j,ij->i", states, self.weights, states))


class DiscreteOperator(BaseModel):
    """Finite-dimensional stand-in for A or B, measured against an inner product."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    inner_product: InnerProduct
    label: str = ""
    monotone: bool = False
    ordering: np.ndarray | None = None  # bandwidth-reducing permutation

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_square(cls, value) -> np.ndarray:
        matrix = np.array(value, dtype=float, ndmin=2)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {matrix.shape}")
        matrix.setflags(write=False)
        return matrix

    @model_validator(mode="after")
    def _check_dims(self) -> "DiscreteOperator":
        if self.matrix.shape[0] != self.inner_product.dim:
            raise ValueError(
                f"matrix size {self.matrix.shape[0]} does not match "
                f"inner-product dimension {self.inner_product.dim}"
            )
        if self.ordering is not None:
            order = np.asarray(self.ordering)
            if sorted(order.tolist()) != list(range(self.dim)):
                raise ValueError("ordering must be a permutation of the state indices")
        return self

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.matrix @ z


class HeatMemoryGeometry(BaseModel):
    """Uniform interior grid on (0, 1) and the memory/control parameters."""
    model_config = ConfigDict(frozen=True)

    n_points: int = Field(default=DEFAULT_GRID_POINTS, ge=2)
    beta: float = Field(default=DEFAULT_BETA, ge=0)
    eta_mem: float = Field(default=DEFAULT_ETA_MEM, gt=0)
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0)

    @property
    def h(self) -> float:
        return 1.0 / (self.n_points + 1)

    @property
    def x(self) -> np.ndarray:
        """Interior grid points x_j = j*h, j = 1..N."""
        return np.arange(1, self.n_points + 1) * self.h

    @property
    def x_with_boundary(self) -> np.ndarray:
        return np.arange(0, self.n_points + 2) * self.h


class MonotoneVerdict(BaseModel):
    """Outcome of a weighted monotonicity check."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    passed: bool
    lambda_min: float
    tol: float
    witness: np.ndarray | None = None
