"""Domain types.

Images are unit-spaced H x W grids. Axis 0 (rows, index ``i``) is the first
coordinate x1 and axis 1 (columns, index ``j``) is x2. Vector and matrix
fields are plain float arrays:

* vector field: shape ``(2, H, W)``, ``v[k]`` is component ``v_{k+1}``
* matrix field: shape ``(2, 2, H, W)``, ``q[l, j]`` is entry ``(l+1, j+1)``

Scalar images carry validation and are wrapped in :class:`ScalarImage`.
Everything is immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, DimensionMismatch, NonFiniteError, ParameterError

MIN_ALPHA = 1e-8


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def validate_image(values) -> None:
    """Raise if ``values`` is not a valid scalar image (2-D, at least 2x2, finite)."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D image, got shape {a.shape}")
    if a.shape[0] < 2 or a.shape[1] < 2:
        raise DimensionError(f"image must be at least 2x2, got {a.shape[0]}x{a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("image contains NaN or Inf")


def validate_vector_field(p, shape=None) -> None:
    a = np.asarray(p)
    if a.ndim != 3 or a.shape[0] != 2:
        raise DimensionError(f"vector field must have shape (2, H, W), got {a.shape}")
    if shape is not None and a.shape[1:] != tuple(shape):
        raise DimensionMismatch(f"field grid {a.shape[1:]} does not match image {tuple(shape)}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("vector field contains NaN or Inf")


def validate_matrix_field(q, shape=None) -> None:
    a = np.asarray(q)
    if a.ndim != 4 or a.shape[:2] != (2, 2):
        raise DimensionError(f"matrix field must have shape (2, 2, H, W), got {a.shape}")
    if shape is not None and a.shape[2:] != tuple(shape):
        raise DimensionMismatch(f"field grid {a.shape[2:]} does not match image {tuple(shape)}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix field contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class ScalarImage:
    """Real-valued intensity grid, nominal range [0, 255], unclamped."""

    values: np.ndarray

    def __post_init__(self):
        validate_image(self.values)
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, ScalarImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None


def as_array(img) -> np.ndarray:
    """Return the float array behind a ScalarImage or array-like, validating it."""
    if isinstance(img, ScalarImage):
        return img.values
    a = np.asarray(img, dtype=np.float64)
    validate_image(a)
    return a


@dataclass(frozen=True, eq=False)
class OperatorCoefficients:
    """Coefficients of a first-order operator ``(Bv)_lj = sum_ik b^i_ljk d_i v_k``.

    ``b1`` multiplies derivatives along axis 0, ``b2`` along axis 1. Both are
    indexed ``[l, j, k]`` (zero-based).
    """

    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("b1", "b2"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.shape != (2, 2, 2):
                raise DimensionError(f"{name} must have shape (2, 2, 2), got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise NonFiniteError(f"{name} contains NaN or Inf")
            object.__setattr__(self, name, _frozen(a))

    @property
    def tensor(self) -> np.ndarray:
        """Stacked coefficients, shape ``(2, 2, 2, 2)`` indexed ``[i, l, j, k]``."""
        return np.stack([self.b1, self.b2])

    @classmethod
    def zeros(cls) -> "OperatorCoefficients":
        return cls(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))

    def __mul__(self, lam: float) -> "OperatorCoefficients":
        return OperatorCoefficients(lam * self.b1, lam * self.b2)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OperatorCoefficients):
            return NotImplemented
        return bool(np.array_equal(self.b1, other.b1) and np.array_equal(self.b2, other.b2))

    def key(self) -> bytes:
        return self.b1.tobytes() + self.b2.tobytes()

    __hash__ = None


@dataclass(frozen=True, order=True)
class SkewParams:
    s: float
    t: float

    def __post_init__(self):
        for name in ("s", "t"):
            x = float(getattr(self, name))
            if not (0.0 <= x <= 1.0):
                raise ParameterError(f"{name} must lie in [0, 1], got {x}")
            object.__setattr__(self, name, x)


@dataclass(frozen=True, order=True)
class Alpha:
    alpha0: float
    alpha1: float

    def __post_init__(self):
        for name in ("alpha0", "alpha1"):
            x = float(getattr(self, name))
            if not np.isfinite(x) or x < MIN_ALPHA:
                raise ParameterError(f"{name} must be finite and >= {MIN_ALPHA}, got {x}")
            object.__setattr__(self, name, x)


@dataclass(frozen=True, eq=False)
class TrainingPair:
    clean: ScalarImage
    noisy: ScalarImage

    def __post_init__(self):
        for name in ("clean", "noisy"):
            img = getattr(self, name)
            if not isinstance(img, ScalarImage):
                object.__setattr__(self, name, ScalarImage(img))
        if self.clean.shape != self.noisy.shape:
            raise DimensionMismatch(
                f"clean {self.clean.shape} and noisy {self.noisy.shape} differ in size"
            )


@dataclass(frozen=True)
class SolverConfig:
    """Stopping and step-size controls of the primal-dual iteration.

    ``tolerance`` bounds the relative primal-dual residual, checked every
    ``check_interval`` iterations.
    """

    max_iters: int = 5000
    tolerance: float = 1e-5
    step_safety: float = 0.99
    check_interval: int = 10

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError(f"max_iters must be a positive integer, got {self.max_iters}")
        if int(self.check_interval) != self.check_interval or self.check_interval < 1:
            raise ParameterError(
                f"check_interval must be a positive integer, got {self.check_interval}"
            )
        if not (self.tolerance > 0 and np.isfinite(self.tolerance)):
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")
        if not (0.0 < self.step_safety < 1.0):
            raise ParameterError(f"step_safety must lie in (0, 1), got {self.step_safety}")
        object.__setattr__(self, "max_iters", int(self.max_iters))
        object.__setattr__(self, "check_interval", int(self.check_interval))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "step_safety", float(self.step_safety))


def grid_values(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic progression, rounded to 12 decimals to kill drift."""
    if step <= 0:
        raise ParameterError(f"step must be positive, got {step}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(n))


def _check_axis(name: str, values: Sequence[float], lo: float, lo_open: bool, hi: float | None):
    vals = tuple(float(x) for x in values)
    if not vals:
        raise ParameterError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ParameterError(f"{name} must be strictly increasing")
    for x in vals:
        if not np.isfinite(x) or (x <= lo if lo_open else x < lo) or (hi is not None and x > hi):
            raise ParameterError(f"{name} value {x} out of range")
    return vals


@dataclass(frozen=True)
class GridSpec:
    """Discrete search box for (alpha0, alpha1, s, t).

    The default box is alpha in {0.025, ..., 1}^2 and
    (s, t) in {0, 0.025, ..., 1}^2.
    """

    alpha0_values: tuple[float, ...] = field(default_factory=lambda: grid_values(0.025, 1, 0.025))
    alpha1_values: tuple[float, ...] = field(default_factory=lambda: grid_values(0.025, 1, 0.025))
    s_values: tuple[float, ...] = field(default_factory=lambda: grid_values(0, 1, 0.025))
    t_values: tuple[float, ...] = field(default_factory=lambda: grid_values(0, 1, 0.025))

    def __post_init__(self):
        for name in ("alpha0_values", "alpha1_values"):
            vals = _check_axis(name, getattr(self, name), MIN_ALPHA, False, None)
            object.__setattr__(self, name, vals)
        for name in ("s_values", "t_values"):
            vals = _check_axis(name, getattr(self, name), 0.0, False, 1.0)
            object.__setattr__(self, name, vals)

    @property
    def size(self) -> int:
        return (
            len(self.alpha0_values) * len(self.alpha1_values)
            * len(self.s_values) * len(self.t_values)
        )


class Evaluation(NamedTuple):
    alpha: Alpha
    skew: SkewParams
    cost: float
    iterations: int


@dataclass(frozen=True, eq=False)
class TrainingResult:
    alpha: Alpha
    skew: SkewParams
    cost: float
    reconstruction: ScalarImage
    evaluations: tuple[Evaluation, ...]

    def __eq__(self, other):
        if not isinstance(other, TrainingResult):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.skew == other.skew
            and self.cost == other.cost
            and self.reconstruction == other.reconstruction
            and self.evaluations == other.evaluations
        )

    __hash__ = None
