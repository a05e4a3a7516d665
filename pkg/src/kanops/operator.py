"""Multivariate Kantorovich-type neural-network operators.

Given a scalar field ``f`` on a box domain, the operator of order ``n``
replaces point samples by cell averages::

    K_n f(x) = sum_k A_k * Psi(n*x - k) / sum_k Psi(n*x - k)

where ``k`` ranges over the integer lattice ``[-n, n-1]^r`` in canonical
coordinates (the domain mapped affinely onto ``[0, 1]^r``), ``Psi`` is the
product of univariate density kernels from :mod:`kanops.kernels`, and
``A_k`` is the average of ``f`` over the cell ``prod_j [k_j/n, (k_j+1)/n]``,
estimated by an ``m``-point midpoint rule per axis.  Because the kernel
weights are non-negative and sum to the denominator, the operator output is
a convex combination of the cell averages: constants are reproduced exactly
and the range of ``f`` is preserved.

Array layout
------------
All grids in this package store coordinate 1 along the **last** array axis
(the row-major innermost axis), coordinate 2 along the second-to-last, and
so on.  For two-dimensional data this is the familiar image convention
``values[row, column] = g(x1=column coordinate, x2=row coordinate)``.
Domains, exponent tuples, and field call signatures always use coordinate
order ``(x1, x2, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, DegenerateKernelError, NumericError
from .kernels import DensityKernel, density_eval, make_kernel

__all__ = [
    "BoxDomain",
    "GridFunction",
    "ScalarField",
    "CellAverageTensor",
    "step_field",
    "cell_averages",
    "masked_cell_averages",
    "kantorovich_eval",
    "kantorovich_apply_grid",
    "evaluate_on_grid",
]

#: Denominators below this are treated as degenerate (division unreliable).
DENOMINATOR_FLOOR = 1e-300


@dataclass(frozen=True)
class BoxDomain:
    """An axis-aligned box ``prod_j [lower_j, upper_j]`` in ``R^r``.

    Parameters
    ----------
    lower, upper : tuple of float
        Componentwise bounds in coordinate order, ``lower[j] < upper[j]``.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi) or len(lo) == 0:
            raise ArgumentError(
                f"lower/upper must be equal-length non-empty vectors, "
                f"got lengths {len(lo)} and {len(hi)}"
            )
        if not all(np.isfinite(lo)) or not all(np.isfinite(hi)):
            raise ArgumentError("domain bounds must be finite")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ArgumentError(
                f"each lower bound must be strictly below its upper bound, "
                f"got lower={lo}, upper={hi}"
            )

    @property
    def ndim(self) -> int:
        """Dimension ``r`` of the box."""
        return len(self.lower)

    @classmethod
    def unit(cls, ndim: int) -> "BoxDomain":
        """The canonical unit box ``[0, 1]^ndim``."""
        return cls((0.0,) * ndim, (1.0,) * ndim)

    def widths(self) -> tuple[float, ...]:
        """Edge lengths ``upper_j - lower_j`` in coordinate order."""
        return tuple(b - a for a, b in zip(self.lower, self.upper))


@dataclass(frozen=True)
class ScalarField:
    """An evaluable scalar field: a callable together with its domain.

    The callable receives one array per coordinate, in coordinate order,
    and must broadcast (``fn(x1, x2, ..., xr)``).

    Parameters
    ----------
    fn : callable
        Vectorized evaluation function.
    domain : BoxDomain
        The box on which the field is defined.
    """

    fn: Callable
    domain: BoxDomain

    def __call__(self, *coords):
        return self.fn(*coords)


@dataclass(frozen=True)
class GridFunction:
    """A scalar field sampled on a uniform grid over a box domain.

    Parameters
    ----------
    domain : BoxDomain
        The carrier box.
    values : numpy.ndarray
        Dense real samples, all finite.  Coordinate 1 varies along the
        last (innermost) array axis; coordinate ``r`` along the first.

    Notes
    -----
    Norms and modulars in :mod:`kanops.normspaces` treat each sample as
    representing one cell of measure ``prod_j width_j / N_j`` (midpoint
    rule on the carried grid), where ``N_j`` is the number of samples
    along coordinate ``j``.
    """

    domain: BoxDomain
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != self.domain.ndim:
            raise ArgumentError(
                f"values have {vals.ndim} axes but the domain has "
                f"{self.domain.ndim} coordinates"
            )
        if vals.size == 0:
            raise ArgumentError("values must be non-empty")
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("values must all be finite")

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of the samples (storage order)."""
        return self.values.shape

    def points_along(self, coord: int) -> int:
        """Number of samples along coordinate ``coord`` (1-based)."""
        return self.values.shape[self.domain.ndim - coord]

    def spacing(self) -> tuple[float, ...]:
        """Cell measure per coordinate, ``width_j / N_j``, coordinate order."""
        r = self.domain.ndim
        return tuple(
            w / self.values.shape[r - 1 - j]
            for j, w in enumerate(self.domain.widths())
        )

    def as_field(self) -> ScalarField:
        """Step-function view of the samples (see :func:`step_field`)."""
        return step_field(self.values, self.domain)


def step_field(values, domain: BoxDomain) -> ScalarField:
    """Wrap a sample array as a piecewise-constant field on ``domain``.

    A coordinate ``x_j`` is mapped to canonical position
    ``t = (x_j - lower_j) / width_j`` and then to the sample index
    ``clip(floor(t * (N_j - 1)), 0, N_j - 1)``; out-of-domain coordinates
    therefore clamp to the nearest boundary sample.  This is the lookup rule
    used by all image pipelines.

    Parameters
    ----------
    values : numpy.ndarray
        Sample array in the package storage order (coordinate 1 innermost).
        May contain NaN sentinels when used internally for masked data.
    domain : BoxDomain
        Box carrying the samples.

    Returns
    -------
    ScalarField
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != domain.ndim:
        raise ArgumentError(
            f"values have {vals.ndim} axes but the domain has "
            f"{domain.ndim} coordinates"
        )
    r = domain.ndim
    lower = domain.lower
    widths = domain.widths()

    def lookup(*coords):
        if len(coords) != r:
            raise ArgumentError(
                f"field takes {r} coordinate arrays, got {len(coords)}"
            )
        idx = []
        for j, c in enumerate(coords):
            t = (np.asarray(c, dtype=np.float64) - lower[j]) / widths[j]
            n_j = vals.shape[r - 1 - j]
            i = np.clip(np.floor(t * (n_j - 1)), 0, n_j - 1).astype(np.intp)
            idx.append(i)
        return vals[tuple(idx[::-1])]

    return ScalarField(lookup, domain)


@dataclass(frozen=True)
class CellAverageTensor:
    """Kantorovich coefficients ``A_k`` for ``k`` in ``[-n, n-1]^r``.

    Parameters
    ----------
    n : int
        Operator order; the lattice has ``2n`` cells per axis.
    r : int
        Spatial dimension.
    coeffs : numpy.ndarray
        Dense array of shape ``(2n,) * r`` holding ``A_k`` at offset index
        ``k + n`` per axis, in the package storage order (coordinate 1
        innermost).
    domain : BoxDomain
        The domain the coefficients were built on (needed to map evaluation
        points to canonical coordinates).
    valid : numpy.ndarray or None
        Optional boolean array marking cells that received at least one
        valid sample; ``None`` means all cells are valid.  Coefficients of
        invalid cells are zero and their kernel weights are dropped from
        both the numerator and the denominator during evaluation.
    """

    n: int
    r: int
    coeffs: np.ndarray
    domain: BoxDomain
    valid: np.ndarray | None = None

    def __post_init__(self):
        expected = (2 * self.n,) * self.r
        if self.coeffs.shape != expected:
            raise ArgumentError(
                f"coeffs shape {self.coeffs.shape} does not match "
                f"(2n,)*r = {expected}"
            )
        if self.valid is None and not np.all(np.isfinite(self.coeffs)):
            raise ArgumentError("coefficients must all be finite")


def _subsample_axis(n: int, m: int) -> np.ndarray:
    """Canonical midpoint subsample positions, cell-major, length ``2n*m``.

    For each cell ``k`` the positions are ``(k + (p - 1/2)/m) / n`` for
    ``p = 1..m``.
    """
    ks = np.arange(-n, n, dtype=np.float64)
    offs = (np.arange(m, dtype=np.float64) + 0.5) / m
    return ((ks[:, None] + offs[None, :]) / n).ravel()


def _sample_field(f, n: int, m: int) -> np.ndarray:
    """Evaluate ``f`` on the full tensor grid of cell subsamples.

    Returns an array of shape ``(2n*m,) * r`` in storage order.  Canonical
    positions outside ``[0, 1]`` (cells protruding past the domain) are
    clamped onto the domain before mapping to real coordinates.
    """
    domain = f.domain
    r = domain.ndim
    t = np.clip(_subsample_axis(n, m), 0.0, 1.0)
    axes = [
        domain.lower[j] + t * (domain.upper[j] - domain.lower[j])
        for j in range(r)
    ]
    # meshgrid in storage order (coordinate r first), sparse for memory.
    mesh = np.meshgrid(*axes[::-1], indexing="ij", sparse=True)
    result = f(*mesh[::-1])
    full_shape = (2 * n * m,) * r
    return np.array(np.broadcast_to(result, full_shape), dtype=np.float64)


def _reduce_cell_means(samples: np.ndarray, n: int, m: int) -> np.ndarray:
    """Average each axis in blocks of ``m``, turning samples into means."""
    out = samples
    for axis in range(out.ndim):
        shape = out.shape[:axis] + (2 * n, m) + out.shape[axis + 1 :]
        out = out.reshape(shape).mean(axis=axis + 1)
    return out


def _offending_cell(bad_storage_index, m: int, n: int, r: int):
    """Map a storage-order sample index to its cell ``k`` (coordinate order)."""
    cells_storage = [int(i) // m - n for i in bad_storage_index]
    return tuple(cells_storage[::-1])


def cell_averages(f, n: int, m: int = 4) -> CellAverageTensor:
    """Estimate the cell averages ``A_k`` of a field by midpoint sampling.

    Parameters
    ----------
    f : ScalarField
        Field to average; any object with a ``domain`` attribute that is
        callable on coordinate arrays works.
    n : int
        Operator order (``2n`` cells per axis), at least 1.
    m : int
        Midpoint subsamples per cell axis, at least 1 (default 4); each
        coefficient is the mean of ``m**r`` samples.

    Returns
    -------
    CellAverageTensor

    Raises
    ------
    ArgumentError
        For non-positive ``n`` or ``m``.
    NumericError
        If the field produces a non-finite sample; the message names the
        offending cell index ``k``.
    """
    n = _positive_int(n, "n")
    m = _positive_int(m, "m")
    samples = _sample_field(f, n, m)
    if not np.all(np.isfinite(samples)):
        bad = np.argwhere(~np.isfinite(samples))[0]
        cell = _offending_cell(bad, m, n, samples.ndim)
        raise NumericError(
            f"field produced a non-finite sample in cell k={cell}"
        )
    coeffs = _reduce_cell_means(samples, n, m)
    return CellAverageTensor(
        n=n, r=samples.ndim, coeffs=coeffs, domain=f.domain
    )


def masked_cell_averages(f, n: int, m: int = 4) -> CellAverageTensor:
    """Cell averages of a field with NaN sentinels marking missing data.

    Within each cell only the finite subsamples are averaged; a cell whose
    subsamples are all NaN is marked invalid (coefficient 0, excluded from
    numerator and denominator at evaluation time).  Infinities are still
    numeric errors.

    Parameters
    ----------
    f : ScalarField
        Field whose missing samples return NaN.
    n, m : int
        As in :func:`cell_averages`.

    Returns
    -------
    CellAverageTensor
        With a boolean ``valid`` array.

    Raises
    ------
    NumericError
        If the field produces ``+-inf`` (as opposed to the NaN sentinel).
    """
    n = _positive_int(n, "n")
    m = _positive_int(m, "m")
    samples = _sample_field(f, n, m)
    if np.any(np.isinf(samples)):
        bad = np.argwhere(np.isinf(samples))[0]
        cell = _offending_cell(bad, m, n, samples.ndim)
        raise NumericError(
            f"field produced an infinite sample in cell k={cell}"
        )
    finite = np.isfinite(samples)
    sums = _reduce_cell_means(np.where(finite, samples, 0.0), n, m)
    counts = _reduce_cell_means(finite.astype(np.float64), n, m)
    valid = counts > 0.0
    coeffs = np.divide(sums, counts, out=np.zeros_like(sums), where=valid)
    return CellAverageTensor(
        n=n, r=samples.ndim, coeffs=coeffs, domain=f.domain, valid=valid
    )


def _positive_int(value, name: str) -> int:
    iv = int(value)
    if iv != value or iv < 1:
        raise ArgumentError(f"{name} must be a positive integer, got {value!r}")
    return iv


def _axis_weights(kernel: DensityKernel, n: int, t: np.ndarray) -> np.ndarray:
    """Kernel weight matrix ``W[i, k] = psi(n * t[i] - k)``, ``k`` offset by n."""
    ks = np.arange(-n, n, dtype=np.float64)
    return density_eval(kernel, n * t[:, None] - ks[None, :])


def _canonical_point(domain: BoxDomain, x) -> np.ndarray:
    """Map a point of the domain to canonical ``[0, 1]^r`` coordinates."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.shape != (domain.ndim,):
        raise ArgumentError(
            f"point must have {domain.ndim} coordinates, got shape {arr.shape}"
        )
    lo = np.asarray(domain.lower)
    hi = np.asarray(domain.upper)
    tol = 1e-12 * np.maximum(1.0, np.abs(hi - lo))
    if np.any(arr < lo - tol) or np.any(arr > hi + tol):
        raise ArgumentError(f"point {tuple(arr)} lies outside the domain")
    return np.clip((arr - lo) / (hi - lo), 0.0, 1.0)


def kantorovich_eval(coeffs: CellAverageTensor, kernel, x) -> float:
    """Evaluate the Kantorovich operator at a single point.

    Parameters
    ----------
    coeffs : CellAverageTensor
        Coefficients built by :func:`cell_averages` (or the masked variant).
    kernel : DensityKernel or str
        Density kernel (tokens are parsed).
    x : array_like
        Point inside the tensor's domain (scalar allowed for ``r == 1``).

    Returns
    -------
    float
        ``sum_k A_k Psi(n x - k) / sum_k Psi(n x - k)``, a convex
        combination of the coefficients.

    Raises
    ------
    ArgumentError
        If ``x`` lies outside the domain or has the wrong length.
    DegenerateKernelError
        If the weight denominator falls below ``1e-300``.
    """
    kern = make_kernel(kernel)
    t = _canonical_point(coeffs.domain, x)
    weights = [
        _axis_weights(kern, coeffs.n, t[j : j + 1])[0]
        for j in range(coeffs.r)
    ]
    num = coeffs.coeffs
    for w in weights:  # contracts the last axis: k_1 first, then k_2, ...
        num = num @ w
    if coeffs.valid is None:
        den = float(np.prod([w.sum() for w in weights]))
    else:
        den = coeffs.valid.astype(np.float64)
        for w in weights:
            den = den @ w
        den = float(den)
    if den < DENOMINATOR_FLOOR:
        raise DegenerateKernelError(
            f"kernel weight sum {den!r} at point {x!r} is below 1e-300"
        )
    return float(num) / den


def evaluate_on_grid(
    coeffs: CellAverageTensor, kernel, out_shape
) -> np.ndarray:
    """Evaluate the operator on the uniform inclusive grid of the domain.

    The grid along coordinate ``j`` consists of ``N_j`` equispaced points
    including both domain endpoints, where ``N_j`` is the ``out_shape``
    entry for the corresponding storage axis.  The computation is a chain
    of separable tensor contractions; results are independent of evaluation
    order.

    Parameters
    ----------
    coeffs : CellAverageTensor
    kernel : DensityKernel or str
    out_shape : tuple of int
        Output array shape (storage order, coordinate 1 last), every entry
        at least 2.

    Returns
    -------
    numpy.ndarray
        Array of shape ``out_shape``.

    Raises
    ------
    ArgumentError
        For a shape of wrong length or entries below 2.
    DegenerateKernelError
        If any grid point's weight denominator falls below ``1e-300``.
    """
    kern = make_kernel(kernel)
    r = coeffs.r
    shape = tuple(int(s) for s in np.atleast_1d(out_shape))
    if len(shape) != r or any(s < 2 for s in shape):
        raise ArgumentError(
            f"out_shape must have {r} entries, each >= 2, got {shape}"
        )
    # Weight matrices per storage axis a (coordinate r - a).
    ws = [
        _axis_weights(kern, coeffs.n, np.linspace(0.0, 1.0, shape[a]))
        for a in range(r)
    ]

    def contract(tensor: np.ndarray) -> np.ndarray:
        # Contract coordinate 1 (last storage axis) first, moving each new
        # grid axis to the front; after r steps the axes are again in
        # storage order.
        out = tensor
        for j in range(1, r + 1):
            w = ws[r - j]
            out = np.moveaxis(np.tensordot(out, w, axes=([-1], [1])), -1, 0)
        return out

    num = contract(coeffs.coeffs)
    if coeffs.valid is None:
        den = np.array(1.0)
        for a in range(r):
            den = np.multiply.outer(den, ws[a].sum(axis=1))
        den = den.reshape(tuple(s for s in shape))
    else:
        den = contract(coeffs.valid.astype(np.float64))
    if float(den.min()) < DENOMINATOR_FLOOR:
        raise DegenerateKernelError(
            "kernel weight sum below 1e-300 somewhere on the output grid"
        )
    return num / den


def kantorovich_apply_grid(
    f, kernel, n: int, m: int = 4, out_shape=None
) -> GridFunction:
    """Apply the order-``n`` operator to a field and sample it on a grid.

    Parameters
    ----------
    f : ScalarField
        Input field (callable with a ``domain``).
    kernel : DensityKernel or str
    n : int
        Operator order.
    m : int
        Midpoint subsamples per cell axis (default 4).
    out_shape : tuple of int
        Output grid shape (storage order), every entry at least 2.

    Returns
    -------
    GridFunction
        ``K_n f`` sampled on the uniform inclusive grid of ``f``'s domain.
    """
    if out_shape is None:
        raise ArgumentError("out_shape is required")
    coeffs = cell_averages(f, n, m)
    values = evaluate_on_grid(coeffs, kernel, out_shape)
    return GridFunction(f.domain, values)
