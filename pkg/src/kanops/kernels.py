"""Sigmoidal activation functions and their induced density kernels.

A sigmoidal function ``rho`` is a non-decreasing function with limits 0 at
``-inf`` and 1 at ``+inf``.  Each supported sigmoid induces the density
kernel::

    psi(x) = (rho(x + 1) - rho(x - 1)) / 2

which is even, non-negative, has unit mass, and satisfies the partition of
unity ``sum_k psi(x - k) = 1`` over integer shifts.  These kernels are the
activation profiles of the Kantorovich-type neural-network operators in
:mod:`kanops.operator`.

Supported kinds, selectable by string token:

``"logistic"``
    ``rho(x) = 1 / (1 + exp(-x))``.
``"tanh"``
    ``rho(x) = (tanh(x) + 1) / 2``, the hyperbolic-tangent sigmoid rescaled
    to limits {0, 1}.
``"ramp"``
    ``rho(x) = clip(x + 1/2, 0, 1)``; the kernel is a symmetric trapezoid
    supported on ``[-3/2, 3/2]``.
``"bspline:<order>"``
    ``rho(x) = integral of the central B-spline of the given order`` (orders
    1-4, closed-form piecewise polynomials); the kernel is supported on
    ``[-(order/2 + 1), order/2 + 1]``.

The logistic and tanh kernels are evaluated in product form,
``psi(x) = c * sigma(a*x - b) * sigma(-a*x - b)``, which is free of the
catastrophic cancellation the naive difference suffers in the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ArgumentError, ConfigurationError

__all__ = [
    "SigmoidKind",
    "DensityKernel",
    "make_kernel",
    "sigmoid_eval",
    "density_eval",
    "density_product",
    "density_l1",
]

#: Effective support half-width used for kernels whose true support is the
#: whole real line.  psi_logistic(40) < 1e-17, below double-precision
#: resolution relative to the unit mass.
UNBOUNDED_TAIL_CUTOFF = 40.0

_BSPLINE_ORDERS = (1, 2, 3, 4)
_VARIANTS = ("logistic", "tanh", "ramp", "bspline")


@dataclass(frozen=True)
class SigmoidKind:
    """Identifies one sigmoidal activation function.

    Parameters
    ----------
    variant : str
        One of ``"logistic"``, ``"tanh"``, ``"ramp"``, ``"bspline"``.
    order : int, optional
        B-spline order, required iff ``variant == "bspline"``; only orders
        1-4 have implemented closed forms.
    """

    variant: str
    order: int | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ConfigurationError(
                f"unknown sigmoid variant {self.variant!r}; "
                f"expected one of {_VARIANTS}"
            )
        if self.variant == "bspline":
            if self.order not in _BSPLINE_ORDERS:
                raise ConfigurationError(
                    f"unsupported bspline order {self.order!r}; "
                    f"closed forms are implemented for orders {_BSPLINE_ORDERS}"
                )
        elif self.order is not None:
            raise ConfigurationError(
                f"variant {self.variant!r} does not take an order"
            )

    @property
    def token(self) -> str:
        """The string token naming this kind (inverse of parsing)."""
        if self.variant == "bspline":
            return f"bspline:{self.order}"
        return self.variant


def _parse_kind(token: str) -> SigmoidKind:
    """Parse a kernel-kind token such as ``"tanh"`` or ``"bspline:3"``."""
    if not isinstance(token, str):
        raise ConfigurationError(f"kernel token must be a string, got {token!r}")
    name, sep, arg = token.partition(":")
    if name == "bspline":
        if not sep:
            raise ConfigurationError(
                "bspline kernel token requires an order, e.g. 'bspline:2'"
            )
        try:
            order = int(arg)
        except ValueError:
            raise ConfigurationError(
                f"invalid bspline order {arg!r} in token {token!r}"
            ) from None
        return SigmoidKind("bspline", order)
    if sep:
        raise ConfigurationError(f"kernel token {token!r} takes no parameter")
    return SigmoidKind(name)


def _as_kind(kind) -> SigmoidKind:
    if isinstance(kind, SigmoidKind):
        return kind
    if isinstance(kind, DensityKernel):
        return kind.kind
    return _parse_kind(kind)


def _as_array(x, name: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} must be finite")
    return arr, arr.ndim == 0


def _bspline_sigmoid(order: int, x: np.ndarray) -> np.ndarray:
    """Antiderivative of the central B-spline of the given order.

    Piecewise-polynomial closed form: for ``|x| < order/2``,

        rho(x) = (1/order!) * sum_i (-1)^i C(order, i)
                 * max(order/2 + x - i, 0)^order

    with the trivial values 0 and 1 outside that interval.
    """
    half = order / 2.0
    out = np.zeros_like(x)
    out[x >= half] = 1.0
    inside = (x > -half) & (x < half)
    t = x[inside]
    acc = np.zeros_like(t)
    for i in range(order + 1):
        coeff = (-1) ** i * math.comb(order, i)
        acc += coeff * np.maximum(half + t - i, 0.0) ** order
    out[inside] = acc / math.factorial(order)
    return out


def sigmoid_eval(kind, x):
    """Evaluate a sigmoidal activation function.

    Parameters
    ----------
    kind : SigmoidKind or DensityKernel or str
        The activation to evaluate; string tokens are parsed.
    x : array_like
        Finite evaluation point(s).

    Returns
    -------
    float or numpy.ndarray
        ``rho(x)`` in ``[0, 1]``, non-decreasing in ``x`` with limits 0 at
        ``-inf`` and 1 at ``+inf``.

    Raises
    ------
    ConfigurationError
        If the kind token is malformed or the B-spline order is unsupported.
    ArgumentError
        If ``x`` is not finite.
    """
    k = _as_kind(kind)
    arr, scalar = _as_array(x, "x")
    if k.variant == "logistic":
        out = expit(arr)
    elif k.variant == "tanh":
        # (tanh(x) + 1) / 2 == 1 / (1 + exp(-2x)), overflow-safe via expit.
        out = expit(2.0 * arr)
    elif k.variant == "ramp":
        out = np.clip(arr + 0.5, 0.0, 1.0)
    else:
        out = _bspline_sigmoid(k.order, arr)
    return float(out) if scalar else out


@dataclass(frozen=True)
class DensityKernel:
    """A density kernel ``psi`` derived from one sigmoid kind.

    Attributes
    ----------
    kind : SigmoidKind
        The generating sigmoid.
    support_radius : float
        Half-width of the exact support; ``inf`` for logistic/tanh,
        ``3/2`` for ramp, ``order/2 + 1`` for B-splines.
    psi_at_2 : float
        Cached value ``psi(2)``, the classical lower-bound constant for the
        operator denominator.  It is exactly 0 for kernels whose support
        radius does not exceed 2 (ramp and B-spline orders 1-2).
    tail_cutoff : float
        Half-width of the interval used for quadrature and truncated sums:
        40 for unbounded-support kinds, ``ceil(support_radius)`` otherwise
        (an integer cutoff keeps midpoint quadrature grids aligned with the
        kernels' polynomial-piece boundaries).
    """

    kind: SigmoidKind
    support_radius: float
    psi_at_2: float
    tail_cutoff: float

    @property
    def token(self) -> str:
        return self.kind.token


def make_kernel(kind) -> DensityKernel:
    """Construct a :class:`DensityKernel` from a token or kind.

    Parameters
    ----------
    kind : str or SigmoidKind or DensityKernel
        Kernel selector, e.g. ``"tanh"`` or ``"bspline:2"``.  An existing
        kernel is returned unchanged.

    Returns
    -------
    DensityKernel

    Raises
    ------
    ConfigurationError
        For malformed tokens or unsupported B-spline orders.
    """
    if isinstance(kind, DensityKernel):
        return kind
    k = _as_kind(kind)
    if k.variant in ("logistic", "tanh"):
        radius = math.inf
        cutoff = UNBOUNDED_TAIL_CUTOFF
    elif k.variant == "ramp":
        radius = 1.5
        cutoff = float(math.ceil(radius))
    else:
        radius = k.order / 2.0 + 1.0
        cutoff = float(math.ceil(radius))
    kernel = DensityKernel(
        kind=k, support_radius=radius, psi_at_2=0.0, tail_cutoff=cutoff
    )
    psi2 = density_eval(kernel, 2.0)
    return DensityKernel(
        kind=k, support_radius=radius, psi_at_2=psi2, tail_cutoff=cutoff
    )


# Precomputed product-form constants: (exp(2) - 1) / 2 and (exp(4) - 1) / 2.
_LOGISTIC_SCALE = math.expm1(2.0) / 2.0
_TANH_SCALE = math.expm1(4.0) / 2.0


def density_eval(kernel, x):
    """Evaluate the density kernel ``psi(x) = (rho(x+1) - rho(x-1)) / 2``.

    Parameters
    ----------
    kernel : DensityKernel or SigmoidKind or str
        Kernel selector; tokens are parsed.
    x : array_like
        Finite evaluation point(s).

    Returns
    -------
    float or numpy.ndarray
        Non-negative kernel values; exactly 0 beyond ``support_radius`` for
        the compact-support kinds.

    Notes
    -----
    For logistic and tanh the mathematically equivalent product forms ::

        psi_logistic(x) = (e^2 - 1)/2 * sigma(x - 1) * sigma(-x - 1)
        psi_tanh(x)     = (e^4 - 1)/2 * sigma(2x - 2) * sigma(-2x - 2)

    (``sigma`` the logistic function) are used; they avoid the cancellation
    of the direct difference in the tails and are symmetric in ``x`` down to
    the last bit.
    """
    k = _as_kind(kernel)
    arr, scalar = _as_array(x, "x")
    if k.variant == "logistic":
        out = _LOGISTIC_SCALE * expit(arr - 1.0) * expit(-arr - 1.0)
    elif k.variant == "tanh":
        out = _TANH_SCALE * expit(2.0 * arr - 2.0) * expit(-2.0 * arr - 2.0)
    else:
        out = 0.5 * (
            sigmoid_eval(k, arr + 1.0) - sigmoid_eval(k, arr - 1.0)
        )
    return float(out) if scalar else out


def density_product(kernel, xs):
    """Evaluate the multivariate product kernel ``prod_j psi(x_j)``.

    Parameters
    ----------
    kernel : DensityKernel or SigmoidKind or str
        Kernel selector.
    xs : array_like
        One-dimensional vector of coordinates, length ``r >= 1``.

    Returns
    -------
    float
        The product of the univariate kernel values; 0 whenever any
        coordinate lies outside the support.

    Raises
    ------
    ArgumentError
        If ``xs`` is empty or not one-dimensional.
    """
    arr = np.asarray(xs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ArgumentError(
            f"xs must be a non-empty 1-D vector, got shape {arr.shape}"
        )
    return float(np.prod(density_eval(kernel, arr)))


def density_l1(kernel, quad_points: int) -> float:
    """Midpoint-rule estimate of the kernel mass ``integral of psi``.

    The integration interval is ``[-tail_cutoff, tail_cutoff]``, which
    contains the full support for compact kernels and all numerically
    representable mass for the unbounded ones.  Provided as a self-check:
    the result is 1 up to quadrature and truncation error.

    Parameters
    ----------
    kernel : DensityKernel or SigmoidKind or str
        Kernel selector.
    quad_points : int
        Number of midpoint cells, at least 64.

    Returns
    -------
    float

    Raises
    ------
    ArgumentError
        If ``quad_points < 64``.
    """
    kern = make_kernel(kernel)
    n = int(quad_points)
    if n < 64:
        raise ArgumentError(f"quad_points must be >= 64, got {quad_points}")
    c = kern.tail_cutoff
    h = 2.0 * c / n
    mids = -c + (np.arange(n) + 0.5) * h
    return float(np.sum(density_eval(kern, mids)) * h)
