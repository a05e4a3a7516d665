"""Mixed-norm Lebesgue norms, Orlicz modulars, and Luxemburg norms on grids.

The mixed Lebesgue norm with exponent tuple ``P = (p_1, ..., p_r)`` nests one
integral per coordinate, innermost first::

    ||g||_P = ( int ... ( int |g|^{p_1} dx_1 )^{p_2/p_1} dx_2 ... )^{1/p_r}

and the mixed Orlicz modular generated by ``Phi = (phi_1, ..., phi_r)``
composes the Orlicz functions the same way::

    I_Phi[g] = int phi_r( ... int phi_1(|g|) dx_1 ... ) dx_r.

Both are evaluated by the midpoint rule on the grid a
:class:`~kanops.operator.GridFunction` carries: every sample represents a
cell of measure ``width_j / N_j`` along coordinate ``j``, and coordinate 1
(the innermost array axis) is always reduced first.  The Luxemburg norm is
the modular's gauge, ``inf { lam > 0 : I_Phi[g / lam] <= 1 }``, computed by
bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    ConfigurationError,
    ConjugateInfiniteError,
    NumericError,
)
from .operator import GridFunction

__all__ = [
    "MixedExponents",
    "OrliczFunction",
    "OrliczVector",
    "HolderReport",
    "mixed_lebesgue_norm",
    "mixed_lebesgue_error",
    "orlicz_phi_eval",
    "mixed_orlicz_modular",
    "luxemburg_norm",
    "sup_error",
    "holder_check",
]


@dataclass(frozen=True)
class MixedExponents:
    """An exponent tuple ``P = (p_1, ..., p_r)``, every entry finite >= 1.

    Entries apply per coordinate: ``p_1`` to the innermost integral.
    """

    p: tuple[float, ...]

    def __post_init__(self):
        ps = tuple(float(v) for v in np.atleast_1d(self.p))
        object.__setattr__(self, "p", ps)
        if len(ps) == 0:
            raise ArgumentError("exponent tuple must be non-empty")
        if not all(math.isfinite(v) and v >= 1.0 for v in ps):
            raise ArgumentError(
                f"every exponent must be finite and >= 1, got {ps}"
            )

    @property
    def ndim(self) -> int:
        return len(self.p)

    @classmethod
    def from_token(cls, token: str) -> "MixedExponents":
        """Parse a token such as ``"2,3"`` into an exponent tuple."""
        try:
            parts = tuple(float(v) for v in token.split(","))
        except ValueError:
            raise ConfigurationError(
                f"invalid exponent tuple token {token!r}"
            ) from None
        try:
            return cls(parts)
        except ArgumentError as exc:
            raise ConfigurationError(str(exc)) from None


@dataclass(frozen=True)
class OrliczFunction:
    """One Orlicz function: convex, non-decreasing, ``phi(0) = 0``.

    Variants (with their parameter constraints):

    ``power``:        ``phi(u) = u**p``, ``p >= 1``.
    ``exponential``:  ``phi(u) = exp(u**alpha) - 1``, ``alpha > 0``.
    ``logarithmic``:  ``phi(u) = u**alpha * log(e + u)**beta``,
                      ``alpha >= 1``, ``beta > 0``.
    """

    variant: str
    p: float | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.variant == "power":
            if self.p is None or not (math.isfinite(self.p) and self.p >= 1):
                raise ConfigurationError(
                    f"power Orlicz function needs p >= 1, got {self.p!r}"
                )
        elif self.variant == "exponential":
            if self.alpha is None or not (
                math.isfinite(self.alpha) and self.alpha > 0
            ):
                raise ConfigurationError(
                    f"exponential Orlicz function needs alpha > 0, "
                    f"got {self.alpha!r}"
                )
        elif self.variant == "logarithmic":
            ok = (
                self.alpha is not None
                and math.isfinite(self.alpha)
                and self.alpha >= 1
                and self.beta is not None
                and math.isfinite(self.beta)
                and self.beta > 0
            )
            if not ok:
                raise ConfigurationError(
                    f"logarithmic Orlicz function needs alpha >= 1 and "
                    f"beta > 0, got alpha={self.alpha!r}, beta={self.beta!r}"
                )
        else:
            raise ConfigurationError(
                f"unknown Orlicz variant {self.variant!r}; expected "
                f"'power', 'exponential', or 'logarithmic'"
            )

    @classmethod
    def power(cls, p: float) -> "OrliczFunction":
        return cls("power", p=float(p))

    @classmethod
    def exponential(cls, alpha: float) -> "OrliczFunction":
        return cls("exponential", alpha=float(alpha))

    @classmethod
    def logarithmic(cls, alpha: float, beta: float) -> "OrliczFunction":
        return cls("logarithmic", alpha=float(alpha), beta=float(beta))

    @classmethod
    def from_token(cls, token: str) -> "OrliczFunction":
        """Parse ``"pow:<p>"``, ``"exp:<alpha>"``, or ``"log:<alpha>:<beta>"``."""
        parts = token.split(":")
        try:
            if parts[0] == "pow" and len(parts) == 2:
                return cls.power(float(parts[1]))
            if parts[0] == "exp" and len(parts) == 2:
                return cls.exponential(float(parts[1]))
            if parts[0] == "log" and len(parts) == 3:
                return cls.logarithmic(float(parts[1]), float(parts[2]))
        except ValueError:
            raise ConfigurationError(
                f"invalid Orlicz function token {token!r}"
            ) from None
        raise ConfigurationError(
            f"invalid Orlicz function token {token!r}; expected 'pow:<p>', "
            f"'exp:<alpha>', or 'log:<alpha>:<beta>'"
        )

    @property
    def token(self) -> str:
        if self.variant == "power":
            return f"pow:{self.p:g}"
        if self.variant == "exponential":
            return f"exp:{self.alpha:g}"
        return f"log:{self.alpha:g}:{self.beta:g}"


@dataclass(frozen=True)
class OrliczVector:
    """A tuple ``Phi = (phi_1, ..., phi_r)``, one Orlicz function per axis."""

    phis: tuple[OrliczFunction, ...]

    def __post_init__(self):
        phis = tuple(self.phis)
        object.__setattr__(self, "phis", phis)
        if len(phis) == 0:
            raise ArgumentError("Orlicz vector must be non-empty")
        if not all(isinstance(p, OrliczFunction) for p in phis):
            raise ArgumentError("Orlicz vector entries must be OrliczFunction")

    @property
    def ndim(self) -> int:
        return len(self.phis)

    @classmethod
    def from_token(cls, token: str) -> "OrliczVector":
        """Parse a comma-joined token such as ``"exp:2,log:2:1.7"``."""
        parts = [t for t in token.split(",") if t]
        if not parts:
            raise ConfigurationError(f"empty Orlicz vector token {token!r}")
        return cls(tuple(OrliczFunction.from_token(t) for t in parts))

    @property
    def token(self) -> str:
        return ",".join(phi.token for phi in self.phis)


def _check_grid(g: GridFunction, ndim: int, what: str) -> None:
    if g.domain.ndim != ndim:
        raise ArgumentError(
            f"{what} has {ndim} entries but the grid function has "
            f"{g.domain.ndim} coordinates"
        )


def _check_same_carrier(f: GridFunction, g: GridFunction) -> None:
    if f.values.shape != g.values.shape:
        raise ArgumentError(
            f"grid functions have different shapes: "
            f"{f.values.shape} vs {g.values.shape}"
        )
    if f.domain != g.domain:
        raise ArgumentError("grid functions live on different domains")


def mixed_lebesgue_norm(g: GridFunction, P: MixedExponents) -> float:
    """Mixed Lebesgue norm ``||g||_P`` by nested midpoint quadrature.

    Parameters
    ----------
    g : GridFunction
    P : MixedExponents
        One exponent per coordinate; ``p_1`` applies to the innermost
        integral (coordinate 1, the last array axis).

    Returns
    -------
    float
        Non-negative; zero exactly when every sample is zero.

    Raises
    ------
    ArgumentError
        On dimension mismatch.
    """
    _check_grid(g, P.ndim, "exponent tuple")
    dx = g.spacing()
    a = np.abs(g.values)
    for j, p in enumerate(P.p):
        a = (np.sum(a**p, axis=-1) * dx[j]) ** (1.0 / p)
    return float(a)


def mixed_lebesgue_error(
    f: GridFunction, g: GridFunction, P: MixedExponents
) -> float:
    """``||f - g||_P`` for two grid functions on the same carrier."""
    _check_same_carrier(f, g)
    return mixed_lebesgue_norm(GridFunction(f.domain, f.values - g.values), P)


def orlicz_phi_eval(phi: OrliczFunction, u):
    """Evaluate an Orlicz function at non-negative argument(s).

    Parameters
    ----------
    phi : OrliczFunction
    u : array_like
        Non-negative value(s).

    Returns
    -------
    float or numpy.ndarray
        ``phi(u)``; the exponential variant saturates to ``+inf`` on
        overflow instead of raising.

    Raises
    ------
    ArgumentError
        If any entry of ``u`` is negative.
    """
    arr = np.asarray(u, dtype=np.float64)
    if np.any(arr < 0):
        raise ArgumentError("Orlicz functions are defined for u >= 0 only")
    with np.errstate(over="ignore"):
        if phi.variant == "power":
            out = arr**phi.p
        elif phi.variant == "exponential":
            out = np.expm1(arr**phi.alpha)
        else:
            out = arr**phi.alpha * np.log(np.e + arr) ** phi.beta
    return float(out) if arr.ndim == 0 else out


def mixed_orlicz_modular(
    g: GridFunction, Phi: OrliczVector, lam: float = 1.0
) -> float:
    """Mixed Orlicz modular ``I_Phi[lam * g]`` by nested midpoint quadrature.

    ``phi_1`` is applied pointwise and integrated over coordinate 1 first;
    each subsequent ``phi_j`` is applied to the previous nested integral.
    No Orlicz function is applied after the outermost integration.

    Parameters
    ----------
    g : GridFunction
    Phi : OrliczVector
    lam : float
        Positive scaling applied to ``|g|`` before the innermost function.

    Returns
    -------
    float
        Non-negative; may be ``+inf`` when the exponential variant
        overflows (saturation is the documented flag, not an exception).

    Raises
    ------
    ArgumentError
        On dimension mismatch or ``lam <= 0``.
    """
    _check_grid(g, Phi.ndim, "Orlicz vector")
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0):
        raise ArgumentError(f"lambda must be finite and > 0, got {lam!r}")
    dx = g.spacing()
    a = np.abs(g.values) * lam
    with np.errstate(over="ignore", invalid="ignore"):
        for j, phi in enumerate(Phi.phis):
            a = orlicz_phi_eval(phi, a)
            a = np.sum(a, axis=-1) * dx[j]
    return float(a)


#: Residual tolerance for the Luxemburg bisection: |I[g/lam] - 1| <= this.
LUXEMBURG_TOLERANCE = 1e-8

_MAX_BISECTION_STEPS = 200


def luxemburg_norm(g: GridFunction, Phi: OrliczVector) -> float:
    """Luxemburg norm ``inf { lam > 0 : I_Phi[g / lam] <= 1 }``.

    The bracketing phase doubles/halves ``lam`` until the modular crosses 1;
    bisection then drives the residual ``|I_Phi[g / lam] - 1|`` below
    ``1e-8``.  Saturated (infinite) modulars count as greater than 1, so
    overflow of the exponential variant steers the search rather than
    aborting it.

    Parameters
    ----------
    g : GridFunction
    Phi : OrliczVector

    Returns
    -------
    float
        The gauge value; exactly 0 for the zero grid function.

    Raises
    ------
    NumericError
        If bracketing or bisection fails to converge within 200 steps.
    """
    _check_grid(g, Phi.ndim, "Orlicz vector")
    if not np.any(g.values):
        return 0.0

    def modular_at(lam: float) -> float:
        return mixed_orlicz_modular(g, Phi, 1.0 / lam)

    hi = 1.0
    for _ in range(_MAX_BISECTION_STEPS):
        if modular_at(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise NumericError(
            "luxemburg_norm: no upper bracket within 200 doublings"
        )
    lo = hi
    for _ in range(_MAX_BISECTION_STEPS):
        half = lo / 2.0
        if modular_at(half) > 1.0:
            break
        lo = half
    else:
        raise NumericError(
            "luxemburg_norm: no lower bracket within 200 halvings"
        )
    lo = lo / 2.0  # modular(lo) > 1 >= modular(hi)
    for _ in range(_MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        value = modular_at(mid)
        if abs(value - 1.0) <= LUXEMBURG_TOLERANCE:
            return mid
        if value > 1.0:
            lo = mid
        else:
            hi = mid
    raise NumericError(
        "luxemburg_norm: bisection did not reach the 1e-8 residual "
        "within 200 steps"
    )


def sup_error(f: GridFunction, g: GridFunction) -> float:
    """Maximum absolute difference ``max |f - g|`` over the grid."""
    _check_same_carrier(f, g)
    return float(np.max(np.abs(f.values - g.values)))


@dataclass(frozen=True)
class HolderReport:
    """Result of a Hoelder-inequality check.

    Attributes
    ----------
    lhs : float
        ``||f * g||_(1,...,1)``.
    rhs : float
        ``||f||_P * ||g||_Q`` with ``Q`` the conjugate tuple.
    holds : bool
        Whether ``lhs <= rhs + 1e-9``.
    """

    lhs: float
    rhs: float
    holds: bool


def holder_check(
    f: GridFunction, g: GridFunction, P: MixedExponents
) -> HolderReport:
    """Check the mixed-norm Hoelder inequality ``||fg||_1 <= ||f||_P ||g||_Q``.

    Parameters
    ----------
    f, g : GridFunction
        Grid functions on the same carrier.
    P : MixedExponents
        Every exponent must be strictly greater than 1 so the conjugate
        tuple ``q_j = p_j / (p_j - 1)`` is finite.

    Returns
    -------
    HolderReport

    Raises
    ------
    ConjugateInfiniteError
        If some ``p_j == 1``.
    """
    _check_same_carrier(f, g)
    _check_grid(f, P.ndim, "exponent tuple")
    if any(p <= 1.0 for p in P.p):
        raise ConjugateInfiniteError(
            f"holder_check needs every exponent > 1 (finite conjugates), "
            f"got {P.p}"
        )
    Q = MixedExponents(tuple(p / (p - 1.0) for p in P.p))
    ones = MixedExponents((1.0,) * P.ndim)
    product = GridFunction(f.domain, np.abs(f.values * g.values))
    lhs = mixed_lebesgue_norm(product, ones)
    rhs = mixed_lebesgue_norm(f, P) * mixed_lebesgue_norm(g, Q)
    return HolderReport(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + 1e-9))
