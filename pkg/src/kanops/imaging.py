"""Image pipelines built on the Kantorovich operator, plus test signals.

An :class:`Image` is a grayscale raster with values in ``[0, 1]``.  Each
pipeline views the raster as a piecewise-constant field on the unit square
(pixel ``(i, j)`` covers the coordinates that floor to it under
``t -> floor(t * (dim - 1))``, clamped at the borders), applies the
operator of :mod:`kanops.operator`, and samples the result back on the
pixel grid ``j / (width - 1)`` x ``i / (height - 1)``:

- :func:`reconstruct` resamples the image at its own resolution;
- :func:`inpaint` fills masked-out pixels from the valid ones only;
- :func:`upscale` / :func:`downsample` implement integer-factor scaling;
- :func:`denoise` is reconstruction applied to a noisy image.

Randomized steps (:func:`make_mask`, :func:`add_noise`) draw from numpy's
``default_rng`` (the PCG64 generator), which is seeded explicitly and
fully determines the output: positions are chosen by a seeded
Fisher-Yates permutation of the row-major pixel indices, and any value
draws follow in the same stream.  Identical inputs and seeds give
bit-identical outputs on every platform.

The module also provides the classical ``peaks`` test surface, separable
Gaussian / median baseline filters, and the two closed-form benchmark
fields used by the approximation experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d, median_filter

from .errors import ArgumentError, ConfigurationError, UnrecoverableMaskError
from .kernels import make_kernel
from .operator import (
    BoxDomain,
    GridFunction,
    ScalarField,
    cell_averages,
    evaluate_on_grid,
    masked_cell_averages,
    step_field,
)

__all__ = [
    "Image",
    "NoiseSpec",
    "reconstruct",
    "make_mask",
    "inpaint",
    "upscale",
    "downsample",
    "add_noise",
    "denoise",
    "peaks_field",
    "spatial_filter",
    "example_field",
]

#: Raw operator outputs within this distance of [0, 1] are clamped rather
#: than renormalized (they are floating-point dust on a convex combination).
_RANGE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Image:
    """A grayscale raster with normalized pixel values.

    Parameters
    ----------
    pixels : numpy.ndarray
        2-D array of finite values in ``[0, 1]``; ``pixels[i, j]`` is row
        ``i`` (vertical coordinate) and column ``j`` (horizontal).
    mask : numpy.ndarray, optional
        Boolean validity mask of the same shape, ``True`` marking valid
        pixels.  Masked images keep their original (untrusted) values;
        NaN sentinels appear only inside pipeline internals, never here.
    """

    pixels: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        pix = np.array(self.pixels, dtype=np.float64)
        object.__setattr__(self, "pixels", pix)
        if pix.ndim != 2 or pix.size == 0:
            raise ArgumentError(
                f"pixels must be a non-empty 2-D array, got shape {pix.shape}"
            )
        if not np.all(np.isfinite(pix)):
            raise ArgumentError("pixels must all be finite")
        if pix.min() < 0.0 or pix.max() > 1.0:
            raise ArgumentError(
                f"pixels must lie in [0, 1], got range "
                f"[{pix.min()}, {pix.max()}]"
            )
        if self.mask is not None:
            m = np.array(self.mask, dtype=bool)
            object.__setattr__(self, "mask", m)
            if m.shape != pix.shape:
                raise ArgumentError(
                    f"mask shape {m.shape} does not match pixels "
                    f"shape {pix.shape}"
                )

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    """A seeded noise model.

    Parameters
    ----------
    kind : str
        ``"impulse_white"`` (set pixels to 1), ``"salt_pepper"`` (set pixels
        to 0 or 1 with equal probability), or ``"gaussian"`` (additive,
        clamped).
    density : float
        Fraction of pixels hit by the impulse kinds, in ``[0, 1]``.
    sigma : float
        Standard deviation of the gaussian kind, non-negative.
    seed : int
        Seed of the PCG64 generator driving all draws.
    """

    kind: str
    density: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("impulse_white", "salt_pepper", "gaussian"):
            raise ConfigurationError(
                f"unknown noise kind {self.kind!r}; expected 'impulse_white',"
                f" 'salt_pepper', or 'gaussian'"
            )
        if not (
            math.isfinite(self.density) and 0.0 <= self.density <= 1.0
        ):
            raise ArgumentError(
                f"noise density must lie in [0, 1], got {self.density!r}"
            )
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ArgumentError(
                f"noise sigma must be >= 0, got {self.sigma!r}"
            )

    @classmethod
    def from_token(cls, token: str, seed: int = 0) -> "NoiseSpec":
        """Parse ``"impulse:<d>"``, ``"salt_pepper:<d>"``, or ``"gaussian:<s>"``.

        ``impulse`` is the short form of ``impulse_white``.
        """
        name, sep, arg = token.partition(":")
        if not sep:
            raise ConfigurationError(
                f"noise token {token!r} needs a parameter, e.g. 'impulse:0.05'"
            )
        try:
            value = float(arg)
        except ValueError:
            raise ConfigurationError(
                f"invalid noise parameter {arg!r} in token {token!r}"
            ) from None
        if name in ("impulse", "impulse_white"):
            return cls("impulse_white", density=value, seed=seed)
        if name == "salt_pepper":
            return cls("salt_pepper", density=value, seed=seed)
        if name == "gaussian":
            return cls("gaussian", sigma=value, seed=seed)
        raise ConfigurationError(f"unknown noise kind {name!r}")


_UNIT_SQUARE = BoxDomain.unit(2)


def _require_unmasked(img: Image, op: str) -> None:
    if img.mask is not None:
        raise ArgumentError(f"{op} requires an unmasked image")


def _positive_int(value, name: str) -> int:
    iv = int(value)
    if iv != value or iv < 1:
        raise ArgumentError(f"{name} must be a positive integer, got {value!r}")
    return iv


def _finalize_range(values: np.ndarray) -> np.ndarray:
    """Normalize raw operator output to ``[0, 1]``.

    The operator output is a convex combination of input pixels, so it can
    leave ``[0, 1]`` only by floating-point dust; that dust is clamped.  If
    a raw output ever exceeded the band by more than ``1e-12`` it would be
    affinely stretched onto ``[0, 1]`` instead — a min-max renormalization
    that is the identity in every regular case, keeping constant images and
    PSNR comparisons exact.
    """
    mn = float(values.min())
    mx = float(values.max())
    if mn >= -_RANGE_TOLERANCE and mx <= 1.0 + _RANGE_TOLERANCE:
        return np.clip(values, 0.0, 1.0)
    return (values - mn) / (mx - mn)


def reconstruct(img: Image, kernel, n: int, m: int = 4) -> Image:
    """Resample an image through the order-``n`` Kantorovich operator.

    Parameters
    ----------
    img : Image
        Unmasked input.
    kernel : DensityKernel or str
    n : int
        Operator order; larger orders resolve finer detail.
    m : int
        Midpoint subsamples per cell axis (default 4).

    Returns
    -------
    Image
        Same dimensions, values normalized to ``[0, 1]``.
    """
    _require_unmasked(img, "reconstruct")
    n = _positive_int(n, "n")
    m = _positive_int(m, "m")
    kern = make_kernel(kernel)
    field = step_field(img.pixels, _UNIT_SQUARE)
    coeffs = cell_averages(field, n, m)
    values = evaluate_on_grid(coeffs, kern, img.pixels.shape)
    return Image(_finalize_range(values))


def make_mask(height: int, width: int, fraction: float, seed: int):
    """Draw a validity mask with an exact count of invalid pixels.

    Exactly ``round(fraction * height * width)`` pixels are marked invalid
    (``False``), chosen by a seeded Fisher-Yates permutation of the
    row-major index list, so the mask is deterministic per seed and the
    invalid count is seed-independent.

    Parameters
    ----------
    height, width : int
    fraction : float
        Invalid fraction in ``[0, 1]``.
    seed : int

    Returns
    -------
    numpy.ndarray
        Boolean array of shape ``(height, width)``; ``True`` = valid.
    """
    height = _positive_int(height, "height")
    width = _positive_int(width, "width")
    fraction = float(fraction)
    if not (math.isfinite(fraction) and 0.0 <= fraction <= 1.0):
        raise ArgumentError(
            f"fraction must lie in [0, 1], got {fraction!r}"
        )
    count = round(fraction * height * width)
    rng = np.random.default_rng(seed)
    flat = np.ones(height * width, dtype=bool)
    flat[rng.permutation(height * width)[:count]] = False
    return flat.reshape(height, width)


def inpaint(img: Image, kernel, n: int, m: int = 4) -> Image:
    """Fill the invalid pixels of a masked image from the valid ones.

    Valid pixels pass through bit-for-bit.  Invalid pixels receive the
    Kantorovich estimate computed from valid samples only: inside each
    cell only valid subsamples are averaged, and cells without any valid
    subsample are dropped from both the numerator and the denominator of
    the operator.

    Parameters
    ----------
    img : Image
        Input with a validity mask (an unmasked image is returned as-is).
    kernel : DensityKernel or str
    n, m : int
        Operator parameters as in :func:`reconstruct`.

    Returns
    -------
    Image
        Unmasked result.

    Raises
    ------
    UnrecoverableMaskError
        If every pixel is invalid.
    """
    n = _positive_int(n, "n")
    m = _positive_int(m, "m")
    kern = make_kernel(kernel)
    if img.mask is None or bool(img.mask.all()):
        return Image(img.pixels.copy())
    if not bool(img.mask.any()):
        raise UnrecoverableMaskError(
            "every pixel is invalid; nothing to inpaint from"
        )
    interior = np.where(img.mask, img.pixels, np.nan)
    field = step_field(interior, _UNIT_SQUARE)
    coeffs = masked_cell_averages(field, n, m)
    estimate = evaluate_on_grid(coeffs, kern, img.pixels.shape)
    pixels = np.where(img.mask, img.pixels, np.clip(estimate, 0.0, 1.0))
    return Image(pixels)


def upscale(img: Image, kernel, n: int, m: int = 4, factor: int = 2) -> Image:
    """Evaluate the operator on a ``factor`` times finer pixel grid.

    Parameters
    ----------
    img : Image
        Unmasked input.
    kernel : DensityKernel or str
    n, m : int
        Operator parameters.
    factor : int
        Integer magnification, at least 1.

    Returns
    -------
    Image
        Dimensions ``(factor * height, factor * width)``.
    """
    _require_unmasked(img, "upscale")
    n = _positive_int(n, "n")
    m = _positive_int(m, "m")
    factor = _positive_int(factor, "factor")
    kern = make_kernel(kernel)
    field = step_field(img.pixels, _UNIT_SQUARE)
    coeffs = cell_averages(field, n, m)
    out_shape = (img.height * factor, img.width * factor)
    values = evaluate_on_grid(coeffs, kern, out_shape)
    return Image(_finalize_range(values))


def downsample(img: Image, factor: int = 2) -> Image:
    """Strided pixel selection starting at index ``factor - 1`` per axis.

    With 1-based indices this keeps rows/columns ``factor, 2*factor, ...``,
    so the output dimensions are ``floor(dim / factor)`` and
    ``downsample(upscale(img, factor), factor)`` restores the original
    dimensions exactly.

    Parameters
    ----------
    img : Image
        Unmasked input.
    factor : int
        Stride, at least 1 and no larger than either dimension.

    Returns
    -------
    Image
    """
    _require_unmasked(img, "downsample")
    factor = _positive_int(factor, "factor")
    if factor > img.height or factor > img.width:
        raise ArgumentError(
            f"factor {factor} exceeds the image dimensions "
            f"{img.height}x{img.width}"
        )
    return Image(img.pixels[factor - 1 :: factor, factor - 1 :: factor].copy())


def add_noise(img: Image, spec: NoiseSpec) -> Image:
    """Corrupt an image with a seeded noise model.

    ``impulse_white`` sets exactly ``round(density * N)`` pixels to 1.0;
    ``salt_pepper`` sets that many pixels to 0.0 or 1.0 with equal
    probability; ``gaussian`` adds i.i.d. ``N(0, sigma^2)`` to every pixel
    and clamps to ``[0, 1]``.  Affected positions come from a seeded
    permutation of the row-major indices, then value draws follow in the
    same stream, so outputs are bit-reproducible per seed.

    Parameters
    ----------
    img : Image
        Unmasked input.
    spec : NoiseSpec

    Returns
    -------
    Image
    """
    _require_unmasked(img, "add_noise")
    rng = np.random.default_rng(spec.seed)
    pixels = img.pixels.copy()
    total = pixels.size
    if spec.kind == "gaussian":
        noisy = pixels + rng.normal(0.0, spec.sigma, pixels.shape)
        return Image(np.clip(noisy, 0.0, 1.0))
    count = round(spec.density * total)
    positions = rng.permutation(total)[:count]
    flat = pixels.reshape(-1)
    if spec.kind == "impulse_white":
        flat[positions] = 1.0
    else:
        flat[positions] = rng.integers(0, 2, size=count).astype(np.float64)
    return Image(pixels)


def denoise(noisy: Image, kernel, n: int, m: int = 4) -> Image:
    """Smooth a noisy image with the Kantorovich operator.

    Structurally identical to :func:`reconstruct` applied to the noisy
    image: the cell averaging suppresses isolated outliers, so moderate
    orders trade detail against noise.

    Parameters
    ----------
    noisy : Image
        Unmasked noisy input.
    kernel : DensityKernel or str
    n, m : int
        Operator parameters.

    Returns
    -------
    Image
    """
    return reconstruct(noisy, kernel, n, m)


def peaks_field(grid: int) -> GridFunction:
    """Sample the classical peaks surface on ``[-3, 3]^2``.

    ``z(x, y) = 3 (1-x)^2 e^{-x^2-(y+1)^2}
    - 10 (x/5 - x^3 - y^5) e^{-x^2-y^2} - (1/3) e^{-(x+1)^2-y^2}``
    evaluated on the inclusive uniform ``grid x grid`` lattice.

    Parameters
    ----------
    grid : int
        Points per axis, at least 2.

    Returns
    -------
    GridFunction
    """
    grid = int(grid)
    if grid < 2:
        raise ArgumentError(f"grid must be >= 2, got {grid}")
    axis = np.linspace(-3.0, 3.0, grid)
    x = axis[None, :]
    y = axis[:, None]
    z = (
        3.0 * (1.0 - x) ** 2 * np.exp(-(x**2) - (y + 1.0) ** 2)
        - 10.0 * (x / 5.0 - x**3 - y**5) * np.exp(-(x**2) - y**2)
        - (1.0 / 3.0) * np.exp(-((x + 1.0) ** 2) - y**2)
    )
    domain = BoxDomain((-3.0, -3.0), (3.0, 3.0))
    return GridFunction(domain, np.broadcast_to(z, (grid, grid)).copy())


def spatial_filter(
    data, kind: str, *, sigma: float | None = None, window: int | None = None
):
    """Baseline smoothing filters on an image or a 2-D grid function.

    Parameters
    ----------
    data : Image or GridFunction
        2-D input; the return type matches the input type.
    kind : str
        ``"gaussian"`` (separable convolution with a discrete Gaussian
        truncated at radius ``ceil(3 sigma)`` and renormalized to unit sum)
        or ``"median"`` (square-window median).  Both use replicate padding
        at the borders.
    sigma : float
        Gaussian standard deviation, required positive for ``"gaussian"``.
    window : int
        Median window size, required odd and >= 3 for ``"median"``.

    Returns
    -------
    Image or GridFunction
    """
    if isinstance(data, Image):
        _require_unmasked(data, "spatial_filter")
        values = data.pixels
    elif isinstance(data, GridFunction):
        if data.domain.ndim != 2:
            raise ArgumentError(
                "spatial_filter supports 2-D grid functions only"
            )
        values = data.values
    else:
        raise ArgumentError(
            f"expected an Image or GridFunction, got {type(data).__name__}"
        )
    if kind == "gaussian":
        if sigma is None or not (math.isfinite(sigma) and sigma > 0):
            raise ArgumentError(
                f"gaussian filter needs sigma > 0, got {sigma!r}"
            )
        radius = math.ceil(3.0 * sigma)
        taps = np.exp(
            -(np.arange(-radius, radius + 1, dtype=np.float64) ** 2)
            / (2.0 * sigma**2)
        )
        taps /= taps.sum()
        out = correlate1d(values, taps, axis=0, mode="nearest")
        out = correlate1d(out, taps, axis=1, mode="nearest")
    elif kind == "median":
        if window is None or int(window) != window or window < 3:
            raise ArgumentError(
                f"median filter needs an odd integer window >= 3, "
                f"got {window!r}"
            )
        if window % 2 == 0:
            raise ArgumentError(
                f"median filter window must be odd, got {window}"
            )
        out = median_filter(values, size=int(window), mode="nearest")
    else:
        raise ConfigurationError(
            f"unknown filter kind {kind!r}; expected 'gaussian' or 'median'"
        )
    if isinstance(data, Image):
        return Image(np.clip(out, 0.0, 1.0))
    return GridFunction(data.domain, out)


def _example1(u1, u2):
    return np.exp(-70.0 * ((u1 - 0.3) ** 2 + (u2 - 0.5) ** 2)) + np.exp(
        -70.0 * ((u1 - 0.7) ** 2 + (u2 - 0.5) ** 2)
    )


def _example2(u1, u2):
    rad = np.sqrt((u1 - 0.5) ** 2 + (u2 - 0.5) ** 2)
    return np.sin(15.0 * rad) / (1.0 + 10.0 * rad)


def example_field(which: str) -> ScalarField:
    """The two closed-form benchmark fields on the unit square.

    ``"example1"`` is a pair of sharp Gaussian bumps::

        f(u1, u2) = exp(-70 ((u1-0.3)^2 + (u2-0.5)^2))
                  + exp(-70 ((u1-0.7)^2 + (u2-0.5)^2))

    ``"example2"`` is a radial ripple with a cusp at the center::

        f(u1, u2) = sin(15 rad) / (1 + 10 rad),
        rad = sqrt((u1-0.5)^2 + (u2-0.5)^2)

    Parameters
    ----------
    which : str
        ``"example1"`` or ``"example2"``.

    Returns
    -------
    ScalarField
        Exact closed-form field on ``[0, 1]^2``.
    """
    if which == "example1":
        return ScalarField(_example1, _UNIT_SQUARE)
    if which == "example2":
        return ScalarField(_example2, _UNIT_SQUARE)
    raise ArgumentError(
        f"unknown benchmark field {which!r}; expected 'example1' or "
        f"'example2'"
    )
