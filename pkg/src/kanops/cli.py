"""Command-line interface: approximation tables, image pipelines, norm studies.

Three subcommands cover every experiment the library supports:

``kanops approx``
    Apply the operator to one of the built-in benchmark fields for a list
    of orders and tabulate sup errors, mixed-norm errors, and Orlicz
    modular errors.

``kanops image``
    Run one of the image pipelines (reconstruct, inpaint, scale, denoise)
    on a PGM file, writing output images and a quality-metric CSV.

``kanops compare-norms``
    Reproduce the diagonal-versus-mixed norm comparison on the seeded
    peaks-plus-noise-plus-filter pipeline or on a noisy filtered image.

Exit codes: 0 on success, 1 for I/O or runtime computation failures, 2 for
usage and validation errors.  All randomness is seeded; identical flags
produce byte-identical artifacts.

The environment variable ``KANOPS_THREADS`` caps the BLAS/OpenMP thread
pools (it must be set before numpy is first imported, which this module
guarantees for console-script invocations); it affects speed only, never
results.
"""

from __future__ import annotations

import argparse
import os
import sys

_threads = os.environ.get("KANOPS_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)

import math
from dataclasses import dataclass, field

import numpy as np

from . import imaging, io, metrics
from .errors import (
    ArgumentError,
    ConfigurationError,
    KanopsError,
    NumericError,
    PgmError,
    UnrecoverableMaskError,
)
from .imaging import Image, NoiseSpec
from .kernels import make_kernel
from .normspaces import (
    MixedExponents,
    OrliczVector,
    mixed_lebesgue_error,
    mixed_lebesgue_norm,
    mixed_orlicz_modular,
    sup_error,
)
from .operator import BoxDomain, GridFunction, kantorovich_apply_grid

__all__ = ["RunConfig", "cmd_approx", "cmd_image", "cmd_compare_norms", "main"]


@dataclass
class RunConfig:
    """Validated bundle of one CLI invocation's parameters."""

    command: str
    kernel: str = "tanh"
    n_list: tuple[int, ...] = ()
    m: int = 4
    grid: int = 128
    seed: int = 0
    lam: float = 1.0
    function: str | None = None
    norms: tuple[tuple[float, ...], ...] = ()
    orlicz: tuple[str, ...] = ()
    task: str | None = None
    input: str | None = None
    out: str | None = None
    metrics_out: str | None = None
    noisy_out: str | None = None
    roundtrip_out: str | None = None
    mask_fraction: float = 0.21
    noise: str | None = None
    filter: str = "gaussian:1"
    factor: int = 2
    source: str = "peaks"
    p1_list: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8)
    pgm_format: str = "P5"


def _parse_int_list(token: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in token.split(",") if part)
    except ValueError:
        raise ConfigurationError(f"invalid {what} list {token!r}") from None
    if not values or any(v < 1 for v in values):
        raise ConfigurationError(
            f"{what} list must contain positive integers, got {token!r}"
        )
    return values


def _parse_norm_tuples(token: str) -> tuple[tuple[float, ...], ...]:
    groups = [g for g in token.split(";") if g]
    return tuple(MixedExponents.from_token(g).p for g in groups)


def _parse_orlicz_list(token: str) -> tuple[str, ...]:
    groups = [g for g in token.split(";") if g]
    for g in groups:
        OrliczVector.from_token(g)  # validate early
    return tuple(groups)


def _exponent_label(p: float) -> str:
    return f"{int(p)}" if float(p).is_integer() else f"{p:g}"


def _field_on_grid(fld, shape) -> GridFunction:
    """Sample a field on the inclusive uniform grid of its domain."""
    domain = fld.domain
    r = domain.ndim
    axes = [
        np.linspace(domain.lower[j], domain.upper[j], shape[r - 1 - j])
        for j in range(r)
    ]
    mesh = np.meshgrid(*axes[::-1], indexing="ij", sparse=True)
    values = np.broadcast_to(fld(*mesh[::-1]), tuple(shape)).copy()
    return GridFunction(domain, values)


def cmd_approx(config: RunConfig) -> list[dict]:
    """Tabulate approximation errors of the operator on a benchmark field.

    One row per order ``n`` with the sup error and, when requested, each
    mixed-Lebesgue error and each Orlicz modular error, all measured
    between the closed-form field and the operator output on the same
    ``grid x grid`` evaluation lattice.  The table is written to
    ``config.out`` when set, and returned.
    """
    fld = imaging.example_field(config.function)
    kern = make_kernel(config.kernel)
    if not config.n_list:
        raise ConfigurationError("approx requires at least one order via --n")
    shape = (config.grid, config.grid)
    reference = _field_on_grid(fld, shape)
    norm_tuples = [MixedExponents(p) for p in config.norms]
    for P in norm_tuples:
        if any(b < a for a, b in zip(P.p, P.p[1:])):
            print(
                f"warning: exponent tuple {P.p} is decreasing; the "
                f"Orlicz-coincidence interpretation assumes non-decreasing "
                f"tuples",
                file=sys.stderr,
            )
    orlicz_vectors = [OrliczVector.from_token(t) for t in config.orlicz]
    rows = []
    for n in config.n_list:
        approx = kantorovich_apply_grid(fld, kern, n, config.m, shape)
        row = {
            "n": n,
            "Max absolute error": sup_error(reference, approx),
        }
        for P in norm_tuples:
            label = ",".join(_exponent_label(p) for p in P.p)
            row[f"Mixed L^({label})-error"] = mixed_lebesgue_error(
                reference, approx, P
            )
        difference = GridFunction(
            reference.domain, reference.values - approx.values
        )
        for token, vector in zip(config.orlicz, orlicz_vectors):
            row[f"Modular error [{token}] (lambda={config.lam:g})"] = (
                mixed_orlicz_modular(difference, vector, config.lam)
            )
        rows.append(row)
    if config.out:
        io.write_table(rows, config.out)
    return rows


def _quantized(img: Image) -> np.ndarray:
    """Pixels as they will appear after 8-bit encoding."""
    return np.round(np.clip(img.pixels, 0.0, 1.0) * 255.0) / 255.0


def _report_row(reference: Image, result: Image) -> dict:
    report = metrics.quality_report(
        _quantized(reference), _quantized(result), max_value=1.0
    )
    return {"mse": report.mse, "psnr_db": report.psnr_db, "ssim": report.ssim}


def cmd_image(config: RunConfig) -> dict:
    """Run one image pipeline and write its artifacts.

    Writes the output PGM to ``config.out``, optional side artifacts
    (``--noisy-out``, ``--roundtrip-out``), and a one-row metrics CSV to
    ``config.metrics_out``.  Metrics are computed on 8-bit-quantized
    pixels — exactly what the written files contain — against the clean
    input (for ``scale``: between the input and the re-downsampled
    output).  Returns the metrics row.
    """
    if not config.input:
        raise ConfigurationError("image requires --input")
    original = io.load_pgm(config.input)
    kern = make_kernel(config.kernel)
    if not config.n_list:
        raise ConfigurationError("image requires an order via --n")
    if len(config.n_list) != 1:
        raise ConfigurationError(
            f"image takes exactly one order, got {config.n_list}"
        )
    n = config.n_list[0]
    task = config.task
    if task == "reconstruct":
        result = imaging.reconstruct(original, kern, n, config.m)
        reference = original
    elif task == "inpaint":
        mask = imaging.make_mask(
            original.height, original.width, config.mask_fraction, config.seed
        )
        result = imaging.inpaint(
            Image(original.pixels, mask), kern, n, config.m
        )
        reference = original
    elif task == "scale":
        upscaled = imaging.upscale(
            original, kern, n, config.m, factor=config.factor
        )
        roundtrip = imaging.downsample(upscaled, config.factor)
        if config.roundtrip_out:
            io.save_pgm(roundtrip, config.roundtrip_out, config.pgm_format)
        result, reference = upscaled, original
        row = _report_row(original, roundtrip)
    elif task == "denoise":
        if config.noise:
            spec = NoiseSpec.from_token(config.noise, seed=config.seed)
            noisy = imaging.add_noise(original, spec)
        else:
            noisy = original
        if config.noisy_out:
            io.save_pgm(noisy, config.noisy_out, config.pgm_format)
        result = imaging.denoise(noisy, kern, n, config.m)
        reference = original
    else:
        raise ConfigurationError(
            f"unknown image task {task!r}; expected reconstruct, inpaint, "
            f"scale, or denoise"
        )
    if task != "scale":
        row = _report_row(reference, result)
    if config.out:
        io.save_pgm(result, config.out, config.pgm_format)
    if config.metrics_out:
        io.write_table([row], config.metrics_out)
    return row


def _parse_filter(token: str):
    name, sep, arg = token.partition(":")
    if not sep:
        raise ConfigurationError(
            f"filter token {token!r} needs a parameter, e.g. 'gaussian:1'"
        )
    if name == "gaussian":
        try:
            sigma = float(arg)
        except ValueError:
            raise ConfigurationError(
                f"invalid gaussian sigma {arg!r}"
            ) from None
        return lambda gf: imaging.spatial_filter(gf, "gaussian", sigma=sigma)
    if name == "median":
        try:
            window = int(arg)
        except ValueError:
            raise ConfigurationError(
                f"invalid median window {arg!r}"
            ) from None
        return lambda gf: imaging.spatial_filter(gf, "median", window=window)
    raise ConfigurationError(f"unknown filter kind {name!r}")


def cmd_compare_norms(config: RunConfig) -> list[dict]:
    """Compare diagonal and mixed Lebesgue errors of a denoising residual.

    Builds clean data (the peaks surface, or a PGM image), corrupts it with
    the seeded noise model, smooths it with the requested filter, and
    tabulates ``L^(p1,p1)``, ``L^(p1,p1+1)``, ``L^(p1,p1+2)`` errors
    between the clean and smoothed data for each ``p1``.  Following the
    convention of this experiment, norms are taken in pixel-index measure
    (unit grid spacing).  The table is written to ``config.out`` when set,
    and returned.
    """
    apply_filter = _parse_filter(config.filter)
    if config.source == "peaks":
        clean_gf = imaging.peaks_field(config.grid)
        clean = clean_gf.values
        if config.noise is None:
            noisy = clean.copy()
        else:
            spec = NoiseSpec.from_token(config.noise, seed=config.seed)
            if spec.kind != "gaussian":
                raise ConfigurationError(
                    "peaks data supports gaussian noise only (impulse "
                    "kinds are defined for [0,1] images)"
                )
            rng = np.random.default_rng(spec.seed)
            noisy = clean + rng.normal(0.0, spec.sigma, clean.shape)
        smoothed = apply_filter(GridFunction(clean_gf.domain, noisy)).values
    elif config.source == "image":
        if not config.input:
            raise ConfigurationError("source=image requires --input")
        original = io.load_pgm(config.input)
        clean = original.pixels
        if config.noise is None:
            noisy_img = original
        else:
            spec = NoiseSpec.from_token(config.noise, seed=config.seed)
            noisy_img = imaging.add_noise(original, spec)
        smoothed = apply_filter(noisy_img).pixels
    else:
        raise ConfigurationError(
            f"unknown source {config.source!r}; expected 'peaks' or 'image'"
        )
    height, width = clean.shape
    index_domain = BoxDomain((0.0, 0.0), (float(width), float(height)))
    residual = GridFunction(index_domain, clean - smoothed)
    rows = []
    for p1 in config.p1_list:
        row = {"p1": p1}
        for label, p2 in (
            ("L^(p1,p1)", p1),
            ("L^(p1,p1+1)", p1 + 1),
            ("L^(p1,p1+2)", p1 + 2),
        ):
            row[label] = mixed_lebesgue_norm(
                residual, MixedExponents((float(p1), float(p2)))
            )
        rows.append(row)
    if config.out:
        io.write_table(rows, config.out)
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kanops",
        description=(
            "Kantorovich neural-network operators: function approximation "
            "tables, image pipelines, and mixed-norm studies."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    approx = sub.add_parser(
        "approx", help="tabulate approximation errors on a benchmark field"
    )
    approx.add_argument(
        "--function",
        required=True,
        choices=("example1", "example2"),
        help="benchmark field to approximate",
    )
    approx.add_argument("--kernel", default="tanh", help="kernel token")
    approx.add_argument(
        "--n", required=True, help="comma-separated operator orders"
    )
    approx.add_argument(
        "--m", type=int, default=4, help="midpoint subsamples per cell axis"
    )
    approx.add_argument(
        "--grid", type=int, default=128, help="evaluation grid points per axis"
    )
    approx.add_argument(
        "--norms",
        default="",
        help="semicolon-separated exponent tuples, e.g. '2,3;4,6'",
    )
    approx.add_argument(
        "--orlicz",
        default="",
        help=(
            "semicolon-separated Orlicz vectors of comma-joined tokens, "
            "e.g. 'exp:2,log:2:1.7'"
        ),
    )
    approx.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=1.0,
        help="scaling of the modular argument",
    )
    approx.add_argument("--out", help="CSV output path")

    image = sub.add_parser("image", help="run an image pipeline on a PGM file")
    image.add_argument(
        "--task",
        required=True,
        choices=("reconstruct", "inpaint", "scale", "denoise"),
    )
    image.add_argument("--input", required=True, help="input PGM path")
    image.add_argument("--out", help="output PGM path")
    image.add_argument("--metrics-out", help="metrics CSV path")
    image.add_argument("--kernel", default="tanh", help="kernel token")
    image.add_argument("--n", required=True, help="operator order")
    image.add_argument(
        "--m", type=int, default=4, help="midpoint subsamples per cell axis"
    )
    image.add_argument(
        "--mask-fraction",
        type=float,
        default=0.21,
        help="invalid-pixel fraction for inpaint",
    )
    image.add_argument(
        "--noise",
        help="noise token for denoise, e.g. 'impulse:0.05' or 'gaussian:0.3'",
    )
    image.add_argument(
        "--noisy-out", help="optional path for the corrupted image (denoise)"
    )
    image.add_argument(
        "--factor", type=int, default=2, help="integer scale factor"
    )
    image.add_argument(
        "--roundtrip-out",
        help="optional path for the re-downsampled image (scale)",
    )
    image.add_argument("--seed", type=int, default=0, help="RNG seed")
    image.add_argument(
        "--format",
        dest="pgm_format",
        default="P5",
        choices=("P2", "P5"),
        help="PGM encoding for written images",
    )

    compare = sub.add_parser(
        "compare-norms",
        help="compare diagonal vs mixed norm errors of a denoising residual",
    )
    compare.add_argument(
        "--source", default="peaks", choices=("peaks", "image")
    )
    compare.add_argument("--input", help="input PGM (source=image)")
    compare.add_argument(
        "--grid", type=int, default=148, help="peaks grid points per axis"
    )
    compare.add_argument(
        "--noise", help="noise token, e.g. 'gaussian:0.3' or 'salt_pepper:0.05'"
    )
    compare.add_argument(
        "--filter",
        default="gaussian:1",
        help="smoothing filter token: 'gaussian:<sigma>' or 'median:<window>'",
    )
    compare.add_argument(
        "--p1", default="2,3,4,5,6,7,8", help="comma-separated inner exponents"
    )
    compare.add_argument("--seed", type=int, default=0, help="RNG seed")
    compare.add_argument("--out", help="CSV output path")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(command=args.command)
    if args.command == "approx":
        config.function = args.function
        config.kernel = args.kernel
        config.n_list = _parse_int_list(args.n, "order")
        config.m = _require_positive(args.m, "--m")
        config.grid = _require_min(args.grid, 2, "--grid")
        config.norms = _parse_norm_tuples(args.norms) if args.norms else ()
        config.orlicz = _parse_orlicz_list(args.orlicz) if args.orlicz else ()
        if not (math.isfinite(args.lam) and args.lam > 0):
            raise ConfigurationError(
                f"--lambda must be finite and > 0, got {args.lam}"
            )
        config.lam = args.lam
        config.out = args.out
    elif args.command == "image":
        config.task = args.task
        config.input = args.input
        config.out = args.out
        config.metrics_out = args.metrics_out
        config.kernel = args.kernel
        config.n_list = _parse_int_list(args.n, "order")
        config.m = _require_positive(args.m, "--m")
        if not (0.0 <= args.mask_fraction <= 1.0):
            raise ConfigurationError(
                f"--mask-fraction must lie in [0, 1], got {args.mask_fraction}"
            )
        config.mask_fraction = args.mask_fraction
        config.noise = args.noise
        config.noisy_out = args.noisy_out
        config.factor = _require_positive(args.factor, "--factor")
        config.roundtrip_out = args.roundtrip_out
        config.seed = args.seed
        config.pgm_format = args.pgm_format
    else:
        config.source = args.source
        config.input = args.input
        config.grid = _require_min(args.grid, 2, "--grid")
        config.noise = args.noise
        config.filter = args.filter
        config.p1_list = _parse_int_list(args.p1, "p1")
        config.seed = args.seed
        config.out = args.out
    return config


def _require_positive(value: int, what: str) -> int:
    if value < 1:
        raise ConfigurationError(f"{what} must be >= 1, got {value}")
    return value


def _require_min(value: int, minimum: int, what: str) -> int:
    if value < minimum:
        raise ConfigurationError(f"{what} must be >= {minimum}, got {value}")
    return value


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        if config.command == "approx":
            cmd_approx(config)
        elif config.command == "image":
            cmd_image(config)
        else:
            cmd_compare_norms(config)
    except (ConfigurationError, ArgumentError) as exc:
        print(f"kanops: error: {exc}", file=sys.stderr)
        return 2
    except (PgmError, OSError) as exc:
        print(f"kanops: i/o error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, UnrecoverableMaskError, KanopsError) as exc:
        print(f"kanops: runtime error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
