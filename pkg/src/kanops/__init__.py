"""Kantorovich neural-network operators with mixed-norm error analysis.

The package approximates multivariate functions by sampling-Kantorovich
operators built from sigmoidal density kernels, measures errors in
mixed-norm Lebesgue and Orlicz spaces, and applies the operator to
grayscale-image reconstruction, inpainting, scaling, and denoising.

Submodules
----------
kernels
    Sigmoidal activations and their density kernels.
operator
    Domains, grid functions, cell averages, and the operator itself.
normspaces
    Mixed Lebesgue norms, Orlicz modulars, and Luxemburg norms.
metrics
    MSE / PSNR / global SSIM quality measures.
imaging
    Image pipelines, noise models, spatial filters, benchmark fields.
io
    PGM image files and CSV tables.
cli
    The ``kanops`` command-line interface.

Attribute access is lazy: importing :mod:`kanops` does not import numpy
until a symbol is touched, so the CLI can pin thread-pool environment
variables first.
"""

from __future__ import annotations

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    # errors
    "KanopsError": "errors",
    "ConfigurationError": "errors",
    "ArgumentError": "errors",
    "ConjugateInfiniteError": "errors",
    "NumericError": "errors",
    "DegenerateKernelError": "errors",
    "UnrecoverableMaskError": "errors",
    "PgmError": "errors",
    # kernels
    "SigmoidKind": "kernels",
    "DensityKernel": "kernels",
    "make_kernel": "kernels",
    "sigmoid_eval": "kernels",
    "density_eval": "kernels",
    "density_product": "kernels",
    "density_l1": "kernels",
    # operator
    "BoxDomain": "operator",
    "ScalarField": "operator",
    "GridFunction": "operator",
    "CellAverageTensor": "operator",
    "step_field": "operator",
    "cell_averages": "operator",
    "masked_cell_averages": "operator",
    "kantorovich_eval": "operator",
    "evaluate_on_grid": "operator",
    "kantorovich_apply_grid": "operator",
    # normspaces
    "MixedExponents": "normspaces",
    "OrliczFunction": "normspaces",
    "OrliczVector": "normspaces",
    "mixed_lebesgue_norm": "normspaces",
    "mixed_lebesgue_error": "normspaces",
    "orlicz_phi_eval": "normspaces",
    "mixed_orlicz_modular": "normspaces",
    "luxemburg_norm": "normspaces",
    "sup_error": "normspaces",
    "HolderReport": "normspaces",
    "holder_check": "normspaces",
    # metrics
    "QualityReport": "metrics",
    "mse": "metrics",
    "psnr": "metrics",
    "ssim_global": "metrics",
    "quality_report": "metrics",
    # imaging
    "Image": "imaging",
    "NoiseSpec": "imaging",
    "reconstruct": "imaging",
    "make_mask": "imaging",
    "inpaint": "imaging",
    "upscale": "imaging",
    "downsample": "imaging",
    "add_noise": "imaging",
    "denoise": "imaging",
    "peaks_field": "imaging",
    "spatial_filter": "imaging",
    "example_field": "imaging",
    # io
    "PgmHeader": "io",
    "load_pgm": "io",
    "save_pgm": "io",
    "write_table": "io",
    "sample_image_path": "io",
}

__all__ = ["__version__", *sorted(_EXPORTS)]


def __getattr__(name: str):
    module_name = _EXPORTS.get(name)
    if module_name is None:
        raise AttributeError(f"module 'kanops' has no attribute {name!r}")
    module = importlib.import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
