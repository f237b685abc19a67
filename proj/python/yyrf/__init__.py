# Copyright 2026 The yyrf Authors
# SPDX-License-Identifier: Apache-2.0
"""Radiance fields on a Yin-Yang spherical grid."""

from ._yyrf import (
    GridConfig,
    InputError,
    IoError,
    RadianceField,
    composite,
    hit_cv,
    load_images,
    locate,
    pixel_ray,
    psnr,
    run_cli,
    set_thread_count,
    spherical_weights,
    ssim,
    synth_dataset,
    ws_psnr,
    ws_ssim,
)

__all__ = [
    "GridConfig",
    "InputError",
    "IoError",
    "RadianceField",
    "composite",
    "hit_cv",
    "load_images",
    "locate",
    "pixel_ray",
    "psnr",
    "run_cli",
    "set_thread_count",
    "spherical_weights",
    "ssim",
    "synth_dataset",
    "ws_psnr",
    "ws_ssim",
]
