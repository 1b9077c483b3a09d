"""Spectral and spatial quality metrics for fused products.

Spectral metrics (DI, SNR, NRMSE) compare each fused band to the resampled
original MS band; spatial metrics (FCC, HPDI, CSA) compare it to the PAN
image. Pixels whose denominator is zero are excluded from the ratio-based
means and counted, rather than poisoning the average; a perfect SNR is
reported as the +infinity sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .filtering import laplacian_hp
from .raster import MultiBandImage, Raster

__all__ = [
    "MetricRecord",
    "METRIC_ORDER",
    "deviation_index",
    "snr",
    "nrmse",
    "pearson",
    "fcc",
    "hpdi",
    "csa",
    "evaluate_all",
]

METRIC_ORDER = ("DI", "SNR", "NRMSE", "FCC", "HPDI", "CSA_edge", "CSA_homog")

DEFAULT_CSA_PERCENTILE = 90.0


@dataclass(frozen=True)
class MetricRecord:
    """One report row: a metric value for (pair, method, band).

    ``band`` is a 1-based index or the string "avg"; ``excluded_pixels``
    counts denominator-zero pixels skipped by ratio metrics (and, on the
    SNR "avg" row, infinite bands left out of the average).
    """

    pair_id: str
    method: str
    band: Union[int, str]
    metric: str
    value: float
    excluded_pixels: int = 0


def _check_dims(a: Raster, b: Raster, op: str) -> None:
    if a.width != b.width or a.height != b.height:
        raise ValueError(
            f"{op}: dimensions differ ({a.width}x{a.height} vs {b.width}x{b.height})"
        )


def deviation_index(f: Raster, m: Raster) -> tuple[float, int]:
    """Mean of |f - m| / m over pixels where m is nonzero.

    Returns (value, excluded) where excluded counts the skipped m == 0
    pixels. Raises if every pixel is excluded.
    """
    _check_dims(f, m, "deviation_index")
    valid = m.samples != 0.0
    excluded = int(m.samples.size - np.count_nonzero(valid))
    if excluded == m.samples.size:
        raise ValueError("undefined DI: reference band is zero everywhere")
    ratios = np.abs(f.samples[valid] - m.samples[valid]) / m.samples[valid]
    return float(np.mean(ratios)), excluded


def snr(f: Raster, m: Raster) -> float:
    """sqrt(sum f^2 / sum (f - m)^2); +inf when the error energy is zero."""
    _check_dims(f, m, "snr")
    noise = float(np.sum((f.samples - m.samples) ** 2))
    if noise == 0.0:
        return math.inf
    return math.sqrt(float(np.sum(f.samples ** 2)) / noise)


def nrmse(f: Raster, m: Raster) -> float:
    """Root mean square error normalized by the 255 DN range."""
    _check_dims(f, m, "nrmse")
    return math.sqrt(float(np.mean((f.samples - m.samples) ** 2)) / 255.0 ** 2)


def pearson(a: Raster, b: Raster) -> float:
    """Population Pearson correlation; errors on a zero-variance input."""
    _check_dims(a, b, "pearson")
    x = a.samples.ravel()
    y = b.samples.ravel()
    dx = x - np.mean(x)
    dy = y - np.mean(y)
    sx = math.sqrt(float(np.mean(dx ** 2)))
    sy = math.sqrt(float(np.mean(dy ** 2)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("undefined correlation: zero-variance input")
    return float(np.mean(dx * dy)) / (sx * sy)


def fcc(fused_band: Raster, pan: Raster) -> float:
    """Correlation of the Laplacian high-pass planes of band and PAN;
    values near one indicate high spatial quality."""
    _check_dims(fused_band, pan, "fcc")
    return pearson(laplacian_hp(fused_band), laplacian_hp(pan))


def hpdi(fused_band: Raster, pan: Raster) -> tuple[float, int]:
    """High-pass deviation index.

    Mean of |HP(fused) - HP(pan)| / pan over pixels where the raw PAN
    value is nonzero (the raw value, not its high-pass plane, is the
    denominator). Returns (value, excluded).
    """
    _check_dims(fused_band, pan, "hpdi")
    valid = pan.samples != 0.0
    excluded = int(pan.samples.size - np.count_nonzero(valid))
    if excluded == pan.samples.size:
        raise ValueError("undefined HPDI: PAN is zero everywhere")
    diff = np.abs(laplacian_hp(fused_band).samples - laplacian_hp(pan).samples)
    return float(np.mean(diff[valid] / pan.samples[valid])), excluded


def _local_michelson(band: Raster) -> np.ndarray:
    h, w = band.height, band.width
    padded = np.pad(band.samples, 1, mode="edge")
    lo = padded[0:h, 0:w].copy()
    hi = padded[0:h, 0:w].copy()
    for du in range(3):
        for dv in range(3):
            window = padded[du:du + h, dv:dv + w]
            np.minimum(lo, window, out=lo)
            np.maximum(hi, window, out=hi)
    total = hi + lo
    with np.errstate(invalid="ignore", divide="ignore"):
        contrast = np.where(total == 0.0, 0.0, (hi - lo) / np.where(total == 0.0, 1.0, total))
    return contrast


def csa(
    band: Raster, pan: Raster, percentile: float = DEFAULT_CSA_PERCENTILE
) -> tuple[float, float]:
    """Contrast statistical analysis over edge and homogeneous regions.

    PAN pixels at or above the given percentile of Laplacian magnitude
    form the edge class, the rest the homogeneous class. The statistic
    for each class is the mean 3x3 local Michelson contrast
    (max - min) / (max + min) of ``band``, taken as 0 where max + min
    is zero.

    Returns:
        (edge_contrast, homogeneous_contrast)

    Raises:
        ValueError: if either class is empty (degenerate PAN).
    """
    _check_dims(band, pan, "csa")
    magnitude = np.abs(laplacian_hp(pan).samples)
    threshold = float(np.percentile(magnitude, percentile))
    edge_mask = magnitude >= threshold
    homog_mask = ~edge_mask
    if not edge_mask.any() or not homog_mask.any():
        raise ValueError("class empty: PAN edge classification is degenerate")
    contrast = _local_michelson(band)
    return float(np.mean(contrast[edge_mask])), float(np.mean(contrast[homog_mask]))


def _band_average(values: list[float]) -> tuple[float, int]:
    """Mean over bands; infinities are left out (and counted) so one
    perfect band does not swamp the average."""
    finite = [v for v in values if math.isfinite(v)]
    skipped = len(values) - len(finite)
    if not finite:
        return math.inf, skipped
    return sum(finite) / len(finite), skipped


def evaluate_all(
    ms: MultiBandImage,
    pan: Raster,
    fused: MultiBandImage,
    pair_id: str,
    method: str,
    csa_percentile: float = DEFAULT_CSA_PERCENTILE,
) -> list[MetricRecord]:
    """Compute every metric for every band of a fused product.

    ``ms`` must already be resampled to PAN's size and have the same
    band count as ``fused``. Emits one record per band per metric in a
    fixed order (bands ascending, then the "avg" rows); the "avg" row
    averages band values, with excluded-pixel counts summed for DI and
    HPDI and infinite bands dropped from (and counted on) the SNR row.
    """
    if fused.band_count != ms.band_count:
        raise ValueError(
            f"band count mismatch: fused {fused.band_count} vs ms {ms.band_count}"
        )
    if fused.width != pan.width or fused.height != pan.height:
        raise ValueError(
            f"fused {fused.width}x{fused.height} does not match "
            f"PAN {pan.width}x{pan.height}"
        )
    if ms.width != pan.width or ms.height != pan.height:
        raise ValueError(
            f"ms {ms.width}x{ms.height} does not match PAN {pan.width}x{pan.height} "
            "(resample first)"
        )

    records: list[MetricRecord] = []
    per_metric: dict[str, list[float]] = {name: [] for name in METRIC_ORDER}
    per_metric_excl: dict[str, list[int]] = {name: [] for name in METRIC_ORDER}

    for k, (fband, mband) in enumerate(zip(fused.bands, ms.bands), start=1):
        di_value, di_excl = deviation_index(fband, mband)
        snr_value = snr(fband, mband)
        nrmse_value = nrmse(fband, mband)
        fcc_value = fcc(fband, pan)
        hpdi_value, hpdi_excl = hpdi(fband, pan)
        edge_c, homog_c = csa(fband, pan, csa_percentile)

        band_values = {
            "DI": (di_value, di_excl),
            "SNR": (snr_value, 0),
            "NRMSE": (nrmse_value, 0),
            "FCC": (fcc_value, 0),
            "HPDI": (hpdi_value, hpdi_excl),
            "CSA_edge": (edge_c, 0),
            "CSA_homog": (homog_c, 0),
        }
        for name in METRIC_ORDER:
            value, excl = band_values[name]
            records.append(
                MetricRecord(pair_id, method, k, name, value, excl)
            )
            per_metric[name].append(value)
            per_metric_excl[name].append(excl)

    for name in METRIC_ORDER:
        if name == "SNR":
            avg, skipped = _band_average(per_metric[name])
            excl = skipped
        else:
            avg = sum(per_metric[name]) / len(per_metric[name])
            excl = sum(per_metric_excl[name])
        records.append(MetricRecord(pair_id, method, "avg", name, avg, excl))
    return records
