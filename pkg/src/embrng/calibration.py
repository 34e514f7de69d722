"""Fit the default noise parameters of the source models.

Each parameter is bisected until the min-entropy reported by
``entropy.full_report`` lands at the middle of its target band. The
results are frozen as the DEFAULT_* constants in ``sources``.
"""

from __future__ import annotations

import logging

from .entropy import full_report
from .sources import SramModel, TempModel, VloModel, sram_deviation_stream

log = logging.getLogger(__name__)

BANDS = {
    "vlo": (1.19, 1.6),
    "temp": (2.4, 3.4),
    "sram": (0.30, 0.65),
}
SAMPLES = 1_000_000
STARTUPS = 100


def measure_vlo(jitter_sigma: float, seed: int = 0, n: int = SAMPLES) -> float:
    return full_report(VloModel(jitter_sigma=jitter_sigma, seed=seed).samples(n)).min_entropy


def measure_temp(noise_sigma: float, seed: int = 0, n: int = SAMPLES) -> float:
    return full_report(TempModel(noise_sigma=noise_sigma, seed=seed).samples(n)).min_entropy


def measure_sram(bias_mix: float, seed: int = 0, startups: int = STARTUPS) -> float:
    images = SramModel.device(bias_mix=bias_mix, seed=seed).boots(startups)
    return full_report(sram_deviation_stream(images)).min_entropy


def _fit(measure, lo: float, hi: float, target: float, iters: int) -> float:
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        value = measure(mid)
        log.info("param=%.6g  min-entropy=%.4f", mid, value)
        if value < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate(iters: int = 12) -> dict:
    out = {}
    t = sum(BANDS["vlo"]) / 2
    out["jitter_sigma"] = _fit(measure_vlo, 1e-8, 2e-7, t, iters)
    t = sum(BANDS["temp"]) / 2
    out["temp_noise_sigma"] = _fit(measure_temp, 1.0, 16.0, t, iters)
    t = sum(BANDS["sram"]) / 2
    out["bias_mix"] = _fit(measure_sram, 0.05, 0.95, t, iters)
    return out
