"""Stochastic models of the three on-chip entropy sources and the harvest loop.

All simulation noise comes from a seeded numpy ``Generator`` so runs are
reproducible; it is independent of the generator under test.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .accumulator import EntropyEvent, PoolSet, elapsed_reseed_time
from .crc import SRAM_SIZE
from .entropy import SampleStream
from .generator import Generator

SRAM_BITS = SRAM_SIZE * 8

# Frozen by ``embrng calibrate`` (see calibration.py); mid-band targets.
DEFAULT_JITTER_SIGMA = 6.59e-08
DEFAULT_TEMP_NOISE_SIGMA = 6.76
DEFAULT_BIAS_MIX = 0.459
DEFAULT_UNSTABLE_FLIP_MAX = 0.3


def _rng(seed: int | None) -> np.random.Generator:
    if seed is None:
        # Exploration mode: OS entropy, not reproducible.
        return np.random.default_rng(int.from_bytes(os.urandom(16), "big"))
    return np.random.default_rng(seed)


class VloModel:
    """Very-low-power oscillator period measured against a fast clock.

    Each sample is the low byte of the fast-clock tick count of one
    oscillator period. ``wander_amplitude`` ramps the frequency linearly
    in simulated time.
    """

    source_kind = "vlo"

    def __init__(self, nominal_rate: float = 9500.0, fast_clock: float = 24e6,
                 jitter_sigma: float = DEFAULT_JITTER_SIGMA, wander_amplitude: float = 0.0,
                 seed: int | None = 0):
        if nominal_rate <= 0:
            raise ValueError("nominal_rate must be positive")
        if fast_clock < 1000 * nominal_rate:
            raise ValueError("fast_clock must be at least 1000x nominal_rate")
        if jitter_sigma < 0:
            raise ValueError("jitter_sigma must be non-negative")
        self.nominal_rate = nominal_rate
        self.fast_clock = fast_clock
        self.jitter_sigma = jitter_sigma
        self.wander_amplitude = wander_amplitude
        self.seed = seed
        self.rng = _rng(seed)
        self.index = 0

    @property
    def rate(self) -> float:
        return self.nominal_rate

    def periods(self, n: int) -> np.ndarray:
        """Next ``n`` period measurements as full tick counts."""
        k = np.arange(self.index, self.index + n)
        self.index += n
        freq = self.nominal_rate + self.wander_amplitude * (k / self.nominal_rate)
        period = 1.0 / freq + self.jitter_sigma * self.rng.standard_normal(n)
        return np.rint(period * self.fast_clock).astype(np.int64)

    def samples(self, n: int) -> np.ndarray:
        return (self.periods(n) & 0xFF).astype(np.uint8)

    def sample(self) -> int:
        return int(self.samples(1)[0])

    def to_dict(self) -> dict:
        return {"nominal_rate": self.nominal_rate, "fast_clock": self.fast_clock,
                "jitter_sigma": self.jitter_sigma, "wander_amplitude": self.wander_amplitude}


class TempModel:
    """Internal temperature sensor read through a 12-bit ADC; emits the low byte."""

    source_kind = "temp"

    def __init__(self, baseline_code: int = 1911, drift: float = 0.0,
                 noise_sigma: float = DEFAULT_TEMP_NOISE_SIGMA, sample_rate: float = 9500.0,
                 seed: int | None = 0):
        if not 0 <= baseline_code <= 4095:
            raise ValueError("baseline_code must fit in 12 bits")
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        self.baseline_code = baseline_code
        self.drift = drift
        self.noise_sigma = noise_sigma
        self.sample_rate = sample_rate
        self.seed = seed
        self.rng = _rng(seed)
        self.index = 0

    @property
    def rate(self) -> float:
        return self.sample_rate

    def codes(self, n: int) -> np.ndarray:
        t = np.arange(self.index, self.index + n) / self.sample_rate
        self.index += n
        raw = self.baseline_code + self.drift * t + self.noise_sigma * self.rng.standard_normal(n)
        return np.clip(np.rint(raw), 0, 4095).astype(np.int64)

    def samples(self, n: int) -> np.ndarray:
        return (self.codes(n) & 0xFF).astype(np.uint8)

    def sample(self) -> int:
        return int(self.samples(1)[0])

    def to_dict(self) -> dict:
        return {"baseline_code": self.baseline_code, "drift": self.drift,
                "noise_sigma": self.noise_sigma, "sample_rate": self.sample_rate}


class SramModel:
    """Per-cell probability of powering up as 1, sampled independently per boot."""

    source_kind = "sram"

    def __init__(self, cell_bias, seed: int | None = 0):
        bias = np.asarray(cell_bias, dtype=np.float64).ravel()
        if bias.size != SRAM_BITS:
            raise ValueError(f"cell_bias must have {SRAM_BITS} entries")
        if np.any((bias < 0) | (bias > 1)):
            raise ValueError("cell biases must lie in [0, 1]")
        self.cell_bias = bias
        self.seed = seed
        self.rng = _rng(seed)

    @classmethod
    def device(cls, device_seed: int = 0, bias_mix: float = DEFAULT_BIAS_MIX,
               unstable_flip_max: float = DEFAULT_UNSTABLE_FLIP_MAX,
               seed: int | None = 0) -> "SramModel":
        """A bimodal device: most cells always power up to a fixed fingerprint
        value, a ``bias_mix`` fraction flip away from it with probability drawn
        uniformly from [0, unstable_flip_max]."""
        if not 0 <= bias_mix <= 1:
            raise ValueError("bias_mix must lie in [0, 1]")
        if not 0 <= unstable_flip_max <= 0.5:
            raise ValueError("unstable_flip_max must lie in [0, 0.5]")
        drng = np.random.default_rng(device_seed)
        fingerprint = drng.integers(0, 2, SRAM_BITS)
        unstable = drng.random(SRAM_BITS) < bias_mix
        flip = np.where(unstable, drng.uniform(0, unstable_flip_max, SRAM_BITS), 0.0)
        bias = np.where(fingerprint == 1, 1.0 - flip, flip)
        model = cls(bias, seed=seed)
        model.bias_mix = bias_mix
        model.unstable_flip_max = unstable_flip_max
        model.device_seed = device_seed
        return model

    def power_on(self) -> bytes:
        bits = (self.rng.random(SRAM_BITS) < self.cell_bias).astype(np.uint8)
        return np.packbits(bits).tobytes()

    def boots(self, n: int) -> np.ndarray:
        return np.stack([np.frombuffer(self.power_on(), dtype=np.uint8) for _ in range(n)])


def vlo_sample(model: VloModel) -> int:
    return model.sample()


def temp_sample(model: TempModel) -> int:
    return model.sample()


def sram_power_on(model: SramModel) -> bytes:
    return model.power_on()


def sram_deviation_stream(images: np.ndarray) -> SampleStream:
    """Boot-to-boot variation of a set of SRAM images.

    Each byte is XORed with the most common value at its position, which
    strips the device-constant fingerprint; the rows are concatenated.
    """
    images = np.asarray(images, dtype=np.uint8)
    counts = np.zeros((256, images.shape[1]), dtype=np.int32)
    cols = np.arange(images.shape[1])
    for row in images:
        counts[row, cols] += 1
    mode = counts.argmax(axis=0).astype(np.uint8)
    return SampleStream((images ^ mode).ravel(), source_kind="sram")


def distinct_values_per_byte(images: np.ndarray) -> np.ndarray:
    images = np.asarray(images, dtype=np.uint8)
    seen = np.zeros((256, images.shape[1]), dtype=bool)
    cols = np.arange(images.shape[1])
    for row in images:
        seen[row, cols] = True
    return seen.sum(axis=0)


@dataclass
class HarvestStats:
    duration: float
    events: dict = field(default_factory=dict)
    reseeds: int = 0
    reseed_times: list = field(default_factory=list)
    first_reseed_time: float | None = None
    pool0_events_at_first_reseed: int | None = None
    events_before_first_reseed: int | None = None
    cadence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def run_harvest(vlo: VloModel, temp: TempModel, pools: PoolSet, gen: Generator,
                duration: float) -> HarvestStats:
    """Feed both runtime sources into the pools over ``duration`` simulated seconds.

    Every sample becomes a one-byte event (VLO tagged 0, temperature 1);
    a reseed fires as soon as the pools report ready.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    n_vlo = int(np.floor(duration * vlo.rate + 1e-9))
    n_temp = int(np.floor(duration * temp.rate + 1e-9))
    v_samples = vlo.samples(n_vlo)
    t_samples = temp.samples(n_temp)
    times = np.concatenate([np.arange(1, n_vlo + 1) / vlo.rate,
                            np.arange(1, n_temp + 1) / temp.rate])
    tags = np.concatenate([np.zeros(n_vlo, np.int64), np.ones(n_temp, np.int64)])
    payloads = np.concatenate([v_samples, t_samples])
    order = np.lexsort((tags, times))

    stats = HarvestStats(duration=duration, events={"vlo": n_vlo, "temp": n_temp})
    processed = 0
    for j in order:
        now = float(times[j])
        pools.add_event(EntropyEvent(bytes((int(payloads[j]),)), int(tags[j])))
        processed += 1
        if pools.reseed_ready(now):
            pool0 = pools.event_count[0]
            pools.reseed(gen, now)
            stats.reseeds += 1
            stats.reseed_times.append(now)
            if stats.first_reseed_time is None:
                stats.first_reseed_time = now
                stats.pool0_events_at_first_reseed = pool0
                stats.events_before_first_reseed = processed
    stats.cadence = elapsed_reseed_time(vlo.rate + temp.rate, threshold=pools.threshold)
    return stats


@dataclass
class SourceConfig:
    noise_seed: int = 0
    vlo: dict = field(default_factory=dict)
    temp: dict = field(default_factory=dict)
    sram: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "SourceConfig":
        data = json.loads(Path(path).read_text())
        unknown = set(data) - {"noise_seed", "vlo", "temp", "sram"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def dump(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def vlo_model(self, seed_offset: int = 0) -> VloModel:
        return VloModel(**self.vlo, seed=_offset(self.noise_seed, seed_offset))

    def temp_model(self, seed_offset: int = 1) -> TempModel:
        return TempModel(**self.temp, seed=_offset(self.noise_seed, seed_offset))

    def sram_model(self, seed_offset: int = 2) -> SramModel:
        return SramModel.device(**self.sram, seed=_offset(self.noise_seed, seed_offset))


def _offset(seed: int | None, offset: int) -> int | None:
    return None if seed is None else seed * 1000 + offset


def default_config() -> SourceConfig:
    return SourceConfig(
        noise_seed=0,
        vlo=VloModel(seed=0).to_dict(),
        temp=TempModel(seed=0).to_dict(),
        sram={"device_seed": 0, "bias_mix": DEFAULT_BIAS_MIX,
              "unstable_flip_max": DEFAULT_UNSTABLE_FLIP_MAX},
    )
