"""Boot-to-output chain: SRAM image -> seed -> generator -> (harvest) -> bytes."""

from __future__ import annotations

import numpy as np

from .accumulator import PoolSet
from .crc import extract_seed
from .generator import Generator
from .sources import SourceConfig, run_harvest
from .sts import BatchReport, bits_from_bytes, run_batch


def boot_generator(image: bytes) -> Generator:
    gen = Generator()
    gen.reseed(extract_seed(image))
    return gen


def seeded_generator(seed: bytes) -> Generator:
    gen = Generator()
    gen.reseed(seed)
    return gen


def boot_sequences(config: SourceConfig, count: int, nbits: int,
                   harvest_duration: float = 0.0) -> list[np.ndarray]:
    """One bit sequence per simulated power-on of the configured SRAM device.

    With ``harvest_duration > 0`` the runtime sources feed the pools for that
    long (simulated) after boot, reseeding as they go, before output is drawn.
    """
    if nbits % 8:
        raise ValueError("nbits must be a multiple of 8")
    sram = config.sram_model()
    out = []
    for i in range(count):
        gen = boot_generator(sram.power_on())
        if harvest_duration > 0:
            pools = PoolSet()
            run_harvest(config.vlo_model(seed_offset=10 + 2 * i),
                        config.temp_model(seed_offset=11 + 2 * i),
                        pools, gen, harvest_duration)
        out.append(bits_from_bytes(gen.random_bytes(nbits // 8)))
    return out


def run_pipeline(config: SourceConfig, count: int = 100, nbits: int = 1_000_000,
                 harvest_duration: float = 0.2) -> BatchReport:
    return run_batch(boot_sequences(config, count, nbits, harvest_duration))
