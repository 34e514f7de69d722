"""Fortuna-style PRNG for small embedded targets, with source simulators
and entropy / randomness measurement tools."""

from .accumulator import EntropyEvent, PoolSet
from .crc import crc16, extract_seed
from .entropy import EntropyReport, SampleStream, full_report
from .generator import Generator
from .sources import SramModel, TempModel, VloModel, run_harvest

__all__ = [
    "EntropyEvent", "EntropyReport", "Generator", "PoolSet", "SampleStream",
    "SramModel", "TempModel", "VloModel", "crc16", "extract_seed", "full_report",
    "run_harvest",
]
__version__ = "0.1.0"
