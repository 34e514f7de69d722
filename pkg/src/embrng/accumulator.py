"""Thirty-two entropy pools feeding the generator on a power-of-two schedule."""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

from .generator import Generator

NUM_POOLS = 32
MAX_PAYLOAD = 32
RESEED_THRESHOLD = 58


@dataclass(frozen=True)
class EntropyEvent:
    payload: bytes
    source_tag: int = 0

    def __post_init__(self):
        if not 1 <= len(self.payload) <= MAX_PAYLOAD:
            raise ValueError(f"payload must be 1..{MAX_PAYLOAD} bytes, got {len(self.payload)}")
        if self.source_tag < 0:
            raise ValueError("source_tag must be non-negative")


class NotReadyError(RuntimeError):
    pass


def drained_pools(reseed_count: int) -> list[int]:
    """Pools emptied on reseed number ``reseed_count`` (1-based)."""
    if reseed_count < 1:
        raise ValueError("reseed_count starts at 1")
    return [i for i in range(NUM_POOLS) if reseed_count % (1 << i) == 0]


class PoolSet:
    """Pools are running SHA-256 contexts; only payload bytes are absorbed.

    ``add_event`` may be called from several producer threads. ``reseed``
    must not race with another reseed on the same generator.
    """

    def __init__(self, threshold: int = RESEED_THRESHOLD, min_reseed_interval: float = 0.0):
        if threshold < 1:
            raise ValueError("threshold must be >= 1")
        self.threshold = threshold
        self.min_reseed_interval = min_reseed_interval
        self.pools = [hashlib.sha256() for _ in range(NUM_POOLS)]
        self.event_count = [0] * NUM_POOLS
        self.byte_count = [0] * NUM_POOLS
        self.next_pool: dict[int, int] = {}
        self.reseed_counter = 0
        self.last_reseed_time: float | None = None
        self._lock = threading.Lock()

    def add_event(self, event: EntropyEvent) -> int:
        """Absorb one event and return the index of the pool that took it."""
        with self._lock:
            i = self.next_pool.get(event.source_tag, 0)
            self.pools[i].update(event.payload)
            self.event_count[i] += 1
            self.byte_count[i] += len(event.payload)
            self.next_pool[event.source_tag] = (i + 1) % NUM_POOLS
            return i

    def reseed_ready(self, now: float | None = None) -> bool:
        if self.event_count[0] < self.threshold:
            return False
        if self.min_reseed_interval > 0 and now is not None and self.last_reseed_time is not None:
            return now - self.last_reseed_time >= self.min_reseed_interval
        return True

    def reseed(self, gen: Generator, now: float | None = None) -> list[int]:
        """Drain the scheduled pools into ``gen``; returns the drained indices."""
        with self._lock:
            if not self.reseed_ready(now):
                raise NotReadyError(
                    f"pool 0 holds {self.event_count[0]} events, need {self.threshold}"
                )
            r = self.reseed_counter + 1
            drained = drained_pools(r)
            material = b"".join(self.pools[i].digest() for i in drained)
            for i in drained:
                self.pools[i] = hashlib.sha256()
                self.event_count[i] = 0
                self.byte_count[i] = 0
            self.reseed_counter = r
            self.last_reseed_time = now
        gen.reseed(material)
        return drained

    def diagnostics(self) -> dict:
        return {
            "reseed_counter": self.reseed_counter,
            "threshold": self.threshold,
            "event_count": list(self.event_count),
            "byte_count": list(self.byte_count),
        }


def elapsed_reseed_time(event_rate: float, pools: int = NUM_POOLS,
                        threshold: int = RESEED_THRESHOLD) -> dict:
    """Time to gather ``threshold`` events in pool 0 at ``event_rate`` events/s.

    ``full_cycle`` assumes round-robin routing over all pools, so pool 0
    sees one event in every ``pools``; ``direct`` assumes every event
    lands in the gating pool.
    """
    if event_rate <= 0:
        raise ValueError("event_rate must be positive")
    return {
        "event_rate": event_rate,
        "full_cycle": threshold * pools / event_rate,
        "direct": threshold / event_rate,
        "pool0_event_spacing": pools / event_rate,
    }
