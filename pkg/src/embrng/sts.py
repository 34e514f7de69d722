"""Five SP 800-22 tests (frequency, block frequency, cumulative sums, runs,
longest run of ones) and the batch summary used to judge a generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import erfc, gammaincc, ndtr

ALPHA = 0.01
UNIFORMITY_ALPHA = 1e-4
BLOCK_FREQUENCY_M = 128
TEST_NAMES = ("Frequency", "BlockFrequency", "CumulativeSums", "Runs", "LongestRun")

# (min n, M, category lower edge v_0, category probabilities)
_LONGEST_RUN = [
    (750_000, 10_000, 10, [0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727]),
    (6272, 128, 4, [0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124]),
    (128, 8, 1, [0.21484375, 0.3671875, 0.23046875, 0.1875]),
]


class InputTooShort(ValueError):
    pass


def igamc(a: float, x: float) -> float:
    return float(gammaincc(a, x))


def _bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int8).ravel()
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("bit sequence must contain only 0 and 1")
    return arr


def _need(n: int, minimum: int, name: str) -> None:
    if n < minimum:
        raise InputTooShort(f"{name} needs n >= {minimum}, got {n}")


def bits_from_bytes(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def frequency_test(bits, min_n: int = 100) -> float:
    x = _bits(bits)
    n = x.size
    _need(n, min_n, "frequency test")
    s = 2 * int(x.sum()) - n
    return float(erfc(abs(s) / math.sqrt(2 * n)))


def block_frequency_test(bits, M: int = BLOCK_FREQUENCY_M, min_n: int = 100) -> float:
    x = _bits(bits)
    n = x.size
    _need(n, min_n, "block frequency test")
    N = n // M
    if N < 1:
        raise InputTooShort(f"block frequency test needs at least one block of {M} bits")
    pi = x[: N * M].reshape(N, M).mean(axis=1)
    chi2 = 4.0 * M * float(((pi - 0.5) ** 2).sum())
    return igamc(N / 2, chi2 / 2)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def cusum_test(bits, forward: bool = True, min_n: int = 100) -> float:
    x = _bits(bits)
    n = x.size
    _need(n, min_n, "cumulative sums test")
    steps = 2 * x.astype(np.int64) - 1
    if not forward:
        steps = steps[::-1]
    z = int(np.abs(np.cumsum(steps)).max())
    root = math.sqrt(n)
    nz = n // z
    ks = np.arange(_trunc_div(-nz + 1, 4), _trunc_div(nz - 1, 4) + 1)
    sum1 = float((ndtr((4 * ks + 1) * z / root) - ndtr((4 * ks - 1) * z / root)).sum())
    ks = np.arange(_trunc_div(-nz - 3, 4), _trunc_div(nz - 1, 4) + 1)
    sum2 = float((ndtr((4 * ks + 3) * z / root) - ndtr((4 * ks + 1) * z / root)).sum())
    return float(min(1.0, max(0.0, 1.0 - sum1 + sum2)))


def runs_test(bits, min_n: int = 100) -> float:
    x = _bits(bits)
    n = x.size
    _need(n, min_n, "runs test")
    pi = x.sum() / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return 0.0
    v = 1 + int(np.count_nonzero(np.diff(x)))
    num = abs(v - 2 * n * pi * (1 - pi))
    den = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    return float(erfc(num / den))


def _longest_runs(blocks: np.ndarray) -> np.ndarray:
    # Longest run of ones in each row.
    N, M = blocks.shape
    padded = np.zeros((N, M + 2), dtype=np.int8)
    padded[:, 1:-1] = blocks
    d = np.diff(padded, axis=1)
    out = np.zeros(N, dtype=np.int64)
    rows_s, cols_s = np.nonzero(d == 1)
    rows_e, cols_e = np.nonzero(d == -1)
    np.maximum.at(out, rows_s, cols_e - cols_s)
    return out


def longest_run_test(bits, min_n: int = 128) -> float:
    x = _bits(bits)
    n = x.size
    _need(n, max(min_n, 128), "longest run test")
    for lo, M, v0, pis in _LONGEST_RUN:
        if n >= lo:
            break
    K = len(pis) - 1
    N = n // M
    runs = _longest_runs(x[: N * M].reshape(N, M))
    cat = np.clip(runs - v0, 0, K)
    nu = np.bincount(cat, minlength=K + 1)
    pis = np.asarray(pis)
    chi2 = float((((nu - N * pis) ** 2) / (N * pis)).sum())
    return igamc(K / 2, chi2 / 2)


def run_all(bits, block_m: int = BLOCK_FREQUENCY_M) -> dict[str, list[float]]:
    x = _bits(bits)
    return {
        "Frequency": [frequency_test(x)],
        "BlockFrequency": [block_frequency_test(x, block_m)],
        "CumulativeSums": [cusum_test(x, True), cusum_test(x, False)],
        "Runs": [runs_test(x)],
        "LongestRun": [longest_run_test(x)],
    }


def decile_histogram(p_values) -> list[int]:
    p = np.asarray(p_values, dtype=np.float64)
    idx = np.minimum((p * 10).astype(np.int64), 9)
    return np.bincount(idx, minlength=10).tolist()


def uniformity_p_value(histogram) -> float:
    h = np.asarray(histogram, dtype=np.float64)
    expected = h.sum() / 10
    chi2 = float(((h - expected) ** 2 / expected).sum())
    return igamc(9 / 2, chi2 / 2)


def proportion_threshold(m: int, alpha: float = ALPHA) -> float:
    p_hat = 1 - alpha
    return p_hat - 3 * math.sqrt(p_hat * (1 - p_hat) / m)


def minimum_passes(m: int, alpha: float = ALPHA) -> int:
    # Rounded down, so 100 sequences need 96 passes.
    return math.floor(m * proportion_threshold(m, alpha) + 1e-9)


@dataclass
class TestSummary:
    name: str
    histogram: list[int]
    uniformity_p: float
    passes: int
    total: int
    threshold: float
    min_passes: int

    @property
    def pass_ratio(self) -> float:
        return self.passes / self.total

    @property
    def ok(self) -> bool:
        return self.passes >= self.min_passes and self.uniformity_p >= UNIFORMITY_ALPHA

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass_ratio"] = self.pass_ratio
        d["ok"] = self.ok
        return d


def summarize(name: str, histogram, passes: int, total: int | None = None) -> TestSummary:
    """Aggregate already-binned results (e.g. a printed results table)."""
    histogram = [int(c) for c in histogram]
    total = sum(histogram) if total is None else total
    return TestSummary(
        name=name,
        histogram=histogram,
        uniformity_p=uniformity_p_value(histogram),
        passes=passes,
        total=total,
        threshold=proportion_threshold(total),
        min_passes=minimum_passes(total),
    )


def summarize_p_values(name: str, p_values) -> TestSummary:
    p = np.asarray(p_values, dtype=np.float64)
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise ValueError(f"{name}: p-values outside [0, 1]")
    return summarize(name, decile_histogram(p), int((p >= ALPHA).sum()), p.size)


@dataclass
class BatchReport:
    sequences: int
    tests: dict[str, TestSummary] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.tests.values())

    def to_dict(self) -> dict:
        return {
            "sequences": self.sequences,
            "ok": self.ok,
            "tests": {k: v.to_dict() for k, v in self.tests.items()},
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        head = f"{'':<16}" + "".join(f"{'C' + str(i):>6}" for i in range(1, 11))
        head += f"{'P-Value':>11}{'Pass Ratio':>14}"
        lines = [head]
        for t in self.tests.values():
            flag = "" if t.ok else " *"
            row = f"{t.name:<16}" + "".join(f"{c:>6}" for c in t.histogram)
            row += f"{t.uniformity_p:>11.6f}{f'{t.passes}/{t.total}':>14}{flag}"
            lines.append(row)
        return "\n".join(lines)


def run_batch(streams, block_m: int = BLOCK_FREQUENCY_M) -> BatchReport:
    streams = list(streams)
    if not streams:
        raise ValueError("batch is empty")
    collected: dict[str, list[float]] = {name: [] for name in TEST_NAMES}
    for s in streams:
        for name, ps in run_all(s, block_m).items():
            collected[name].extend(ps)
    report = BatchReport(sequences=len(streams))
    for name in TEST_NAMES:
        report.tests[name] = summarize_p_values(name, collected[name])
    report.notes.append("CumulativeSums aggregates forward and reverse p-values (2 per sequence)")
    return report


def load_bits(path: str | Path) -> np.ndarray:
    """Read a bit file; ASCII '0'/'1' text is detected, otherwise bytes are unpacked MSB-first."""
    data = Path(path).read_bytes()
    stripped = bytes(c for c in data if c not in b" \t\r\n")
    if stripped and set(stripped) <= {ord("0"), ord("1")}:
        return np.frombuffer(stripped, dtype=np.uint8) - ord("0")
    return bits_from_bytes(data)
