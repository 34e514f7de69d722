"""Min-entropy estimators: most common value, collision, Markov, compression.

Byte streams are scored by MCV on the raw alphabet; the other three run on
the stream expanded to bits (MSB first) and are scaled back to bits per
sample. A stream whose samples are all 0/1 is taken as already binary.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

Z_99 = 2.576
MIN_SAMPLES = 1000
MARKOV_PATH = 128
COMPRESSION_BLOCK = 6
COMPRESSION_DICT = 1000
BISECT_TOL = 1e-9
BISECT_MAX_ITER = 200


class StreamTooShort(ValueError):
    pass


@dataclass
class SampleStream:
    samples: np.ndarray
    source_kind: str = "external"
    rate: float | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.uint8).ravel()

    def __len__(self):
        return self.samples.size

    @classmethod
    def from_bytes(cls, data: bytes, **kw) -> "SampleStream":
        return cls(np.frombuffer(bytes(data), dtype=np.uint8).copy(), **kw)

    @property
    def is_binary(self) -> bool:
        return bool(self.samples.size) and int(self.samples.max()) <= 1

    @property
    def bits_per_sample(self) -> int:
        return 1 if self.is_binary else 8

    def bits(self) -> np.ndarray:
        if self.is_binary:
            return self.samples
        return np.unpackbits(self.samples)


@dataclass
class EntropyReport:
    min_entropy: float
    mcv: float
    collision: float
    markov: float
    compression: float
    sample_count: int
    alphabet_size: int
    bits_per_sample: int
    collision_fallback: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _as_array(stream) -> np.ndarray:
    if isinstance(stream, SampleStream):
        return stream.samples
    if isinstance(stream, (bytes, bytearray, memoryview)):
        return np.frombuffer(bytes(stream), dtype=np.uint8)
    return np.asarray(stream)


def _require(n: int, minimum: int, what: str) -> None:
    if n < minimum:
        raise StreamTooShort(f"{what} needs at least {minimum} samples, got {n}")


def bisect(f, lo: float, hi: float, tol: float = BISECT_TOL,
           max_iter: int = BISECT_MAX_ITER) -> float:
    """Root of a monotone ``f`` on [lo, hi]; endpoints must bracket a sign change."""
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def mcv_estimate(stream) -> float:
    """Most-common-value estimate in bits per sample."""
    x = _as_array(stream)
    n = x.size
    _require(n, MIN_SAMPLES, "MCV estimate")
    counts = np.bincount(x.astype(np.int64))
    p_hat = counts.max() / n
    p_u = min(1.0, p_hat + Z_99 * math.sqrt(p_hat * (1 - p_hat) / n))
    return max(0.0, -math.log2(p_u))


def _collision_times(bits: np.ndarray) -> np.ndarray:
    # With two symbols a repeat is always found within three samples.
    b = bits.astype(np.uint8).tobytes()
    n = len(b)
    times = []
    append = times.append
    i = 0
    while i + 1 < n:
        if b[i] == b[i + 1]:
            append(2)
            i += 2
        elif i + 2 < n:
            append(3)
            i += 3
        else:
            break
    return np.array(times, dtype=np.float64)


def collision_estimate_bits(bits) -> tuple[float, bool]:
    """Collision estimate of a binary sequence, bits per bit.

    Returns ``(estimate, fallback)``; ``fallback`` is set when no collision
    could be observed and full entropy is reported instead.
    """
    bits = np.asarray(bits)
    _require(bits.size, MIN_SAMPLES, "collision estimate")
    t = _collision_times(bits)
    if t.size < 2:
        return 1.0, True
    mean = t.mean()
    sigma = t.std(ddof=1)
    lower = mean - Z_99 * sigma / math.sqrt(t.size)
    # Expected spacing for P(bit = most likely value) = p is 2 + 2p(1 - p).
    if lower >= 2.5:
        return 1.0, False
    p = 0.5 + math.sqrt(max(0.0, 1.25 - 0.5 * lower))
    return min(1.0, max(0.0, -math.log2(min(p, 1.0)))), False


def markov_estimate_symbols(x, k: int) -> float:
    """First-order Markov estimate over a ``k``-symbol alphabet, bits per sample.

    Initial and transition probabilities are inflated by a Hoeffding bound
    before the most likely 128-sample path is found.
    """
    x = np.asarray(x).astype(np.int64)
    n = x.size
    _require(n, MIN_SAMPLES, "Markov estimate")
    alpha = min(0.99 ** (k * k), 0.99 ** (1 / MARKOV_PATH))
    log_term = -math.log1p(-alpha)
    eps = math.sqrt(log_term / (2 * n))
    init = np.minimum(1.0, np.bincount(x, minlength=k) / n + eps)
    trans_counts = np.bincount(x[:-1] * k + x[1:], minlength=k * k).reshape(k, k)
    from_counts = trans_counts.sum(axis=1)
    trans = np.zeros((k, k))
    seen = from_counts > 0
    eps_i = np.sqrt(log_term / (2 * from_counts[seen]))
    trans[seen] = np.minimum(1.0, trans_counts[seen] / from_counts[seen, None] + eps_i[:, None])
    with np.errstate(divide="ignore"):
        log_init = np.log2(init)
        log_trans = np.log2(trans)
    best = log_init
    for _ in range(MARKOV_PATH - 1):
        best = np.max(best[:, None] + log_trans, axis=0)
    p_max_log = float(best.max())
    return float(min(max(-p_max_log / MARKOV_PATH, 0.0), math.log2(k))) + 0.0


def markov_estimate_bits(bits) -> float:
    """First-order Markov estimate of a binary sequence, bits per bit."""
    return markov_estimate_symbols(bits, 2)


def _compression_distances(sym: np.ndarray, d: int) -> np.ndarray:
    L = sym.size
    order = np.argsort(sym, kind="stable")
    prev = np.zeros(L, dtype=np.int64)
    same = sym[order[1:]] == sym[order[:-1]]
    prev[order[1:][same]] = order[:-1][same] + 1
    idx = np.arange(1, L + 1)
    dist = np.where(prev > 0, idx - prev, idx)
    return dist[d:]


def _compression_expectation(p: float, L: int, d: int, k: int, log_u: np.ndarray,
                             weight: np.ndarray) -> float:
    v = L - d
    q = (1 - p) / (k - 1)
    u = np.arange(1, L + 1, dtype=np.float64)

    def g(z: float) -> float:
        if z <= 0:
            return 0.0
        geom = np.exp((u - 1) * math.log1p(-z)) if z < 1 else (u == 1).astype(float)
        inner = z * z * geom * log_u * weight
        tail = z * geom[d:] * log_u[d:]
        return (inner.sum() + tail.sum()) / v

    return g(p) + (k - 1) * g(q)


def compression_estimate_symbols(sym, k: int, d: int = COMPRESSION_DICT) -> float:
    """Dictionary-distance compression estimate over ``k`` symbols, bits per symbol."""
    sym = np.asarray(sym).astype(np.int64)
    L = sym.size
    if L < d + 100:
        raise StreamTooShort(f"compression estimate needs at least {d + 100} symbols, got {L}")
    dist = _compression_distances(sym, d)
    v = L - d
    logs = np.log2(dist)
    mean = logs.mean()
    c = 0.5907
    sigma = c * math.sqrt(max(0.0, (logs ** 2).sum() / (v - 1) - mean ** 2))
    lower = mean - Z_99 * sigma / math.sqrt(v)

    u = np.arange(1, L + 1, dtype=np.float64)
    log_u = np.log2(u)
    # Number of t in (d, L] with u < t, for the u < t branch of the sum.
    weight = (L - np.maximum(u, d)).clip(min=0)

    def f(p: float) -> float:
        return _compression_expectation(p, L, d, k, log_u, weight) - lower

    lo, hi = 1.0 / k, 1.0
    if f(lo) <= 0:
        return math.log2(k)
    if f(hi) >= 0:
        return 0.0
    p = bisect(f, lo, hi)
    return float(min(math.log2(k), max(0.0, -math.log2(p))))


def compression_estimate_bits(bits, b: int = COMPRESSION_BLOCK,
                              d: int = COMPRESSION_DICT) -> float:
    """Compression estimate of a binary sequence read in ``b``-bit blocks, bits per bit."""
    bits = np.asarray(bits)
    minimum = b * (d + 100)
    if bits.size < minimum:
        raise StreamTooShort(
            f"compression estimate needs at least {minimum} bits, got {bits.size}"
        )
    L = bits.size // b
    blocks = bits[: L * b].reshape(L, b).astype(np.int64)
    sym = blocks @ (1 << np.arange(b - 1, -1, -1))
    return compression_estimate_symbols(sym, 2 ** b, d) / b


def _stream(stream) -> SampleStream:
    return stream if isinstance(stream, SampleStream) else SampleStream(_as_array(stream))


def collision_estimate(stream) -> float:
    s = _stream(stream)
    return collision_estimate_bits(s.bits())[0] * s.bits_per_sample


def markov_estimate(stream) -> float:
    s = _stream(stream)
    return markov_estimate_bits(s.bits()) * s.bits_per_sample


def compression_estimate(stream) -> float:
    s = _stream(stream)
    return compression_estimate_bits(s.bits()) * s.bits_per_sample


def full_report(stream) -> EntropyReport:
    """Run all four estimators; ``min_entropy`` is the smallest of them."""
    s = _stream(stream)
    n = len(s)
    _require(n, MIN_SAMPLES, "entropy report")
    bps = s.bits_per_sample
    bits = s.bits()
    mcv = mcv_estimate(s.samples)
    coll, fallback = collision_estimate_bits(bits)
    values = [mcv, coll * bps, markov_estimate_bits(bits) * bps,
              compression_estimate_bits(bits) * bps]
    notes = []
    if bps > 1:
        notes.append("collision/markov/compression computed per bit and scaled by 8")
    if fallback:
        notes.append("no collisions observed; collision estimate set to full entropy")
    return EntropyReport(
        min_entropy=min(values),
        mcv=values[0],
        collision=values[1],
        markov=values[2],
        compression=values[3],
        sample_count=n,
        alphabet_size=2 ** bps,
        bits_per_sample=bps,
        collision_fallback=fallback,
        notes=notes,
    )


def render_table(rows: dict[str, EntropyReport]) -> str:
    header = f"{'':<20}{'Min-Entropy':>12}{'MCV Est.':>12}{'Collision Est.':>16}" \
             f"{'Markov Est.':>13}{'Compression Est.':>18}"
    lines = [header]
    for name, r in rows.items():
        lines.append(f"{name:<20}{r.min_entropy:>12.4f}{r.mcv:>12.4f}{r.collision:>16.4f}"
                     f"{r.markov:>13.4f}{r.compression:>18.4f}")
    return "\n".join(lines)
