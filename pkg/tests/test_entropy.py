import math

import numpy as np
import pytest

from embrng import entropy
from embrng.entropy import (
    SampleStream, StreamTooShort, collision_estimate, collision_estimate_bits,
    compression_estimate, compression_estimate_bits, full_report, markov_estimate,
    markov_estimate_bits, mcv_estimate,
)


@pytest.fixture(scope="module")
def uniform_bits():
    return np.random.default_rng(7).integers(0, 2, 1_000_000).astype(np.uint8)


# ---- independent oracles -------------------------------------------------

def collision_oracle(bits):
    """Scan for the first repeat with a set, then bisect the expected spacing."""
    times, i, n = [], 0, len(bits)
    while i < n:
        seen, j = set(), i
        while j < n and bits[j] not in seen:
            seen.add(bits[j])
            j += 1
        if j >= n:
            break
        times.append(j - i + 1)
        i = j + 1
    t = np.array(times, float)
    lower = t.mean() - 2.576 * t.std(ddof=1) / math.sqrt(len(t))
    lo, hi = 0.5, 1.0
    if 2 + 2 * lo * (1 - lo) <= lower:
        return 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if 2 + 2 * mid * (1 - mid) > lower:
            lo = mid
        else:
            hi = mid
    return -math.log2(hi)


def markov_oracle(bits):
    """Maximum over the six candidate 128-bit paths of a two-state chain."""
    bits = list(int(b) for b in bits)
    n = len(bits)
    alpha = min(0.99 ** 4, 0.99 ** (1 / 128))
    lt = math.log(1 / (1 - alpha))
    eps = math.sqrt(lt / (2 * n))
    p1 = sum(bits) / n
    P = [min(1, 1 - p1 + eps), min(1, p1 + eps)]
    c = [[0, 0], [0, 0]]
    for a, b in zip(bits, bits[1:]):
        c[a][b] += 1
    T = [[0.0, 0.0], [0.0, 0.0]]
    for i in range(2):
        tot = c[i][0] + c[i][1]
        if tot:
            e = math.sqrt(lt / (2 * tot))
            T[i] = [min(1, c[i][0] / tot + e), min(1, c[i][1] / tot + e)]
    cands = [
        P[0] * T[0][0] ** 127,
        P[0] * T[0][1] ** 64 * T[1][0] ** 63,
        P[0] * T[0][1] * T[1][1] ** 126,
        P[1] * T[1][0] * T[0][0] ** 126,
        P[1] * T[1][0] ** 64 * T[0][1] ** 63,
        P[1] * T[1][1] ** 127,
    ]
    pmax = max(cands)
    return min(-math.log2(pmax) / 128, 1.0) if pmax > 0 else 1.0


def compression_oracle(bits, b=6, d=1000):
    L = len(bits) // b
    syms = [int("".join(str(int(x)) for x in bits[i * b:(i + 1) * b]), 2) for i in range(L)]
    last = {}
    for i in range(1, d + 1):
        last[syms[i - 1]] = i
    D = []
    for i in range(d + 1, L + 1):
        s = syms[i - 1]
        D.append(i - last[s] if s in last else i)
        last[s] = i
    v = L - d
    logs = [math.log2(x) for x in D]
    mean = sum(logs) / v
    sigma = 0.5907 * math.sqrt(sum(x * x for x in logs) / (v - 1) - mean ** 2)
    lower = mean - 2.576 * sigma / math.sqrt(v)

    def G(z):
        # inner(t) = sum over u < t, carried forward as t grows
        tot, inner = 0.0, 0.0
        for t in range(1, L + 1):
            if t > 1:
                inner += math.log2(t - 1) * z * z * (1 - z) ** (t - 2)
            if t > d:
                tot += inner + math.log2(t) * z * (1 - z) ** (t - 1)
        return tot / v

    def f(p):
        return G(p) + (2 ** b - 1) * G((1 - p) / (2 ** b - 1)) - lower

    lo, hi = 2.0 ** -b, 1.0
    if f(lo) <= 0:
        return 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return -math.log2((lo + hi) / 2) / b


# ---- MCV -----------------------------------------------------------------

class TestMcv:
    def test_constant(self):
        assert mcv_estimate(np.full(10_000, 42, np.uint8)) == 0.0

    def test_balanced_coin(self, uniform_bits):
        assert mcv_estimate(uniform_bits) == pytest.approx(1.0, abs=0.02)

    def test_three_to_one(self):
        x = np.zeros(1_000_000, np.uint8)
        x[750_000:] = 1
        # -log2(0.75 + 2.576 sqrt(0.1875 / 1e6)), evaluated with mpmath at 30 digits.
        assert mcv_estimate(x) == pytest.approx(0.412893438871776, abs=1e-9)

    def test_too_short(self):
        with pytest.raises(StreamTooShort):
            mcv_estimate(np.zeros(999, np.uint8))

    def test_permutation_invariant(self, rng):
        x = rng.integers(0, 5, 5000).astype(np.uint8)
        assert mcv_estimate(x) == mcv_estimate(rng.permutation(x))


# ---- collision -----------------------------------------------------------

class TestCollision:
    def test_constant(self):
        assert collision_estimate(np.zeros(10_000, np.uint8)) <= 0.01

    def test_uniform(self, uniform_bits):
        assert collision_estimate(uniform_bits) == pytest.approx(1.0, abs=0.1)

    def test_biased(self, rng):
        x = (rng.random(1_000_000) < 0.9).astype(np.uint8)
        assert collision_estimate(x) < 0.6

    @pytest.mark.parametrize("p", [0.5, 0.6, 0.75, 0.9, 0.99])
    def test_matches_oracle(self, p):
        x = (np.random.default_rng(int(p * 100)).random(20_000) < p).astype(np.uint8)
        assert collision_estimate_bits(x)[0] == pytest.approx(collision_oracle(x.tolist()), abs=1e-7)

    def test_no_collision_fallback(self):
        est, flag = collision_estimate_bits(np.array([0, 1] * 500 + [0], np.uint8)[:1000])
        assert not flag
        assert est <= 1.0


# ---- Markov --------------------------------------------------------------

class TestMarkov:
    def test_alternating(self):
        assert markov_estimate(np.tile([0, 1], 50_000).astype(np.uint8)) <= 0.01

    def test_constant(self):
        assert markov_estimate(np.ones(10_000, np.uint8)) <= 0.01

    def test_uniform(self, uniform_bits):
        assert markov_estimate(uniform_bits) == pytest.approx(1.0, abs=0.1)

    @pytest.mark.parametrize("p,stay", [(0.5, 0.5), (0.7, 0.5), (0.5, 0.9), (0.3, 0.2)])
    def test_matches_six_path_oracle(self, p, stay):
        r = np.random.default_rng(int(p * 10 + stay * 100))
        x = [int(r.random() < p)]
        for _ in range(20_000):
            x.append(x[-1] if r.random() < stay else int(r.random() < p))
        x = np.array(x, np.uint8)
        assert markov_estimate_bits(x) == pytest.approx(markov_oracle(x), abs=1e-9)

    def test_byte_stream_scaled_to_sample(self, rng):
        x = rng.integers(0, 256, 20_000).astype(np.uint8)
        assert markov_estimate(x) == pytest.approx(8 * markov_estimate_bits(np.unpackbits(x)))


# ---- compression ---------------------------------------------------------

class TestCompression:
    def test_constant(self):
        assert compression_estimate(np.zeros(100_000, np.uint8)) <= 0.01

    def test_uniform(self, uniform_bits):
        assert 0.8 <= compression_estimate(uniform_bits) <= 1.0

    @pytest.mark.parametrize("p", [0.5, 0.8, 0.95])
    def test_matches_naive_oracle(self, p):
        x = (np.random.default_rng(int(p * 100)).random(7_800) < p).astype(np.uint8)
        got = compression_estimate_bits(x)
        assert got == pytest.approx(compression_oracle(x), abs=1e-6)

    def test_period_2_below_period_1024(self, rng):
        p2 = np.tile([0, 1], 50_000).astype(np.uint8)
        pat = rng.integers(0, 2, 1024).astype(np.uint8)
        p1024 = np.tile(pat, 100_000 // 1024 + 1)[:100_000]
        assert compression_estimate(p2) < compression_estimate(p1024)

    def test_too_short(self):
        with pytest.raises(StreamTooShort, match="at least 6600 bits"):
            compression_estimate_bits(np.zeros(6000, np.uint8))


# ---- reports and properties ----------------------------------------------

class TestReport:
    @pytest.mark.parametrize("value", [0x00, 0xFF])
    def test_constant_stream(self, value):
        r = full_report(np.full(100_000, value, np.uint8))
        for v in (r.min_entropy, r.mcv, r.collision, r.markov, r.compression):
            assert v <= 0.01

    def test_constant_mixed_bit_byte(self):
        # Bit-level estimators see a period-8 pattern; MCV still pins the minimum.
        r = full_report(np.full(100_000, 0x5A, np.uint8))
        assert r.min_entropy == r.mcv == 0.0
        assert r.compression < 1.0

    def test_uniform_bytes(self):
        x = np.random.default_rng(3).integers(0, 256, 1_000_000).astype(np.uint8)
        r = full_report(x)
        assert r.min_entropy >= 6.5
        assert r.alphabet_size == 256 and r.bits_per_sample == 8

    def test_min_is_minimum(self, rng):
        r = full_report(rng.integers(0, 16, 50_000).astype(np.uint8))
        assert r.min_entropy == min(r.mcv, r.collision, r.markov, r.compression)

    @pytest.mark.parametrize("k", [2, 4, 256])
    def test_bounded_by_alphabet(self, rng, k):
        r = full_report(rng.integers(0, k, 50_000).astype(np.uint8))
        bound = math.log2(r.alphabet_size)
        for v in (r.mcv, r.collision, r.markov, r.compression):
            assert 0 <= v <= bound + 1e-12

    def test_shuffle_changes_markov_and_compression(self, rng):
        x = np.tile([0, 1], 50_000).astype(np.uint8)
        y = rng.permutation(x)
        assert mcv_estimate(x) == mcv_estimate(y)
        assert markov_estimate(y) > markov_estimate(x) + 0.5
        assert compression_estimate(y) > compression_estimate(x) + 0.5

    def test_binary_detection(self):
        s = SampleStream(np.array([0, 1, 1, 0], np.uint8))
        assert s.is_binary and s.bits_per_sample == 1
        assert SampleStream(np.array([0, 2], np.uint8)).bits_per_sample == 8

    def test_render_table(self):
        r = full_report(np.zeros(10_000, np.uint8))
        text = entropy.render_table({"zeros": r})
        assert "Compression Est." in text and "zeros" in text

    def test_bisect(self):
        assert entropy.bisect(lambda z: z * z - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-8)
