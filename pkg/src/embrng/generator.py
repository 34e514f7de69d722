"""Counter-mode generator with key rotation after every request."""

from __future__ import annotations

import hashlib

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

KEY_SIZE = 32
BLOCK_SIZE = 16
MAX_REQUEST = 1 << 20
COUNTER_LIMIT = 1 << 128


class GeneratorError(RuntimeError):
    pass


class NotSeededError(GeneratorError):
    pass


class CounterOverflowError(GeneratorError):
    pass


def aes256_encrypt_blocks(key: bytes, plaintext: bytes) -> bytes:
    """AES-256 applied independently to each 16-byte block."""
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(plaintext) + enc.finalize()


def _counter_blocks(start: int, k: int) -> bytes:
    return b"".join((start + i).to_bytes(16, "big") for i in range(k))


class Generator:
    """Generator state: 256-bit key, 128-bit counter and a seeded flag.

    Not thread-safe; callers serialise access to one instance.
    """

    def __init__(self, key: bytes = bytes(KEY_SIZE), counter: int = 0, seeded: bool = False):
        if len(key) != KEY_SIZE:
            raise ValueError("key must be 32 bytes")
        if not 0 <= counter < COUNTER_LIMIT:
            raise ValueError("counter out of range")
        self.key = bytes(key)
        self.counter = counter
        self.seeded = seeded

    def __repr__(self):
        return f"Generator(counter={self.counter}, seeded={self.seeded})"

    def copy(self) -> "Generator":
        return Generator(self.key, self.counter, self.seeded)

    def reseed(self, seed_material: bytes) -> None:
        if not seed_material:
            raise ValueError("seed material must be non-empty")
        self._advance(1)
        self.key = hashlib.sha256(self.key + bytes(seed_material)).digest()
        self.seeded = True

    def generate_blocks(self, k: int) -> bytes:
        if not self.seeded:
            raise NotSeededError("generator is unseeded")
        if k < 1:
            raise ValueError("block count must be >= 1")
        start = self.counter
        self._advance(k)
        return aes256_encrypt_blocks(self.key, _counter_blocks(start, k))

    def pseudo_random_data(self, n: int) -> bytes:
        if not 1 <= n <= MAX_REQUEST:
            raise ValueError(f"request size must be in [1, {MAX_REQUEST}], got {n}")
        if not self.seeded:
            raise NotSeededError("generator is unseeded")
        out = self.generate_blocks(-(-n // BLOCK_SIZE))[:n]
        self.key = self.generate_blocks(2)
        return out

    def random_bytes(self, n: int) -> bytes:
        """Any number of bytes, split into requests of at most MAX_REQUEST."""
        chunks = []
        while n > 0:
            take = min(n, MAX_REQUEST)
            chunks.append(self.pseudo_random_data(take))
            n -= take
        return b"".join(chunks)

    def _advance(self, k: int) -> None:
        # Wrapping would repeat cipher inputs under one key.
        if self.counter + k >= COUNTER_LIMIT:
            raise CounterOverflowError("128-bit counter exhausted")
        self.counter += k
