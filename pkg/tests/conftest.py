import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def poly_crc(message: bytes, init: int = 0xFFFF) -> int:
    """CRC as the remainder of polynomial long division over GF(2).

    The initial register is folded into the leading 16 message bits, the
    message is multiplied by x^16 and reduced modulo x^16 + x^12 + x^5 + 1.
    """
    nbits = 8 * len(message)
    m = int.from_bytes(message, "big") if message else 0
    m ^= init << max(nbits - 16, 0) if nbits >= 16 else init >> (16 - nbits)
    dividend = m << 16
    if nbits < 16:
        # Init bits that did not overlap the message stay in the register.
        dividend ^= (init & ((1 << (16 - nbits)) - 1)) << nbits
    g = 0x11021
    for shift in range(dividend.bit_length() - 17, -1, -1):
        if dividend >> (shift + 16) & 1:
            dividend ^= g << shift
    return dividend
