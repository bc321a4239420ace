"""Arithmetic in binary extension fields GF(2^m).

Field elements are plain Python ints: bit ``l`` of the integer is the
coefficient of x^l in the polynomial basis {1, x, ..., x^(m-1)}.  The
interpretation (extension degree, reduction polynomial) lives in a
:class:`FieldContext` that is passed around alongside the elements; the
zero and one elements are always the ints 0 and 1, and addition is plain
XOR.  Keeping elements as bare ints means a word of field elements, its
coordinate matrix and its byte encoding are all cheap reinterpretations
of the same bits.

Contexts are immutable and freely shareable across threads.  All
randomness is drawn from an explicitly passed ``random.Random``.
"""

from __future__ import annotations

import random
from functools import lru_cache

import numpy as np

# Low-weight irreducible reduction polynomials, keyed by extension degree.
# Every polynomial is re-verified irreducible at context construction
# (Rabin's test), so these constants are documented, not trusted.
DEFAULT_POLYS: dict[int, int] = {
    2: 0b111,                                   # x^2 + x + 1
    3: 0b1011,                                  # x^3 + x + 1
    4: 0b10011,                                 # x^4 + x + 1
    5: 0b100101,                                # x^5 + x^2 + 1
    6: 0b1000011,                               # x^6 + x + 1
    7: 0b10001001,                              # x^7 + x^3 + 1
    8: 0b100011011,                             # x^8 + x^4 + x^3 + x + 1
    12: (1 << 12) | (1 << 6) | (1 << 4) | 0b11,     # x^12 + x^6 + x^4 + x + 1
    16: (1 << 16) | (1 << 5) | (1 << 3) | 0b11,     # x^16 + x^5 + x^3 + x + 1
    128: (1 << 128) | (1 << 7) | (1 << 2) | 0b11,   # x^128 + x^7 + x^2 + x + 1
    192: (1 << 192) | (1 << 7) | (1 << 2) | 0b11,   # x^192 + x^7 + x^2 + x + 1
}

_RESAMPLE_CAP = 100


def _poly_mod(a: int, p: int) -> int:
    """Remainder of the binary polynomial a modulo p."""
    dp = p.bit_length() - 1
    while a.bit_length() - 1 >= dp and a:
        a ^= p << (a.bit_length() - 1 - dp)
    return a


def _poly_mulmod(a: int, b: int, p: int) -> int:
    """Binary polynomial product a*b reduced modulo p (shift-and-reduce)."""
    r = 0
    top = p.bit_length()
    while a:
        if a & 1:
            r ^= b
        a >>= 1
        b <<= 1
        if b.bit_length() == top:
            b ^= p
    return r


def _poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _poly_mod(a, b)
    return a


def _prime_divisors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(poly: int) -> bool:
    """Rabin's irreducibility test for a binary polynomial.

    ``poly`` of degree m is irreducible over GF(2) iff x^(2^m) == x mod poly
    and gcd(x^(2^(m/q)) - x, poly) == 1 for every prime divisor q of m.
    """
    m = poly.bit_length() - 1
    if m <= 0:
        return False

    def x_pow_2e(e: int) -> int:
        r = 0b10
        for _ in range(e):
            r = _poly_mulmod(r, r, poly)
        return r

    if x_pow_2e(m) != 0b10:
        return False
    for q in _prime_divisors(m):
        if _poly_gcd(poly, x_pow_2e(m // q) ^ 0b10) != 1:
            return False
    return True


class FieldContext:
    """GF(2^m) for a fixed degree m and reduction polynomial.

    Parameters
    ----------
    m : int
        Extension degree.
    reduction_poly : int, optional
        Degree-m irreducible polynomial as a bit vector (bit i is the
        coefficient of x^i).  Defaults to the entry of ``DEFAULT_POLYS``.

    Raises
    ------
    ValueError
        If the polynomial has the wrong degree or is reducible.
    """

    __slots__ = ("m", "poly", "mask", "elem_size", "_tail_shifts")

    def __init__(self, m: int, reduction_poly: int | None = None):
        if m < 2:
            raise ValueError(f"extension degree must be >= 2, got {m}")
        if reduction_poly is None:
            try:
                reduction_poly = DEFAULT_POLYS[m]
            except KeyError:
                raise ValueError(f"no default reduction polynomial for m={m}") from None
        if reduction_poly.bit_length() - 1 != m:
            raise ValueError(f"reduction polynomial must have degree {m}")
        if not is_irreducible(reduction_poly):
            raise ValueError(f"reduction polynomial 0x{reduction_poly:x} is reducible")
        self.m = m
        self.poly = reduction_poly
        self.mask = (1 << m) - 1
        self.elem_size = (m + 7) // 8
        # x^m == tail (mod poly); folding by the tail's set bits reduces a
        # 2m-bit product in a couple of passes for low-weight polynomials.
        tail = reduction_poly ^ (1 << m)
        self._tail_shifts = tuple(i for i in range(m) if (tail >> i) & 1)

    def __repr__(self) -> str:
        return f"FieldContext(m={self.m}, poly=0x{self.poly:x})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldContext)
            and self.m == other.m
            and self.poly == other.poly
        )

    def __hash__(self) -> int:
        return hash((self.m, self.poly))

    # -- arithmetic ----------------------------------------------------

    @staticmethod
    def add(x: int, y: int) -> int:
        """Field addition: coefficient-wise XOR."""
        return x ^ y

    def _reduce(self, r: int) -> int:
        mask = self.mask
        m = self.m
        shifts = self._tail_shifts
        while r > mask:
            hi = r >> m
            r &= mask
            for s in shifts:
                r ^= hi << s
        return r

    def mul(self, x: int, y: int) -> int:
        """Field product, 4-bit windowed carry-less multiply then reduce."""
        if x == 0 or y == 0:
            return 0
        t1 = y << 1
        t2 = t1 ^ y
        t3 = y << 2
        t4 = y << 3
        tab = (0, y, t1, t2, t3, t3 ^ y, t3 ^ t1, t3 ^ t2,
               t4, t4 ^ y, t4 ^ t1, t4 ^ t2,
               t4 ^ t3, t4 ^ t3 ^ y, t4 ^ t3 ^ t1, t4 ^ t3 ^ t2)
        r = 0
        sh = 0
        while x:
            r ^= tab[x & 15] << sh
            x >>= 4
            sh += 4
        return self._reduce(r)

    def sqr(self, x: int) -> int:
        return self.mul(x, x)

    def inv(self, x: int) -> int:
        """Multiplicative inverse via the binary extended Euclidean
        algorithm on polynomials.  Raises ValueError for zero (zero input
        signals malformed key material upstream)."""
        if x == 0:
            raise ValueError("zero has no multiplicative inverse")
        u, v = x, self.poly
        g1, g2 = 1, 0
        while u != 1:
            j = u.bit_length() - v.bit_length()
            if j < 0:
                u, v = v, u
                g1, g2 = g2, g1
                j = -j
            u ^= v << j
            g1 ^= g2 << j
        return self._reduce(g1)

    def pow(self, x: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(x), -e)
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, x)
            x = self.sqr(x)
            e >>= 1
        return r

    # -- coordinates and encoding --------------------------------------

    def coords(self, x: int) -> np.ndarray:
        """Coordinates of x in the polynomial basis, as a (m,) uint8 array.

        Entry l is the coefficient of x^l, i.e. the projection of the
        element onto the l-th basis vector.
        """
        raw = np.frombuffer(x.to_bytes(self.elem_size, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.m]

    def from_coords(self, v) -> int:
        """Inverse of :meth:`coords`."""
        bits = np.asarray(v, dtype=np.uint8)
        if bits.shape != (self.m,):
            raise ValueError(f"expected {self.m} coordinates, got shape {bits.shape}")
        packed = np.packbits(bits, bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    def encode(self, x: int) -> bytes:
        """Canonical byte encoding: ceil(m/8) bytes, little-endian, the
        coefficient of x^0 in the least significant bit of byte 0."""
        if not 0 <= x <= self.mask:
            raise ValueError("element out of range for this field")
        return x.to_bytes(self.elem_size, "little")

    def decode(self, data: bytes) -> int:
        if len(data) != self.elem_size:
            raise ValueError(f"expected {self.elem_size} bytes, got {len(data)}")
        x = int.from_bytes(data, "little")
        if x > self.mask:
            raise ValueError("unused high bits must be zero")
        return x

    # -- sampling -------------------------------------------------------

    def random_element(self, rng: random.Random) -> int:
        return rng.getrandbits(self.m)

    def random_nonzero(self, rng: random.Random) -> int:
        for _ in range(_RESAMPLE_CAP):
            x = rng.getrandbits(self.m)
            if x:
                return x
        raise RuntimeError("resampling cap exceeded drawing a nonzero element")

    def elements(self):
        """Iterate over the whole field (small m only)."""
        if self.m > 24:
            raise ValueError("field too large to enumerate")
        return range(1 << self.m)


@lru_cache(maxsize=None)
def field(m: int, reduction_poly: int | None = None) -> FieldContext:
    """Shared, cached context for the given degree."""
    return FieldContext(m, reduction_poly)
