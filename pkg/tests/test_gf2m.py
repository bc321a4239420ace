"""Field arithmetic tests, pinned by independent oracles."""

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edonk.gf2m import DEFAULT_POLYS, FieldContext, field, is_irreducible


# -- independent oracles -------------------------------------------------

def oracle_clmul(a: int, b: int) -> int:
    """Schoolbook carry-less multiply, bit by bit."""
    r = 0
    while a:
        if a & 1:
            r ^= b
        a >>= 1
        b <<= 1
    return r


def oracle_polydiv(a: int, p: int) -> int:
    """Long division remainder of binary polynomials."""
    dp = p.bit_length() - 1
    while a.bit_length() - 1 >= dp and a:
        a ^= p << (a.bit_length() - 1 - dp)
    return a


def oracle_mul(ctx: FieldContext, x: int, y: int) -> int:
    return oracle_polydiv(oracle_clmul(x, y), ctx.poly)


def oracle_irreducible(p: int) -> bool:
    """Trial division by every polynomial of degree <= deg(p)/2."""
    m = p.bit_length() - 1
    for d in range(1, m // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if oracle_polydiv(p, f) == 0:
                return False
    return True


# -- construction --------------------------------------------------------

def test_default_polys_construct():
    for m in DEFAULT_POLYS:
        ctx = FieldContext(m)
        assert ctx.m == m


def test_reducible_poly_rejected():
    with pytest.raises(ValueError):
        FieldContext(4, (1 << 4) | 1)   # x^4 + 1 = (x+1)^4
    with pytest.raises(ValueError):
        FieldContext(4, (1 << 3) | 1)   # wrong degree


def test_irreducibility_against_trial_division():
    for p in range(1 << 2, 1 << 11):
        assert is_irreducible(p) == oracle_irreducible(p), f"poly 0x{p:x}"


# -- arithmetic ----------------------------------------------------------

def test_aes_field_vectors():
    ctx = field(8)
    assert ctx.add(0x53, 0x0F) == 0x5C
    assert ctx.mul(0x53, 0xCA) == 0x01
    assert ctx.inv(0x53) == 0xCA


def test_add_self_cancels():
    ctx = field(16)
    rng = random.Random(7)
    for _ in range(100):
        x = ctx.random_element(rng)
        assert ctx.add(x, x) == 0
        assert ctx.add(x, 0) == x


@pytest.mark.parametrize("m", [4, 8, 12])
def test_mul_matches_schoolbook_oracle(m):
    ctx = field(m)
    rng = random.Random(m)
    for _ in range(1000):
        x, y = rng.getrandbits(m), rng.getrandbits(m)
        assert ctx.mul(x, y) == oracle_mul(ctx, x, y)


def test_mul_matches_oracle_m128_m192():
    for m in (128, 192):
        ctx = field(m)
        rng = random.Random(m)
        for _ in range(200):
            x, y = rng.getrandbits(m), rng.getrandbits(m)
            assert ctx.mul(x, y) == oracle_mul(ctx, x, y)


def test_mul_identity_absorbing():
    ctx = field(128)
    rng = random.Random(3)
    for _ in range(50):
        x = ctx.random_element(rng)
        assert ctx.mul(x, 1) == x
        assert ctx.mul(x, 0) == 0


def test_inv_exhaustive_m8():
    ctx = field(8)
    for x in range(1, 256):
        brute = next(y for y in range(1, 256) if oracle_mul(ctx, x, y) == 1)
        assert ctx.inv(x) == brute


def test_inv_of_zero_raises():
    with pytest.raises(ValueError):
        field(16).inv(0)


def test_inv_property_large_fields():
    for m in (128, 192):
        ctx = field(m)
        rng = random.Random(m + 1)
        assert ctx.inv(1) == 1
        for _ in range(100):
            x = ctx.random_nonzero(rng)
            assert ctx.mul(x, ctx.inv(x)) == 1


@settings(max_examples=200)
@given(st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1))
def test_ring_axioms_m16(x, y, z):
    ctx = field(16)
    assert ctx.mul(ctx.add(x, y), z) == ctx.add(ctx.mul(x, z), ctx.mul(y, z))
    assert ctx.mul(x, ctx.mul(y, z)) == ctx.mul(ctx.mul(x, y), z)
    assert ctx.mul(x, y) == ctx.mul(y, x)


def test_ring_axioms_m128_bulk():
    # randomized algebraic check at production size
    ctx = field(128)
    rng = random.Random(11)
    for _ in range(2000):
        x, y, z = (rng.getrandbits(128) for _ in range(3))
        assert ctx.mul(ctx.add(x, y), z) == ctx.add(ctx.mul(x, z), ctx.mul(y, z))
        assert ctx.mul(x, ctx.mul(y, z)) == ctx.mul(ctx.mul(x, y), z)


@settings(max_examples=200)
@given(st.integers(0, 2**12 - 1), st.integers(0, 2**12 - 1))
def test_frobenius(x, y):
    ctx = field(12)
    lhs = ctx.sqr(ctx.add(x, y))
    assert lhs == ctx.add(ctx.sqr(x), ctx.sqr(y))


def test_pow():
    ctx = field(8)
    rng = random.Random(5)
    for _ in range(50):
        x = ctx.random_nonzero(rng)
        assert ctx.pow(x, 255) == 1          # multiplicative group order
        assert ctx.pow(x, -1) == ctx.inv(x)


# -- coordinates and encoding --------------------------------------------

def test_coords_basics():
    ctx = field(16)
    assert not ctx.coords(0).any()
    one = ctx.coords(1)
    assert one[0] == 1 and one[1:].sum() == 0


@settings(max_examples=100)
@given(st.integers(0, 2**16 - 1))
def test_coords_roundtrip(x):
    ctx = field(16)
    assert ctx.from_coords(ctx.coords(x)) == x


def test_coords_roundtrip_m128():
    ctx = field(128)
    rng = random.Random(9)
    for _ in range(100):
        x = ctx.random_element(rng)
        v = ctx.coords(x)
        assert v.shape == (128,)
        assert ctx.from_coords(v) == x


def test_encode_decode():
    ctx = field(12)
    rng = random.Random(1)
    for _ in range(100):
        x = ctx.random_element(rng)
        enc = ctx.encode(x)
        assert len(enc) == 2
        assert ctx.decode(enc) == x
    with pytest.raises(ValueError):
        ctx.decode(b"\xff\xff")      # high bits beyond m must be zero
    with pytest.raises(ValueError):
        ctx.decode(b"\x00")          # wrong length
    with pytest.raises(ValueError):
        ctx.encode(1 << 12)


# -- sampling ------------------------------------------------------------

def test_random_element_deterministic():
    ctx = field(128)
    a = ctx.random_element(random.Random(0xE0))
    b = ctx.random_element(random.Random(0xE0))
    assert a == b


def test_random_element_uniform_m4():
    # frequency of each of the 16 elements within 5 sigma of uniform
    ctx = field(4)
    rng = random.Random(42)
    n = 10_000
    counts = np.zeros(16, dtype=np.int64)
    for _ in range(n):
        counts[ctx.random_element(rng)] += 1
    expected = n / 16
    sigma = (n * (1 / 16) * (15 / 16)) ** 0.5
    assert np.all(np.abs(counts - expected) < 5 * sigma)


def test_random_nonzero_never_zero():
    ctx = field(4)
    rng = random.Random(2)
    assert all(ctx.random_nonzero(rng) != 0 for _ in range(1_000_000))
