"""Binary container formats for keys, ciphertexts and shared secrets.

Every artifact starts with the header

    magic "EDNK" | version 0x01 | object tag | params id

where the params id is the 1-based index into the published parameter
table, or 0 followed by m, N, K, R, nu, L as 4-byte big-endian words for
custom sets.  Field elements are ceil(m/8) bytes little-endian (low
coefficient in the low bit of byte 0, unused high bits zero); bit
matrices are packed row-major with rows padded to byte boundaries.

Payloads:
    params         (header only)
    public key     2*nu basis elements, then K*N entries of
                   ceil(2*nu/8) bytes (coefficient masks)
    secret key     a, b, P (N rows), H (R rows)
    ciphertext     N elements, then the tag (digest length)
    shared secret  digest-length bytes
"""

from __future__ import annotations

import numpy as np

from .f2linalg import BitMatrix
from .kem import Ciphertext, PARAMETER_SETS, Params, PublicKey, SecretKey

MAGIC = b"EDNK"
VERSION = 1

OBJ_PARAMS = 1
OBJ_PUBLIC_KEY = 2
OBJ_SECRET_KEY = 3
OBJ_CIPHERTEXT = 4
OBJ_SHARED_SECRET = 5

_NAMES = list(PARAMETER_SETS)
_PARAM_ID = {name: i + 1 for i, name in enumerate(_NAMES)}


class FormatError(ValueError):
    """Malformed or mismatched serialized artifact."""


def _header(obj: int, params: Params) -> bytes:
    pid = _PARAM_ID.get(params.name, 0)
    out = MAGIC + bytes([VERSION, obj, pid])
    if pid == 0:
        for v in (params.m, params.N, params.K, params.R, params.nu, params.L):
            out += v.to_bytes(4, "big")
    return out


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated input")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def done(self) -> None:
        if self.pos != len(self.data):
            raise FormatError(f"{len(self.data) - self.pos} trailing bytes")


def _read_header(r: _Reader, expect_obj: int) -> Params:
    if r.take(4) != MAGIC:
        raise FormatError("bad magic")
    version = r.take(1)[0]
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    obj = r.take(1)[0]
    if obj != expect_obj:
        raise FormatError(f"object tag {obj}, expected {expect_obj}")
    pid = r.take(1)[0]
    if pid == 0:
        vals = [int.from_bytes(r.take(4), "big") for _ in range(6)]
        return Params(*vals)
    if pid > len(_NAMES):
        raise FormatError(f"unknown params id {pid}")
    return PARAMETER_SETS[_NAMES[pid - 1]]


def _pack_matrix(M: BitMatrix) -> bytes:
    return np.packbits(M.dense(), axis=1, bitorder="little").tobytes()


def _unpack_matrix(r: _Reader, rows: int, cols: int) -> BitMatrix:
    stride = (cols + 7) // 8
    raw = np.frombuffer(r.take(rows * stride), dtype=np.uint8).reshape(rows, stride)
    bits = np.unpackbits(raw, axis=1, bitorder="little")
    if bits[:, cols:].any():
        raise FormatError("nonzero padding bits in a packed matrix")
    return BitMatrix.from_dense(bits[:, :cols])


# -- params ---------------------------------------------------------------


def serialize_params(params: Params) -> bytes:
    return _header(OBJ_PARAMS, params)


def deserialize_params(data: bytes) -> Params:
    r = _Reader(data)
    params = _read_header(r, OBJ_PARAMS)
    r.done()
    return params


# -- public key -------------------------------------------------------------


def serialize_public_key(pk: PublicKey, params: Params) -> bytes:
    es = params.elem_size
    ms = (2 * params.nu + 7) // 8
    out = [_header(OBJ_PUBLIC_KEY, params)]
    out += [x.to_bytes(es, "little") for x in pk.basis_cd]
    for row in pk.coeffs:
        out += [mask.to_bytes(ms, "little") for mask in row]
    return b"".join(out)


def deserialize_public_key(data: bytes) -> tuple[PublicKey, Params]:
    r = _Reader(data)
    params = _read_header(r, OBJ_PUBLIC_KEY)
    ctx = params.field()
    ms = (2 * params.nu + 7) // 8
    basis = tuple(ctx.decode(r.take(ctx.elem_size)) for _ in range(2 * params.nu))
    coeffs = []
    limit = 1 << (2 * params.nu)
    for _ in range(params.K):
        row = []
        for _ in range(params.N):
            mask = int.from_bytes(r.take(ms), "little")
            if mask >= limit:
                raise FormatError("coefficient mask has nonzero padding bits")
            row.append(mask)
        coeffs.append(tuple(row))
    r.done()
    return PublicKey(basis, tuple(coeffs)), params


# -- secret key ---------------------------------------------------------------


def serialize_secret_key(sk: SecretKey, params: Params) -> bytes:
    es = params.elem_size
    return b"".join(
        [
            _header(OBJ_SECRET_KEY, params),
            sk.a.to_bytes(es, "little"),
            sk.b.to_bytes(es, "little"),
            _pack_matrix(sk.P),
            _pack_matrix(sk.H),
        ]
    )


def deserialize_secret_key(data: bytes) -> tuple[SecretKey, Params]:
    r = _Reader(data)
    params = _read_header(r, OBJ_SECRET_KEY)
    ctx = params.field()
    a = ctx.decode(r.take(ctx.elem_size))
    b = ctx.decode(r.take(ctx.elem_size))
    P = _unpack_matrix(r, params.N, params.N)
    H = _unpack_matrix(r, params.R, params.N)
    r.done()
    return SecretKey(a, b, P, H), params


# -- ciphertext / shared secret --------------------------------------------------


def serialize_ciphertext(ct: Ciphertext, params: Params) -> bytes:
    es = params.elem_size
    return (
        _header(OBJ_CIPHERTEXT, params)
        + b"".join(x.to_bytes(es, "little") for x in ct.c)
        + ct.h
    )


def deserialize_ciphertext(data: bytes) -> tuple[Ciphertext, Params]:
    r = _Reader(data)
    params = _read_header(r, OBJ_CIPHERTEXT)
    ctx = params.field()
    c = tuple(ctx.decode(r.take(ctx.elem_size)) for _ in range(params.N))
    h = r.take(params.digest_size)
    r.done()
    return Ciphertext(c, h), params


def serialize_shared_secret(ss: bytes, params: Params) -> bytes:
    if len(ss) != params.digest_size:
        raise FormatError("shared secret has the wrong length")
    return _header(OBJ_SHARED_SECRET, params) + ss


def deserialize_shared_secret(data: bytes) -> tuple[bytes, Params]:
    r = _Reader(data)
    params = _read_header(r, OBJ_SHARED_SECRET)
    ss = r.take(params.digest_size)
    r.done()
    return ss, params
