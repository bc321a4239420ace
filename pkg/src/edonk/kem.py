"""The Edon-K key encapsulation mechanism.

Key generation builds a secret binary parity-check matrix H (orthogonal
bottom block, even-column-weight top block), an orthogonal N x N binary
matrix P and two field elements a != b.  The public code is generated by
G with entries in a small subspace V_g, masked by the entrywise
substitution P_{c,d} with c = a/(a+b)^2, d = b/(a+b)^2; for orthogonal P
the substituted matrices satisfy P_{c,d}^T = P_{a,b}^{-1}, which makes
the public code a subcode of the low-rank code checked by H P_{a,b}^T.
Public keys are stored compressed: every entry of Gpub lies in the
2*nu-dimensional space spanned by (c*g_i, d*g_i), so an entry is a
2*nu-bit coordinate vector.

Encapsulation hides the shared secret behind a hash chain: L field
elements are derived by iterated hashing of a random pair, the error
vector is drawn from their span, and the secret/tag pair is bound to the
ciphertext hash.  Decapsulation recovers the error support with the same
two-element rank decoder the attack uses and replays the chain from
candidate pairs.

The scheme is broken (see the attack module); this implementation exists
to reproduce the break, so no constant-time effort is made anywhere.
"""

from __future__ import annotations

import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import f2linalg as fl
from . import rankmetric as rm
from .f2linalg import BitMatrix
from .gf2m import FieldContext, field

_RESTART_CAP = 100

_HASHES = {"sha256": hashlib.sha256, "sha384": hashlib.sha384}


class DecapsulationFailure(Exception):
    """Decoding failed or no hash-chain pair reproduces the ciphertext tag."""


@dataclass(frozen=True)
class Params:
    """Parameter set: field degree m, code length N, public dimension K,
    number of parity checks R, secret-subspace dimension nu, error-chain
    length L."""

    m: int
    N: int
    K: int
    R: int
    nu: int
    L: int
    hash_id: str = ""
    name: str = "custom"

    def __post_init__(self):
        if not self.hash_id:
            object.__setattr__(self, "hash_id", "sha384" if self.m > 128 else "sha256")
        if self.hash_id not in _HASHES:
            raise ValueError(f"unsupported hash {self.hash_id!r}")
        for fieldname in ("m", "N", "K", "R", "nu", "L"):
            if getattr(self, fieldname) < 1:
                raise ValueError(f"{fieldname} must be positive")
        if self.L % 2:
            raise ValueError("L must be even (the error chain grows in pairs)")
        if not 2 * self.L < self.R:
            raise ValueError("decodability requires L < R/2")
        if self.R >= self.N:
            raise ValueError("R must be smaller than N")
        if self.K > self.N - self.R:
            raise ValueError("K may not exceed N - R")
        if 2 * self.nu > self.m:
            raise ValueError("2*nu may not exceed m")
        if self.N % 2:
            # The inverse identity P_{c,d}^T P_{a,b} = I for orthogonal P
            # only holds when N is even; every published parameter set is.
            raise ValueError("N must be even")
        if self.digest_size < 2 * self.elem_size:
            raise ValueError("hash output too short to split into a field pair")

    @property
    def elem_size(self) -> int:
        return (self.m + 7) // 8

    @property
    def digest_size(self) -> int:
        return _HASHES[self.hash_id]().digest_size

    def field(self) -> FieldContext:
        return field(self.m)

    def hash(self, data: bytes) -> bytes:
        return _HASHES[self.hash_id](data).digest()


def _table_row(name, m, N, K, R, nu, L) -> Params:
    return Params(m=m, N=N, K=K, R=R, nu=nu, L=L, name=name)


# The nine published parameter sets, loadable by name.
PARAMETER_SETS: dict[str, Params] = {
    p.name: p
    for p in (
        _table_row("edonk128ref", 128, 144, 16, 40, 8, 6),
        _table_row("edonk128K16N80nu8L6", 128, 80, 16, 40, 8, 6),
        _table_row("edonk128K08N72nu8L8", 128, 72, 8, 40, 8, 8),
        _table_row("edonk128K32N96nu4L4", 128, 96, 32, 40, 4, 4),
        _table_row("edonk128K16N80nu4L6", 128, 80, 16, 40, 4, 6),
        _table_row("edonk192ref", 192, 112, 16, 40, 8, 8),
        _table_row("edonk192K48N144nu4L4", 192, 144, 48, 40, 4, 4),
        _table_row("edonk192K32N128nu4L6", 192, 128, 32, 40, 4, 6),
        _table_row("edonk192K16N112nu4L8", 192, 112, 16, 40, 4, 8),
    )
}


@dataclass(frozen=True)
class SecretKey:
    a: int
    b: int
    P: BitMatrix
    H: BitMatrix


@dataclass(frozen=True)
class PublicKey:
    basis_cd: tuple[int, ...]                 # (c*g_1..c*g_nu, d*g_1..d*g_nu)
    coeffs: tuple[tuple[int, ...], ...]       # K x N entries, 2*nu-bit masks


@dataclass(frozen=True)
class Ciphertext:
    c: tuple[int, ...]
    h: bytes


# -- entrywise substitution ------------------------------------------------


def substitute(P: BitMatrix, u: int, v: int) -> list[list[int]]:
    """Entrywise substitution 0 -> u, 1 -> v of a binary matrix."""
    if u == 0 or v == 0 or u == v:
        raise ValueError("substitution values must be nonzero and distinct")
    dense = P.dense()
    return [[v if bit else u for bit in row] for row in dense.tolist()]


def substituted_apply(ctx: FieldContext, rows, P: BitMatrix, u: int, v: int) -> list[list[int]]:
    """rows @ substitute(P, u, v)^T without N^2 field products per row.

    Output entry (i, k) is u * (xor of row i over {j : P_kj = 0}) plus
    v * (xor over {j : P_kj = 1}); only 2 field products per entry.
    """
    out = []
    for row in rows:
        row = list(row)
        s1 = rm.word_combine(ctx, row, P)
        total = 0
        for x in row:
            total ^= x
        out.append([ctx.mul(u, total ^ s) ^ ctx.mul(v, s) for s in s1])
    return out


def substitution_product(
    ctx: FieldContext, P: BitMatrix, uv: tuple[int, int], Q: BitMatrix, xy: tuple[int, int]
) -> list[list[int]]:
    """Exact product substitute(P, *uv)^T @ substitute(Q, *xy) over GF(2^m).

    Each entry is n00*ux + n01*uy + n10*vx + n11*vy with the n's the mod-2
    counts of the four (P_ki, Q_kj) bit patterns, so four field products
    and a few GF(2) matrix products compute the whole thing; at N=144 the
    naive N^3 field-multiplication route costs minutes, this is exact and
    immediate.
    """
    u, v = uv
    x, y = xy
    if P.rows != Q.rows:
        raise ValueError("substituted product needs matching inner dimension")
    Pd = P.dense().astype(np.float32)
    Qd = Q.dense().astype(np.float32)
    n11 = (Pd.T @ Qd).astype(np.int64) & 1
    colP = (P.dense().sum(axis=0).astype(np.int64) & 1)[:, None]
    colQ = (Q.dense().sum(axis=0).astype(np.int64) & 1)[None, :]
    n10 = colP ^ n11
    n01 = colQ ^ n11
    n00 = (P.rows & 1) ^ colP ^ colQ ^ n11
    prods = (ctx.mul(u, x), ctx.mul(u, y), ctx.mul(v, x), ctx.mul(v, y))
    table = [0] * 16
    for key in range(16):
        acc = 0
        for bit in range(4):
            if (key >> bit) & 1:
                acc ^= prods[bit]
        table[key] = acc
    keys = (n00 | (n01 << 1) | (n10 << 2) | (n11 << 3)).tolist()
    return [[table[k] for k in row] for row in keys]


# -- key generation ----------------------------------------------------------


def _coeff_masks(X: np.ndarray, Pd: np.ndarray, nu: int) -> list[list[int]]:
    """Public coefficient masks for the G bit-rows X (K x nu*N).

    Entry (i, j) of Gpub is c*S0 + d*S1 where S1 = sum over {k : P_jk = 1}
    of G_ik and S0 = S1 + sum over all k; all three live in V_g, so their
    coordinates in the g basis come from GF(2) products with P.
    """
    K = X.shape[0]
    N = Pd.shape[0]
    weights = (1 << np.arange(nu)).astype(np.int64)
    out = []
    for i in range(K):
        Xi = X[i].reshape(N, nu)
        S1 = (Pd.astype(np.float32) @ Xi.astype(np.float32)).astype(np.int64) & 1
        total = Xi.sum(axis=0).astype(np.int64) & 1
        S0 = S1 ^ total[None, :]
        masks = (S0 @ weights) | ((S1 @ weights) << nu)
        out.append([int(v) for v in masks])
    return out


def keygen(params: Params, rng: random.Random) -> tuple[PublicKey, SecretKey]:
    """Generate a keypair.  Deterministic given the rng state.

    Restarts on the (exponentially unlikely) degeneracies: dependent
    secret basis elements, dependent public generator rows.  Raises
    RuntimeError if the restart cap is ever exceeded, which signals a
    pathological rng rather than bad luck.
    """
    ctx = params.field()
    N, K, R, nu = params.N, params.K, params.R, params.nu
    for _ in range(_RESTART_CAP):
        a = ctx.random_nonzero(rng)
        b = ctx.random_nonzero(rng)
        if a == b:
            continue
        gt = [ctx.random_nonzero(rng) for _ in range(nu)]
        inv_sq = ctx.inv(ctx.sqr(a ^ b))      # (a^2 + b^2)^-1 = (a + b)^-2
        c = ctx.mul(a, inv_sq)
        d = ctx.mul(b, inv_sq)
        basis_cd = tuple(ctx.mul(c, g) for g in gt) + tuple(ctx.mul(d, g) for g in gt)
        if fl.rank(BitMatrix.from_row_ints(basis_cd, ctx.m)) != 2 * nu:
            continue

        P = fl.random_orthogonal(N, rng=rng)
        H_T = fl.random_even_colweight(N - R, R, rng)
        H_B = fl.random_orthogonal(R, rng=rng)
        Hd = np.vstack([H_T.dense(), H_B.dense()]).T.copy()
        # even-weight H_T columns plus odd-weight orthogonal H_B columns
        # make every row of H odd, which keeps the substituted checks in
        # {a, b} exactly
        assert not ((Hd.sum(axis=1) & 1) ^ 1).any()
        H = BitMatrix.from_dense(Hd)

        # rows of G: uniform elements of {x in V_g^N : H x^T = 0}
        Hrows = Hd.tolist()
        null = fl.nullspace_subspace_system(ctx, Hrows, gt)
        if null.rows < K:
            continue
        nd = null.dense()
        X = None
        for _ in range(_RESTART_CAP):
            sel = np.array(
                [[rng.getrandbits(1) for _ in range(null.rows)] for _ in range(K)],
                dtype=np.uint8,
            )
            cand = (sel.astype(np.float32) @ nd.astype(np.float32)).astype(np.int64) & 1
            cand = cand.astype(np.uint8)
            if fl.rank(BitMatrix.from_dense(cand)) == K:
                X = cand
                break
        if X is None:
            continue

        coeffs = tuple(tuple(row) for row in _coeff_masks(X, P.dense(), nu))
        return PublicKey(basis_cd, coeffs), SecretKey(a, b, P, H)
    raise RuntimeError("key generation exceeded its resampling cap")


# -- compressed public key ---------------------------------------------------


def _tracking_reducer(basis: tuple[int, ...]):
    """Echelonized copy of the basis with, per row, the mask of original
    basis elements it combines."""
    rows: list[tuple[int, int, int]] = []
    for idx, g in enumerate(basis):
        v, mask = g, 1 << idx
        for piv, val, cmb in rows:
            if (v >> piv) & 1:
                v ^= val
                mask ^= cmb
        if v == 0:
            raise ValueError("basis elements are F2-dependent")
        rows.append((v.bit_length() - 1, v, mask))
        rows.sort(reverse=True)
    return rows


def compress_pk(ctx: FieldContext, Gpub, basis_cd: tuple[int, ...]) -> PublicKey:
    """Express every entry of Gpub in the given basis.

    Raises ValueError when an entry falls outside the span.
    """
    rows = _tracking_reducer(basis_cd)
    coeffs = []
    for grow in Gpub:
        out = []
        for z in grow:
            mask = 0
            for piv, val, cmb in rows:
                if (z >> piv) & 1:
                    z ^= val
                    mask ^= cmb
            if z:
                raise ValueError("matrix entry does not lie in the basis span")
            out.append(mask)
        coeffs.append(tuple(out))
    return PublicKey(tuple(basis_cd), tuple(coeffs))


def _combo_tables(basis: tuple[int, ...]) -> list[list[int]]:
    """Byte-indexed XOR-combination tables over the basis."""
    tables = []
    for lo in range(0, len(basis), 8):
        chunk = basis[lo : lo + 8]
        tab = [0] * (1 << len(chunk))
        for mask in range(1, len(tab)):
            low = mask & -mask
            tab[mask] = tab[mask ^ low] ^ chunk[low.bit_length() - 1]
        tables.append(tab)
    return tables


def expand_pk(pk: PublicKey, params: Params) -> list[list[int]]:
    """Reconstruct Gpub from the compressed coefficients."""
    tables = _combo_tables(pk.basis_cd)
    out = []
    for row in pk.coeffs:
        entries = []
        for mask in row:
            acc = 0
            for tab in tables:
                acc ^= tab[mask & 0xFF]
                mask >>= 8
            entries.append(acc)
        out.append(entries)
    return out


# -- hashing and the error chain ----------------------------------------------


def encode_word(ctx: FieldContext, word) -> bytes:
    return b"".join(ctx.encode(x) for x in word)


def _mask_tail(params: Params, chunk: bytes) -> bytes:
    """Zero the unused high bits of an encoded element (no-op for the
    byte-aligned production fields)."""
    spare = params.elem_size * 8 - params.m
    if not spare:
        return chunk
    head = chunk[:-1]
    return head + bytes([chunk[-1] & (0xFF >> spare)])


def chain_step(params: Params, state: bytes) -> bytes:
    """One step of the hash chain: hash the encoded pair, keep the first
    2*ceil(m/8) bytes as the next encoded pair."""
    es = params.elem_size
    digest = params.hash(state)
    return _mask_tail(params, digest[:es]) + _mask_tail(params, digest[es : 2 * es])


def error_chain(params: Params, rng: random.Random) -> tuple[list[int], int, int]:
    """The L-element error chain plus the secret seed pair.

    The first pair is random; each later pair is the hash of the previous
    one; (s0, s1) is the hash of the final pair.
    """
    ctx = params.field()
    e0, e1 = ctx.random_element(rng), ctx.random_element(rng)
    chain = [e0, e1]
    state = ctx.encode(e0) + ctx.encode(e1)
    es = params.elem_size
    for _ in range(params.L // 2 - 1):
        state = chain_step(params, state)
        chain.append(ctx.decode(state[:es]))
        chain.append(ctx.decode(state[es:]))
    final = chain_step(params, state)
    return chain, ctx.decode(final[:es]), ctx.decode(final[es:])


def _seal(params: Params, s0b: bytes, s1b: bytes, hc: bytes) -> tuple[bytes, bytes]:
    """(shared secret, tag) for a seed pair and a ciphertext hash."""
    return params.hash(s0b + s1b + hc), params.hash(s1b + s0b + hc)


# -- encapsulation / decapsulation ---------------------------------------------


def encapsulate(
    pk: PublicKey, params: Params, rng: random.Random
) -> tuple[Ciphertext, bytes]:
    ctx = params.field()
    Gpub = expand_pk(pk, params)
    msg = [ctx.random_element(rng) for _ in range(params.K)]
    chain, s0, s1 = error_chain(params, rng)
    Ve = rm.span(ctx, chain)
    elems = Ve.enumerate()
    e = [elems[rng.getrandbits(Ve.dim)] for _ in range(params.N)]
    mul = ctx.mul
    c = []
    for j in range(params.N):
        acc = e[j]
        for i in range(params.K):
            acc ^= mul(msg[i], Gpub[i][j])
        c.append(acc)
    hc = params.hash(encode_word(ctx, c))
    ss, tag = _seal(params, ctx.encode(s0), ctx.encode(s1), hc)
    return Ciphertext(tuple(c), tag), ss


def private_check_bits(sk: SecretKey, params: Params) -> tuple[BitMatrix, BitMatrix, int]:
    """Decompose the private parity-check H P_{a,b}^T, scaled by b^-1, into
    its binary parts: returns (ones, alphas, alpha) where entry (i, j) of
    the scaled check equals 1 if ones, alpha = a/b if alphas.

    Every row of H has odd weight, so each entry of H P_{a,b}^T is exactly
    a or b, never 0 or a+b; the two parts are complementary.
    """
    ctx = params.field()
    alpha = ctx.mul(sk.a, ctx.inv(sk.b))
    m1 = sk.H.mul(sk.P.transpose())           # parity of {k : H_ik = 1, P_jk = 1} -> value b
    alphas = BitMatrix.from_dense(1 - m1.dense())   # even b-count means value a
    return m1, alphas, alpha


def pair_search(
    params: Params, V: rm.Subspace, c, h: bytes, threads: int = 1
) -> tuple[bytes | None, int]:
    """Search V x V for a chain pair whose derived tag matches h.

    Candidates are ordered by (coefficient mask of the first element,
    coefficient mask of the second); the minimal-index match wins, also
    under thread partitioning, so results are schedule-independent.
    Returns (shared secret | None, number of chain evaluations).
    """
    ctx = params.field()
    es = params.elem_size
    hc = params.hash(encode_word(ctx, c))
    enc = [ctx.encode(x) for x in V.enumerate()]
    steps = params.L // 2
    digest = _HASHES[params.hash_id]
    aligned = params.m % 8 == 0

    def scan(lo: int, hi: int) -> tuple[int, tuple[int, bytes] | None]:
        n = len(enc)
        evals = 0
        for idx in range(lo, hi):
            state = enc[idx // n] + enc[idx % n]
            for _ in range(steps):
                if aligned:
                    state = digest(state).digest()[: 2 * es]
                else:
                    state = chain_step(params, state)
                evals += 1
                s0b, s1b = state[:es], state[es : 2 * es]
                if digest(s1b + s0b + hc).digest() == h:
                    return evals, (idx, digest(s0b + s1b + hc).digest())
        return evals, None

    total = len(enc) * len(enc)
    if threads <= 1:
        evals, hit = scan(0, total)
        return (hit[1] if hit else None), evals
    chunk = -(-total // threads)
    spans = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda s: scan(*s), spans))
    evals = sum(r[0] for r in results)
    hits = [r[1] for r in results if r[1] is not None]
    if not hits:
        return None, evals
    idx, ss = min(hits)
    return ss, evals


def decapsulate(ct: Ciphertext, sk: SecretKey, params: Params, threads: int = 1) -> bytes:
    """Recover the shared secret, or raise DecapsulationFailure.

    Decodes the error with the two-element rank decoder against the
    private check matrix, then replays the hash chain from candidate
    pairs in the recovered error support.
    """
    ctx = params.field()
    if len(ct.c) != params.N:
        raise ValueError(f"ciphertext length {len(ct.c)} does not match N={params.N}")
    ones, alphas, alpha = private_check_bits(sk, params)
    try:
        e, _ = rm.lrpc_pair_decode(ctx, ones, alphas, alpha, list(ct.c), params.L + 1)
    except rm.DecodingFailure as exc:
        raise DecapsulationFailure(f"rank decoding failed: {exc}") from None
    Ve = rm.support(ctx, e)
    ss, _ = pair_search(params, Ve, list(ct.c), ct.h, threads=threads)
    if ss is None:
        raise DecapsulationFailure("no chain pair in the error support matches the tag")
    return ss
