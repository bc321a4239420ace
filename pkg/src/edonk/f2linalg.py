"""Dense linear algebra over GF(2).

Matrices pack their rows into uint64 words (bit j of word w is column
64*w + j), which keeps Gaussian elimination on the multi-thousand-row
systems of key generation and the attack at word speed.  Vectors at API
boundaries are plain 0/1 numpy uint8 arrays.

Also provides the expansion of an affine system over GF(2^m) whose
unknowns are constrained to an F2-subspace into a plain GF(2) system,
and a solver that exploits the case where all coefficient/value products
live in a low-dimensional subspace.

All operations return new values; inputs are never mutated.
"""

from __future__ import annotations

import random

import numpy as np

_ONE = np.uint64(1)


def _pack_rows(dense: np.ndarray, cols: int) -> np.ndarray:
    """Pack a (rows, cols) 0/1 uint8 array into (rows, ceil(cols/64)) uint64."""
    rows = dense.shape[0]
    words = max((cols + 63) // 64, 1)
    if rows == 0:
        return np.zeros((0, words), dtype=np.uint64)
    packed = np.packbits(dense, axis=1, bitorder="little")
    out = np.zeros((rows, words * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view(np.uint64)


class BitMatrix:
    """Dense matrix over GF(2) with packed row storage."""

    __slots__ = ("words", "rows", "cols")

    def __init__(self, words: np.ndarray, rows: int, cols: int):
        self.words = words
        self.rows = rows
        self.cols = cols

    # -- constructors ---------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, max((cols + 63) // 64, 1)), dtype=np.uint64), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        dense = np.atleast_2d(np.asarray(array, dtype=np.uint8)) & 1
        rows, cols = dense.shape
        return cls(_pack_rows(dense, cols), rows, cols)

    @classmethod
    def from_row_ints(cls, ints, cols: int) -> "BitMatrix":
        """Rows given as ints, bit j of each int being column j."""
        ints = list(ints)
        nbytes = max((cols + 63) // 64, 1) * 8
        buf = b"".join(x.to_bytes(nbytes, "little") for x in ints)
        words = np.frombuffer(buf, dtype=np.uint64).reshape(len(ints), nbytes // 8).copy()
        return cls(words, len(ints), cols)

    # -- accessors ------------------------------------------------------

    def dense(self) -> np.ndarray:
        """Unpacked (rows, cols) uint8 copy."""
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        bits = np.unpackbits(self.words.view(np.uint8), axis=1, bitorder="little")
        return bits[:, : self.cols]

    def row_int(self, i: int) -> int:
        return int.from_bytes(self.words[i].tobytes(), "little")

    def row_ints(self) -> list[int]:
        return [self.row_int(i) for i in range(self.rows)]

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) out of bounds for {self.rows}x{self.cols}")
        w, sh = divmod(j, 64)
        return int((self.words[i, w] >> np.uint64(sh)) & _ONE)

    def column(self, j: int) -> np.ndarray:
        w, sh = divmod(j, 64)
        return ((self.words[:, w] >> np.uint64(sh)) & _ONE).astype(np.uint8)

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.words.copy(), self.rows, self.cols)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.dense().T)

    def mul(self, other: "BitMatrix") -> "BitMatrix":
        """GF(2) matrix product.

        Goes through float32 BLAS; exact because every inner dimension in
        this package is far below 2^24.
        """
        if self.cols != other.rows:
            raise ValueError(f"dimension mismatch: {self.cols} vs {other.rows}")
        a = self.dense().astype(np.float32)
        b = other.dense().astype(np.float32)
        prod = (a @ b).astype(np.int64) & 1
        return BitMatrix.from_dense(prod.astype(np.uint8))

    def matvec(self, v) -> np.ndarray:
        """Product with a column vector, returned as a (rows,) uint8 array."""
        vec = np.asarray(v, dtype=np.uint8).reshape(-1)
        if vec.shape[0] != self.cols:
            raise ValueError(f"dimension mismatch: {self.cols} vs {vec.shape[0]}")
        prod = self.dense().astype(np.float32) @ vec.astype(np.float32)
        return (prod.astype(np.int64) & 1).astype(np.uint8)

    def is_zero(self) -> bool:
        return not self.words.any()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.words, other.words)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"

    def to_text(self) -> str:
        """ASCII dump, one '0'/'1' row per line, for cross-implementation diffs."""
        dense = self.dense()
        return "\n".join("".join("1" if b else "0" for b in row) for row in dense)


def _rref_in_place(words: np.ndarray, rows: int, n_pivot_cols: int) -> list[int]:
    """Reduce packed rows to RREF, searching pivots left to right in the
    first ``n_pivot_cols`` columns.  Returns the pivot column list."""
    pivots: list[int] = []
    r = 0
    for c in range(n_pivot_cols):
        if r >= rows:
            break
        w, sh = divmod(c, 64)
        shift = np.uint64(sh)
        col = (words[r:, w] >> shift) & _ONE
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
        col_all = (words[:, w] >> shift) & _ONE
        col_all[r] = 0
        sel = np.nonzero(col_all)[0]
        if sel.size:
            words[sel] ^= words[r]
        pivots.append(c)
        r += 1
    return pivots


def rref(M: BitMatrix) -> tuple[BitMatrix, list[int], int]:
    """Reduced row echelon form.

    Returns ``(R, pivots, rank)`` with R row-equivalent to M.  Leftmost
    pivots and deterministic tie-breaking, so equal inputs give equal
    outputs.
    """
    words = M.words.copy()
    pivots = _rref_in_place(words, M.rows, M.cols)
    return BitMatrix(words, M.rows, M.cols), pivots, len(pivots)


def rank(M: BitMatrix) -> int:
    return rref(M)[2]


def _nullspace_from_rref(rdense: np.ndarray, pivots: list[int], cols: int) -> BitMatrix:
    pivset = set(pivots)
    free = [c for c in range(cols) if c not in pivset]
    if not free:
        return BitMatrix.zeros(0, cols)
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    basis[np.arange(len(free)), free] = 1
    if pivots:
        basis[:, pivots] = rdense[: len(pivots)][:, free].T
    return BitMatrix.from_dense(basis)


def nullspace_basis(M: BitMatrix) -> BitMatrix:
    """Rows form a basis of ``{x : M x^T = 0}``; count = cols - rank(M)."""
    R, pivots, rnk = rref(M)
    rdense = R.dense()[:rnk]
    return _nullspace_from_rref(rdense, pivots, M.cols)


def solve_affine(M: BitMatrix, b) -> tuple[np.ndarray | None, BitMatrix]:
    """Solve ``M x^T = b^T`` over GF(2).

    Returns ``(x0, kernel)`` where the solution set is x0 + rowspan(kernel),
    or ``(None, kernel)`` when the system is inconsistent.  x0 is the
    particular solution with all free variables zero.
    """
    vec = np.asarray(b, dtype=np.uint8).reshape(-1)
    if vec.shape[0] != M.rows:
        raise ValueError(f"dimension mismatch: {M.rows} rows vs {vec.shape[0]} rhs")
    cols = M.cols
    aug = BitMatrix.zeros(M.rows, cols + 1)
    aug.words[:, : M.words.shape[1]] = M.words
    w, sh = divmod(cols, 64)
    aug.words[:, w] |= vec.astype(np.uint64) << np.uint64(sh)
    pivots = _rref_in_place(aug.words, aug.rows, cols)
    rnk = len(pivots)
    rdense = aug.dense()
    kernel = _nullspace_from_rref(rdense[:rnk, :cols], pivots, cols)
    if rdense[rnk:, cols].any():
        return None, kernel
    x0 = np.zeros(cols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x0[p] = rdense[i, cols]
    return x0, kernel


def is_orthogonal(P: BitMatrix) -> bool:
    """True iff P P^T = I over GF(2)."""
    if P.rows != P.cols:
        raise ValueError("orthogonality is only defined for square matrices")
    return P.mul(P.transpose()) == BitMatrix.identity(P.rows)


def random_even_vector(n: int, rng: random.Random) -> np.ndarray:
    """Uniform vector of even Hamming weight (n-1 free bits plus parity)."""
    bits = np.zeros(n, dtype=np.uint8)
    head = rng.getrandbits(n - 1) if n > 1 else 0
    for i in range(n - 1):
        bits[i] = (head >> i) & 1
    bits[n - 1] = int(bits[: n - 1].sum()) & 1
    return bits


def random_orthogonal(n: int, rounds: int | None = None, rng: random.Random | None = None) -> BitMatrix:
    """Random orthogonal matrix over GF(2).

    Product of a uniform permutation matrix with ``rounds`` factors
    (I + u u^T) for random even-weight u; over GF(2) each factor is
    orthogonal exactly when u^T u = 0, i.e. u has even weight.  With
    rounds=0 this is a pure permutation matrix.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if rng is None:
        raise ValueError("an explicit rng is required")
    if rounds is None:
        rounds = 2 * n
    perm = list(range(n))
    rng.shuffle(perm)
    P = np.zeros((n, n), dtype=np.uint8)
    P[np.arange(n), perm] = 1
    for _ in range(rounds):
        u = random_even_vector(n, rng)
        w = (P.astype(np.uint16) @ u) & 1        # P u
        P ^= np.outer(w, u).astype(np.uint8)     # P (I + u u^T)
    return BitMatrix.from_dense(P)


def random_even_colweight(rows: int, cols: int, rng: random.Random) -> BitMatrix:
    """Uniform binary matrix whose every column has even Hamming weight."""
    if rows < 2:
        raise ValueError("need at least 2 rows for even column weights")
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for j in range(cols):
        dense[:, j] = random_even_vector(rows, rng)
    return BitMatrix.from_dense(dense)


# -- subspace-constrained systems over GF(2^m) --------------------------


def _elements_to_bits(ctx, elems) -> np.ndarray:
    """Coordinate rows of a list of field elements as a (len, m) uint8 array."""
    elems = list(elems)
    if not elems:
        return np.zeros((0, ctx.m), dtype=np.uint8)
    buf = b"".join(x.to_bytes(ctx.elem_size, "little") for x in elems)
    raw = np.frombuffer(buf, dtype=np.uint8).reshape(len(elems), ctx.elem_size)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, : ctx.m]


def _check_vbasis(ctx, vbasis) -> None:
    if len(vbasis) == 0:
        raise ValueError("subspace basis must be non-empty")
    bits = _elements_to_bits(ctx, vbasis)
    if rank(BitMatrix.from_dense(bits)) != len(vbasis):
        raise ValueError("subspace basis elements are F2-dependent")


def expand_affine_system(ctx, A, b, vbasis) -> tuple[BitMatrix, np.ndarray]:
    """Expand ``A x^T = b^T`` over GF(2^m) with ``x_j`` constrained to the
    span of ``vbasis`` into a GF(2) system.

    Writing x_j = sum_i x_ji v_i, the returned pair ``(M, beta)`` satisfies:
    x solves the original system iff the flattened bit vector (x_ji)
    solves ``M (x_ji)^T = beta^T``.  Column (j, i) sits at index j*t + i
    (entry-major); the GF(2) equation obtained from original row k by
    projecting on basis coordinate l sits at row k*m + l.  The fixed
    layout makes serialized intermediate systems reproducible.
    """
    _check_vbasis(ctx, vbasis)
    A = [list(row) for row in A]
    r = len(A)
    n = len(A[0]) if r else 0
    t = len(vbasis)
    m = ctx.m
    if len(b) != r:
        raise ValueError(f"rhs length {len(b)} does not match {r} rows")
    if any(len(row) != n for row in A):
        raise ValueError("ragged coefficient matrix")

    mul = ctx.mul
    memo: dict[int, list[int]] = {}
    out = np.zeros((r * m, t * n), dtype=np.uint8)
    for k in range(r):
        prods: list[int] = []
        for a_kj in A[k]:
            per = memo.get(a_kj)
            if per is None:
                per = [mul(a_kj, v) for v in vbasis]
                memo[a_kj] = per
            prods.extend(per)
        # column j*t + i of block k is coords(a_kj * v_i)
        out[k * m : (k + 1) * m, :] = _elements_to_bits(ctx, prods).T
    beta = _elements_to_bits(ctx, list(b)).reshape(-1) if r else np.zeros(0, dtype=np.uint8)
    return BitMatrix.from_dense(out) if r * m else BitMatrix.zeros(0, t * n), beta


class SpanReducer:
    """Echelonized basis of the span of a generating set, with coordinate
    extraction relative to that basis."""

    def __init__(self, ctx, generators):
        self.ctx = ctx
        rows: list[tuple[int, int]] = []  # (pivot bit, reduced value)
        for g in generators:
            v = g
            for piv, val in rows:
                if (v >> piv) & 1:
                    v ^= val
            if v:
                rows.append((v.bit_length() - 1, v))
                rows.sort(reverse=True)
        # full reduction for a canonical basis
        for i in range(len(rows)):
            piv_i, val_i = rows[i]
            for j in range(len(rows)):
                if i != j and (rows[j][1] >> piv_i) & 1:
                    rows[j] = (rows[j][0], rows[j][1] ^ val_i)
        self.rows = rows
        self.dim = len(rows)

    def coords(self, z: int) -> int | None:
        """Bit i of the result multiplies basis row i; None if z not in span."""
        c = 0
        for i, (piv, val) in enumerate(self.rows):
            if (z >> piv) & 1:
                z ^= val
                c |= 1 << i
        return c if z == 0 else None


_PROJECT_MAX_DISTINCT = 64


def subspace_system(ctx, A, b, vbasis) -> tuple[BitMatrix, np.ndarray] | None:
    """A GF(2) system row-equivalent to ``expand_affine_system(ctx, A, b,
    vbasis)`` (same solution set, same column layout).

    When the coefficient entries take few distinct values, all products
    a_kj * v_i live in a low-dimensional subspace W; projecting each
    original equation onto a basis of W shrinks the row count from r*m to
    r*dim(W) without changing the solutions.  Returns None when some rhs
    entry falls outside W, which proves the system inconsistent.
    """
    _check_vbasis(ctx, vbasis)
    A = [list(row) for row in A]
    r = len(A)
    n = len(A[0]) if r else 0
    t = len(vbasis)
    distinct = {a for row in A for a in row if a}
    if len(distinct) > _PROJECT_MAX_DISTINCT:
        return expand_affine_system(ctx, A, b, vbasis)
    mul = ctx.mul
    prods = {a: [mul(a, v) for v in vbasis] for a in distinct}
    red = SpanReducer(ctx, [p for per in prods.values() for p in per])
    w = red.dim
    if w >= ctx.m // 2 + 1:
        return expand_affine_system(ctx, A, b, vbasis)

    # per distinct entry value: a (w, t) block of product coordinates
    values = [0] + sorted(distinct)
    index = {a: i for i, a in enumerate(values)}
    blocks = np.zeros((len(values), w, t), dtype=np.uint8)
    for a, per in prods.items():
        for i, p in enumerate(per):
            cb = red.coords(p)
            for l in range(w):
                blocks[index[a], l, i] = (cb >> l) & 1
    entry_idx = np.array([[index[a] for a in row] for row in A], dtype=np.intp)
    # (r, n, w, t) -> rows grouped per original equation, columns entry-major
    out = blocks[entry_idx].transpose(0, 2, 1, 3).reshape(r * w, t * n)
    beta = np.zeros(r * w, dtype=np.uint8)
    for k in range(r):
        bk = red.coords(b[k])
        if bk is None:
            return None
        for l in range(w):
            beta[k * w + l] = (bk >> l) & 1
    return BitMatrix.from_dense(out) if r * w else BitMatrix.zeros(0, t * n), beta


def solve_subspace_system(ctx, A, b, vbasis) -> tuple[np.ndarray | None, BitMatrix | None]:
    """Solve ``A x^T = b^T`` with x_j constrained to span(vbasis).

    Returns ``(x0_bits, kernel)`` in the expand_affine_system column
    layout, or ``(None, None)`` when inconsistent.
    """
    system = subspace_system(ctx, A, b, vbasis)
    if system is None:
        return None, None
    M, beta = system
    x0, kernel = solve_affine(M, beta)
    if x0 is None:
        return None, kernel
    return x0, kernel


def nullspace_subspace_system(ctx, A, vbasis) -> BitMatrix:
    """Basis of ``{x in span(vbasis)^n : A x^T = 0}`` in bit coordinates."""
    n = len(A[0]) if len(A) else 0
    system = subspace_system(ctx, A, [0] * len(A), vbasis)
    assert system is not None  # zero rhs always lies in W
    return nullspace_basis(system[0])


def combine_bits_to_word(ctx, bits, vbasis) -> list[int]:
    """Map a solution bit vector (x_ji) back to the word x_j = sum x_ji v_i."""
    t = len(vbasis)
    vec = np.asarray(bits, dtype=np.uint8).reshape(-1)
    n = vec.shape[0] // t
    out = []
    for j in range(n):
        acc = 0
        base = j * t
        for i in range(t):
            if vec[base + i]:
                acc ^= vbasis[i]
        out.append(acc)
    return out
