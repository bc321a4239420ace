"""Rank-metric primitives over GF(2^m)^n.

A word is a sequence of field elements (plain ints) interpreted through a
shared FieldContext.  Its rank weight is the GF(2) rank of the m x n
coordinate matrix; its support is the F2-subspace of GF(2^m) spanned by
its entries.  Subspaces are held in canonical reduced-echelon form so
equality is structural and serialization deterministic.

Also implements the generic LRPC syndrome decoder (parity-check entries
spanning a small subspace F, error support recovered by intersecting the
scaled syndrome supports) and the two-element variant used both by the
legitimate decapsulation and by the attack, where the parity-check
entries all lie in span{1, lam} and the error support is contained in
(1 + lam)^-1 times the syndrome support.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import f2linalg as fl
from .f2linalg import BitMatrix
from .gf2m import FieldContext

Word = Sequence[int]

_ENUM_CAP = 24


class DecodingFailure(Exception):
    """Decoding beyond capability, or an inconsistent constrained system."""


def matrix_of(ctx: FieldContext, x: Word) -> BitMatrix:
    """The m x n coordinate matrix of a word: column j holds coords(x_j)."""
    return BitMatrix.from_dense(fl._elements_to_bits(ctx, list(x)).T)


def rank_weight(ctx: FieldContext, x: Word) -> int:
    """Rank of the coordinate matrix; equals dim(support(x))."""
    return fl.rank(matrix_of(ctx, x))


class Subspace:
    """F2-subspace of GF(2^m), stored as a canonical reduced basis.

    Basis rows are in reduced echelon form with strictly decreasing pivot
    bits, which makes representation (and therefore ==) unique per
    subspace.
    """

    __slots__ = ("ctx", "basis", "dim")

    def __init__(self, ctx: FieldContext, elems: Iterable[int]):
        rows: list[tuple[int, int]] = []
        for g in elems:
            v = g
            for piv, val in rows:
                if (v >> piv) & 1:
                    v ^= val
            if v:
                rows.append((v.bit_length() - 1, v))
                rows.sort(reverse=True)
        for i in range(len(rows)):
            piv_i = rows[i][0]
            for j in range(len(rows)):
                if i != j and (rows[j][1] >> piv_i) & 1:
                    rows[j] = (rows[j][0], rows[j][1] ^ rows[i][1])
        self.ctx = ctx
        self.basis = tuple(val for _, val in rows)
        self.dim = len(rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ctx == other.ctx
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ctx, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, m={self.ctx.m})"

    def contains(self, x: int) -> bool:
        for val in self.basis:
            if (x >> (val.bit_length() - 1)) & 1:
                x ^= val
        return x == 0

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def enumerate(self) -> list[int]:
        """All 2^dim elements, ordered by increasing coefficient mask over
        the canonical basis (mask bit i selects basis[i])."""
        if self.dim > _ENUM_CAP:
            raise ValueError(f"refusing to enumerate a subspace of dim {self.dim}")
        out = [0]
        for v in self.basis:
            out += [x ^ v for x in out]
        # out is already in mask order: element k = xor of basis[i] for bits of k
        return out

    def dump(self) -> str:
        """Hex element list of the basis, for debugging diffs."""
        width = 2 * self.ctx.elem_size
        return " ".join(f"{v:0{width}x}" for v in self.basis)


def span(ctx: FieldContext, elems: Iterable[int]) -> Subspace:
    return Subspace(ctx, elems)


def support(ctx: FieldContext, x: Word) -> Subspace:
    """Supp(x): the subspace spanned by the word's entries."""
    return Subspace(ctx, x)


def contains(V: Subspace, x: int) -> bool:
    return V.contains(x)


def scale(lam: int, V: Subspace) -> Subspace:
    """{lam * v : v in V}; a bijection of V, so the dimension is preserved."""
    if lam == 0:
        raise ValueError("scaling a subspace by zero collapses it")
    ctx = V.ctx
    return Subspace(ctx, (ctx.mul(lam, v) for v in V.basis))


def product(U: Subspace, V: Subspace) -> Subspace:
    """Linear span of all pairwise products; basis products suffice."""
    if U.ctx != V.ctx:
        raise ValueError("subspace product needs a shared context")
    ctx = U.ctx
    return Subspace(ctx, (ctx.mul(u, v) for u in U.basis for v in V.basis))


def intersect(U: Subspace, V: Subspace) -> Subspace:
    """U intersect V via the kernel of the stacked coordinate matrix."""
    if U.ctx != V.ctx:
        raise ValueError("subspace intersection needs a shared context")
    ctx = U.ctx
    if U.dim == 0 or V.dim == 0:
        return Subspace(ctx, ())
    stacked = BitMatrix.from_row_ints(list(U.basis) + list(V.basis), ctx.m)
    kernel = fl.nullspace_basis(stacked.transpose())
    elems = []
    for r in range(kernel.rows):
        coeffs = kernel.dense()[r]
        acc = 0
        for i in range(U.dim):
            if coeffs[i]:
                acc ^= U.basis[i]
        elems.append(acc)
    return Subspace(ctx, elems)


def word_combine(ctx: FieldContext, x: Word, B: BitMatrix) -> list[int]:
    """Apply a binary matrix to a word: y_i = xor over {j : B_ij = 1} of x_j.

    This is B x^T with the word entries viewed as GF(2)-vectors, the
    workhorse for syndromes of binary (or binary-decomposed) parity
    checks.
    """
    if B.cols != len(x):
        raise ValueError(f"matrix has {B.cols} columns, word has {len(x)} entries")
    xbits = fl._elements_to_bits(ctx, list(x))            # (n, m)
    ybits = (B.dense().astype(np.float32) @ xbits.astype(np.float32)).astype(np.int64) & 1
    out = []
    es = ctx.elem_size
    padded = np.zeros((B.rows, es * 8), dtype=np.uint8)
    padded[:, : ctx.m] = ybits.astype(np.uint8)
    raw = np.packbits(padded, axis=1, bitorder="little")
    for i in range(B.rows):
        out.append(int.from_bytes(raw[i].tobytes(), "little"))
    return out


def field_matvec(ctx: FieldContext, H, x: Word) -> list[int]:
    """Plain matrix-vector product over GF(2^m)."""
    mul = ctx.mul
    out = []
    for row in H:
        acc = 0
        for a, xx in zip(row, x):
            if a and xx:
                acc ^= mul(a, xx)
        out.append(acc)
    return out


def lrpc_decode(ctx: FieldContext, H, y: Word, F: Subspace, r: int) -> list[int]:
    """Generic LRPC syndrome decoding.

    H is an (n-k) x n parity-check matrix whose entries lie in the small
    subspace F; decodes an error of rank weight at most r when
    dim(F) * r <= n - k.  Steps: syndrome s = H y^T, V = Supp(s),
    E = intersection of f^-1 V over the basis of F, then solve
    H e^T = s^T with every e_i constrained to E.

    Raises DecodingFailure when the recovered candidate support exceeds r
    (decoding beyond capability) or the constrained system is
    inconsistent.  When the solution is not unique the representative
    with all free variables zero is returned; callers that need a unique
    answer must verify downstream (e.g. against a hash tag).
    """
    s = field_matvec(ctx, H, y)
    if not any(s):
        return [0] * len(y)
    V = support(ctx, s)
    E = None
    for f in F.basis:
        scaled = scale(ctx.inv(f), V)
        E = scaled if E is None else intersect(E, scaled)
    if E is None or E.dim == 0:
        raise DecodingFailure("empty candidate support with a nonzero syndrome")
    if E.dim > r:
        raise DecodingFailure(
            f"candidate support has dimension {E.dim} > {r}; beyond decoding capability"
        )
    x0, _ = fl.solve_subspace_system(ctx, H, s, list(E.basis))
    if x0 is None:
        raise DecodingFailure("constrained syndrome system is inconsistent")
    return fl.combine_bits_to_word(ctx, x0, list(E.basis))


def lrpc_pair_decode(
    ctx: FieldContext,
    ones: BitMatrix,
    lams: BitMatrix,
    lam: int,
    y: Word,
    max_dim: int,
) -> tuple[list[int], Subspace]:
    """Decode against a parity-check matrix with entries u + lam*w.

    ``ones`` and ``lams`` are the binary matrices (u_ij) and (w_ij); the
    check matrix row i has entry u_ij + lam * w_ij in column j.  When
    every entry is exactly 1 or lam, each syndrome coordinate equals
    (sum of all e_j) + (1 + lam) * (a binary combination of e_j), so the
    error support is contained in V = (1 + lam)^-1 Supp(s) and
    dim(V) <= w(e) + 1.

    Returns (e, V) where e solves the syndrome system with entries in V.
    V is the honest search space for the hash-chain secret even when the
    system is underdetermined and e is only a representative.
    """
    one_plus = ctx.add(1, lam)
    if one_plus == 0:
        raise ValueError("lam = 1 leaves no invertible scaling")
    p = word_combine(ctx, y, ones)
    q = word_combine(ctx, y, lams)
    s = [pi ^ ctx.mul(lam, qi) for pi, qi in zip(p, q)]
    if not any(s):
        return [0] * len(y), Subspace(ctx, ())
    V = scale(ctx.inv(one_plus), support(ctx, s))
    if V.dim > max_dim:
        raise DecodingFailure(
            f"scaled syndrome support has dimension {V.dim} > {max_dim}"
        )
    rows = [
        [(1 if u else 0) ^ (lam if w else 0) for u, w in zip(urow, wrow)]
        for urow, wrow in zip(ones.dense().tolist(), lams.dense().tolist())
    ]
    x0, _ = fl.solve_subspace_system(ctx, rows, s, list(V.basis))
    if x0 is None:
        raise DecodingFailure("constrained syndrome system is inconsistent")
    return fl.combine_bits_to_word(ctx, x0, list(V.basis)), V
