"""Recovery of the encapsulated secret from the public key and ciphertext.

The compressed public key hands the attacker alpha = a/b directly (ratio
of corresponding basis elements).  Every row of the secret check matrix
H P_{a,b}^T, scaled by b^-1, lies in span{1, alpha}^N and annihilates the
public code, so solving

    Gpub x^T = 0,   x_i in span{1, alpha}

over GF(2) (one bit pair per coordinate) reconstructs an equivalent
parity-check matrix.  Its syndrome on the ciphertext confines the error
support to a subspace V of dimension at most L+1, and the hash-chain
seed pair is then found by enumerating V x V, exactly as the legitimate
decapsulation would.

The binary variant skips alpha entirely: binary vectors annihilating
Gpub always exist (rank >= R-1), their syndrome support sits inside the
error support, and the same pair enumeration finishes the job.  Either
route recovers the shared secret in polynomial time plus an O(L 2^{2L})
search; both are far below any claimed security level.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import f2linalg as fl
from . import kem
from . import rankmetric as rm
from .f2linalg import BitMatrix
from .kem import Ciphertext, Params, PublicKey
from .rankmetric import DecodingFailure, Subspace


class AttackFailure(Exception):
    """A phase of the attack could not complete."""


@dataclass(frozen=True)
class ReconstructedCheck:
    """Parity-check matrix recovered from the public key alone.

    rows hold the field entries; ones/alphas are the binary coefficient
    matrices of 1 and alpha per entry (alphas is all-zero for the binary
    kind).  Every row annihilates the public code.
    """

    rows: tuple[tuple[int, ...], ...]
    alpha: int | None
    kind: str                      # "rank2" | "binary"
    ones: BitMatrix
    alphas: BitMatrix


@dataclass
class AttackReport:
    success: bool
    variant: str | None = None
    recovered_ss: bytes | None = None
    e: tuple[int, ...] | None = None
    support_dim: int | None = None
    timings_us: dict = dc_field(default_factory=dict)
    chain_evals: int = 0
    failure: str | None = None

    def to_record(self) -> str:
        """Line-delimited key=value record (greppable, diffable)."""
        lines = [
            f"success={int(self.success)}",
            f"variant={self.variant or '-'}",
            f"support_dim={self.support_dim if self.support_dim is not None else '-'}",
            f"chain_evals={self.chain_evals}",
        ]
        for phase, us in self.timings_us.items():
            lines.append(f"time_{phase}_us={us}")
        lines.append(f"ss={self.recovered_ss.hex() if self.recovered_ss else '-'}")
        if self.failure:
            lines.append(f"failure={self.failure}")
        return "\n".join(lines)


def recover_alpha(pk: PublicKey, params: Params) -> int:
    """alpha = a/b, read off the compressed key basis as
    (c g_1) / (d g_1) = c/d = a/b."""
    ctx = params.field()
    nu = len(pk.basis_cd) // 2
    num, den = pk.basis_cd[0], pk.basis_cd[nu]
    if num == 0 or den == 0:
        raise ValueError("degenerate public key basis element")
    return ctx.mul(num, ctx.inv(den))


def reconstruct_h3(pk: PublicKey, alpha: int, params: Params) -> ReconstructedCheck:
    """Recover parity-check rows with entries exactly in {1, alpha}.

    Expands {x in span{1, alpha}^N : Gpub x^T = 0} into K*m GF(2)
    equations over 2N bit unknowns.  The nullspace is strictly larger
    than the span of the secret check rows: binary annihilators always
    exist (the even-row-combination argument behind the binary variant)
    and so do their (1+alpha)^-1 multiples, so the dimension is 2R-1 for
    honest keys.  A raw basis mixes those in and loses the property that
    every syndrome coordinate is (sum of all e_j) + (1+alpha)*(binary
    combination of e_j), which is what caps the decoder search space at
    dimension L+1.  The affine slice of solutions whose 1-pattern and
    alpha-pattern are complementary, i.e. entries exactly in {1, alpha},
    is found by one small secondary affine solve over the nullspace
    coefficients; it yields R independent rows for honest keys, each
    behaving like a row of the secret check matrix (and the secret rows
    lie in their span).
    """
    ctx = params.field()
    if alpha in (0, 1):
        raise ValueError("alpha must be neither 0 nor 1")
    Gpub = kem.expand_pk(pk, params)
    M, _ = fl.expand_affine_system(ctx, Gpub, [0] * params.K, [1, alpha])
    null = fl.nullspace_basis(M)
    nd = null.dense()
    # columns of the secondary system: the u ^ w pattern of each nullspace
    # row; solutions of A c = (1, ..., 1) combine to {1, alpha}-entry rows
    uw = nd[:, 0::2] ^ nd[:, 1::2]
    c0, ker = fl.solve_affine(
        BitMatrix.from_dense(uw.T), np.ones(params.N, dtype=np.uint8)
    )
    if c0 is None:
        raise AttackFailure(
            "no annihilating rows with entries exactly {1, alpha}; key is not honest"
        )
    coeff_rows = [c0]
    kd = ker.dense()
    for i in range(ker.rows):
        coeff_rows.append(c0 ^ kd[i])
    if len(coeff_rows) < params.R:
        warnings.warn(
            f"reconstructed check has only {len(coeff_rows)} rows (expected "
            f"{params.R}); degenerate key, proceeding with available rows",
            RuntimeWarning,
            stacklevel=2,
        )
    sel = np.vstack(coeff_rows).astype(np.float32)
    sols = (sel @ nd.astype(np.float32)).astype(np.int64) & 1
    wbits = sols[:, 1::2].astype(np.uint8)
    alphas = BitMatrix.from_dense(wbits)
    ones = BitMatrix.from_dense(1 - wbits)
    rows = tuple(
        tuple(alpha if bit else 1 for bit in pattern) for pattern in wbits.tolist()
    )
    return ReconstructedCheck(rows, alpha, "rank2", ones, alphas)


def reconstruct_h4(pk: PublicKey, params: Params) -> ReconstructedCheck:
    """Binary annihilators of the public code: Gpub x^T = 0, x in {0,1}^N.

    At least R-1 independent solutions always exist (even-weight row
    combinations of the secret check matrix turn its {a, b} entries into
    {0, a+b}, and (a+b)^-1 times those rows is binary), so the attack
    works even when the key leaks no alpha.
    """
    ctx = params.field()
    Gpub = kem.expand_pk(pk, params)
    M, _ = fl.expand_affine_system(ctx, Gpub, [0] * params.K, [1])
    null = fl.nullspace_basis(M)
    if null.rows == 0:
        raise AttackFailure("no binary annihilators of the public code exist")
    rows = tuple(tuple(int(v) for v in null.dense()[i]) for i in range(null.rows))
    return ReconstructedCheck(
        rows, None, "binary", null, BitMatrix.zeros(null.rows, params.N)
    )


def attack_decode(
    chk: ReconstructedCheck, c, L: int, params: Params
) -> tuple[list[int], Subspace]:
    """Decode the ciphertext against a rank-2 reconstructed check.

    Returns (e, V): V = (1+alpha)^-1 Supp(check @ c) has dimension at most
    L+1 and contains the error support; e is a deterministic solution of
    the syndrome system with entries in V (a representative: the system
    is underdetermined whenever N > 2R, so e need not equal the
    encapsulated error, but V is what the secret search consumes).
    Raises DecodingFailure when V exceeds L+1 (internal inconsistency) or
    the constrained system is inconsistent.
    """
    if chk.kind != "rank2":
        raise ValueError("attack_decode needs a rank-2 reconstruction")
    ctx = params.field()
    return rm.lrpc_pair_decode(ctx, chk.ones, chk.alphas, chk.alpha, list(c), L + 1)


def recover_secret(
    V: Subspace, c, h: bytes, params: Params, threads: int = 1
) -> tuple[bytes, int]:
    """Enumerate V x V for the chain pair sealing the tag h.

    Returns (shared secret, chain evaluation count); the count is bounded
    by (L/2) * 2^(2 dim V).  Raises AttackFailure when no pair matches
    (the error support was degenerate, or the ciphertext dishonest).
    """
    if V.dim > params.L + 1:
        raise ValueError(f"search space of dimension {V.dim} exceeds L+1")
    ss, evals = kem.pair_search(params, V, list(c), h, threads=threads)
    if ss is None:
        raise AttackFailure("no candidate pair reproduces the ciphertext tag")
    return ss, evals


def attack_binary(
    pk: PublicKey, ct: Ciphertext, params: Params, threads: int = 1
) -> AttackReport:
    """Full secret recovery through the binary reconstruction alone."""
    report = AttackReport(success=False, variant="binary")
    ctx = params.field()
    try:
        t0 = time.perf_counter_ns()
        chk = reconstruct_h4(pk, params)
        report.timings_us["reconstruct"] = (time.perf_counter_ns() - t0) // 1000

        t0 = time.perf_counter_ns()
        s = rm.word_combine(ctx, list(ct.c), chk.ones)
        V = rm.support(ctx, s)
        report.support_dim = V.dim
        report.timings_us["decode"] = (time.perf_counter_ns() - t0) // 1000

        t0 = time.perf_counter_ns()
        ss, evals = recover_secret(V, ct.c, ct.h, params, threads=threads)
        report.timings_us["secret"] = (time.perf_counter_ns() - t0) // 1000
        report.chain_evals = evals
        report.recovered_ss = ss
        report.success = True
    except (AttackFailure, DecodingFailure, ValueError) as exc:
        report.failure = f"binary: {exc}"
    return report


def attack(
    pk: PublicKey,
    ct: Ciphertext,
    params: Params,
    strategy: str = "auto",
    threads: int = 1,
) -> AttackReport:
    """Recover the encapsulated secret from (pk, ciphertext) alone.

    strategy "rank2" runs alpha recovery, check reconstruction, rank
    decoding and the pair search; "binary" uses the alpha-free variant;
    "auto" runs rank2 and falls back to binary on any failure.  The
    returned report carries per-phase wall times; the recovered secret is
    tag-validated by construction of the search.
    """
    if strategy not in ("rank2", "binary", "auto"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "binary":
        return attack_binary(pk, ct, params, threads=threads)

    ctx = params.field()
    report = AttackReport(success=False, variant="rank2")
    try:
        t0 = time.perf_counter_ns()
        alpha = recover_alpha(pk, params)
        report.timings_us["alpha"] = (time.perf_counter_ns() - t0) // 1000

        t0 = time.perf_counter_ns()
        chk = reconstruct_h3(pk, alpha, params)
        report.timings_us["reconstruct"] = (time.perf_counter_ns() - t0) // 1000

        t0 = time.perf_counter_ns()
        e, V = attack_decode(chk, ct.c, params.L, params)
        report.e = tuple(e)
        report.support_dim = V.dim
        report.timings_us["decode"] = (time.perf_counter_ns() - t0) // 1000

        t0 = time.perf_counter_ns()
        ss, evals = recover_secret(V, ct.c, ct.h, params, threads=threads)
        report.timings_us["secret"] = (time.perf_counter_ns() - t0) // 1000
        report.chain_evals = evals
        report.recovered_ss = ss
        report.success = True
        return report
    except (AttackFailure, DecodingFailure, ValueError) as exc:
        report.failure = f"rank2: {exc}"
        if strategy == "rank2":
            return report
    fallback = attack_binary(pk, ct, params, threads=threads)
    merged = dict(report.timings_us)
    for k, v in fallback.timings_us.items():
        merged[f"binary_{k}"] = v
    fallback.timings_us = merged
    if not fallback.success:
        fallback.failure = f"{report.failure}; {fallback.failure}"
    return fallback
