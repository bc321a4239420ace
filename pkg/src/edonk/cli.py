"""Command-line harness: keygen | encaps | decaps | attack | selftest | bench.

Every command is deterministic given --seed (byte-identical output
files).  Reports are line-delimited key=value records.  Exit codes:
0 success, 2 usage or input error, 3 KEM failure, 4 attack failure.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from . import attack as attack_mod
from . import f2linalg as fl
from . import formats
from . import kem
from . import rankmetric as rm
from .f2linalg import BitMatrix
from .kem import PARAMETER_SETS, Params

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_KEM = 3
EXIT_ATTACK = 4


def _parse_params(args) -> Params:
    if args.custom:
        try:
            vals = [int(v) for v in args.custom.split(",")]
            if len(vals) != 6:
                raise ValueError
            return Params(*vals)
        except ValueError as exc:
            raise SystemExit(
                f"error: --custom expects m,N,K,R,nu,L (got {args.custom!r}): {exc}"
            ) from None
    name = args.params or "edonk128ref"
    try:
        return PARAMETER_SETS[name]
    except KeyError:
        raise SystemExit(
            f"error: unknown parameter set {name!r}; "
            f"known: {', '.join(PARAMETER_SETS)}"
        ) from None


def _rng(args) -> random.Random:
    if args.seed is not None:
        return random.Random(int(args.seed, 16))
    return random.Random()


def _write(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def cmd_keygen(args) -> int:
    params = _parse_params(args)
    rng = _rng(args)
    pk, sk = kem.keygen(params, rng)
    _write(args.pk, formats.serialize_public_key(pk, params))
    _write(args.sk, formats.serialize_secret_key(sk, params))
    print(f"status=ok set={params.name} pk={args.pk} sk={args.sk}")
    return EXIT_OK


def cmd_encaps(args) -> int:
    pk, params = formats.deserialize_public_key(_read(args.pk))
    rng = _rng(args)
    ct, ss = kem.encapsulate(pk, params, rng)
    _write(args.ct, formats.serialize_ciphertext(ct, params))
    _write(args.ss, formats.serialize_shared_secret(ss, params))
    print(f"status=ok set={params.name} ct={args.ct} ss={args.ss}")
    return EXIT_OK


def cmd_decaps(args) -> int:
    sk, params = formats.deserialize_secret_key(_read(args.sk))
    ct, ct_params = formats.deserialize_ciphertext(_read(args.ct))
    if ct_params != params:
        print("status=failure reason=parameter-mismatch", file=sys.stderr)
        return EXIT_INPUT
    try:
        ss = kem.decapsulate(ct, sk, params, threads=args.threads)
    except kem.DecapsulationFailure as exc:
        print(f"status=failure reason={exc}")
        return EXIT_KEM
    _write(args.ss, formats.serialize_shared_secret(ss, params))
    print(f"status=ok set={params.name} ss={args.ss}")
    return EXIT_OK


def cmd_attack(args) -> int:
    pk, params = formats.deserialize_public_key(_read(args.pk))
    ct, ct_params = formats.deserialize_ciphertext(_read(args.ct))
    if ct_params != params:
        print("status=failure reason=parameter-mismatch", file=sys.stderr)
        return EXIT_INPUT
    report = attack_mod.attack(pk, ct, params, strategy=args.strategy, threads=args.threads)
    print(report.to_record())
    if not report.success:
        return EXIT_ATTACK
    if args.ss:
        _write(args.ss, formats.serialize_shared_secret(report.recovered_ss, params))
    return EXIT_OK


# -- selftest ------------------------------------------------------------------

def _oracle_mul(ctx, x, y):
    r = 0
    while x:
        if x & 1:
            r ^= y
        x >>= 1
        y <<= 1
    dp = ctx.poly.bit_length() - 1
    while r.bit_length() - 1 >= dp and r:
        r ^= ctx.poly << (r.bit_length() - 1 - dp)
    return r


def _check_field_oracle() -> bool:
    from .gf2m import field

    rng = random.Random(0xF1E1D)
    for m in (4, 8):
        ctx = field(m)
        for _ in range(1000):
            x, y = rng.getrandbits(m), rng.getrandbits(m)
            if ctx.mul(x, y) != _oracle_mul(ctx, x, y):
                return False
    aes = field(8)
    return aes.mul(0x53, 0xCA) == 1 and aes.inv(0x53) == 0xCA


def _check_field_algebra() -> bool:
    from .gf2m import field

    ctx = field(128)
    rng = random.Random(0xA16E)
    for _ in range(10_000):
        x, y, z = (rng.getrandbits(128) for _ in range(3))
        if ctx.mul(ctx.add(x, y), z) != ctx.add(ctx.mul(x, z), ctx.mul(y, z)):
            return False
        if ctx.mul(x, ctx.mul(y, z)) != ctx.mul(ctx.mul(x, y), z):
            return False
    for _ in range(200):
        x = ctx.random_nonzero(rng)
        if ctx.mul(x, ctx.inv(x)) != 1:
            return False
        y = ctx.random_element(rng)
        if ctx.sqr(x ^ y) != ctx.sqr(x) ^ ctx.sqr(y):
            return False
        if ctx.from_coords(ctx.coords(x)) != x:
            return False
    return True


def _check_linalg() -> bool:
    rng = random.Random(0x11A)
    for _ in range(50):
        rows, cols = rng.randrange(1, 12), rng.randrange(1, 12)
        dense = [[rng.getrandbits(1) for _ in range(cols)] for _ in range(rows)]
        M = BitMatrix.from_dense(dense)
        R, _, rnk = fl.rref(M)
        if fl.rref(R)[0] != R:
            return False
        N = fl.nullspace_basis(M)
        if N.rows != cols - rnk:
            return False
        if N.rows and M.mul(N.transpose()).words.any():
            return False
    return True


def _check_expand_equivalence() -> bool:
    import numpy as np

    from .gf2m import field

    ctx = field(8)
    rng = random.Random(0xE0)
    for _ in range(20):
        n, t = rng.choice([2, 3]), rng.choice([1, 2])
        vbasis = [1, 2][:t]
        A = [[rng.getrandbits(8) for _ in range(n)]]
        bits = [rng.getrandbits(1) for _ in range(t * n)]
        xstar = fl.combine_bits_to_word(ctx, bits, vbasis)
        b = [0]
        for a, x in zip(A[0], xstar):
            b[0] ^= ctx.mul(a, x)
        M, beta = fl.expand_affine_system(ctx, A, b, vbasis)
        for mask in range(1 << (t * n)):
            vec = np.array([(mask >> k) & 1 for k in range(t * n)], dtype=np.uint8)
            word = fl.combine_bits_to_word(ctx, vec, vbasis)
            direct = 0
            for a, x in zip(A[0], word):
                direct ^= ctx.mul(a, x)
            lhs = (M.dense().astype(int) @ vec) % 2
            if (direct == b[0]) != bool((lhs == beta).all()):
                return False
    return True


def _check_rank_support() -> bool:
    from .gf2m import field

    ctx = field(8)
    rng = random.Random(0x5A)
    for _ in range(300):
        w = [ctx.random_element(rng) for _ in range(rng.randrange(1, 5))]
        span = {0}
        for x in w:
            span |= {s ^ x for s in span}
        if rm.rank_weight(ctx, w) != len(span).bit_length() - 1:
            return False
        U = rm.span(ctx, [ctx.random_element(rng) for _ in range(2)])
        V = rm.span(ctx, [ctx.random_element(rng) for _ in range(2)])
        prod = {0}
        for u in U.enumerate():
            for v in V.enumerate():
                prod.add(ctx.mul(u, v))
        full = {0}
        for x in prod:
            full |= {s ^ x for s in full}
        if set(rm.product(U, V).enumerate()) != full:
            return False
        if set(rm.intersect(U, V).enumerate()) != set(U.enumerate()) & set(V.enumerate()):
            return False
    return True


_TOY = Params(m=16, N=18, K=2, R=5, nu=2, L=2, name="toy")


def _toy_identities(params: Params, trials: int, rng: random.Random) -> bool:
    ctx = params.field()
    for _ in range(trials):
        pk, sk = kem.keygen(params, rng)
        inv_sq = ctx.inv(ctx.sqr(sk.a ^ sk.b))
        c, d = ctx.mul(sk.a, inv_sq), ctx.mul(sk.b, inv_sq)
        eye = kem.substitution_product(ctx, sk.P, (c, d), sk.P, (sk.a, sk.b))
        for i in range(params.N):
            for j in range(params.N):
                if eye[i][j] != (1 if i == j else 0):
                    return False
        Gpub = kem.expand_pk(pk, params)
        Hrows = [[int(v) for v in row] for row in sk.H.dense().tolist()]
        Htilde = kem.substituted_apply(ctx, Hrows, sk.P, sk.a, sk.b)
        ab = rm.span(ctx, [sk.a, sk.b])
        if not all(ab.contains(x) for row in Htilde for x in row):
            return False
        # Gpub Htilde^T = 0
        for grow in Gpub:
            for hrow in Htilde:
                acc = 0
                for g, ht in zip(grow, hrow):
                    acc ^= ctx.mul(g, ht)
                if acc:
                    return False
        # G = Gpub P_{a,b} (inverse of the masking) must satisfy G H^T = 0
        G = kem.substituted_apply(ctx, Gpub, sk.P.transpose(), sk.a, sk.b)
        for grow in G:
            for hrow in Hrows:
                acc = 0
                for g, hbit in zip(grow, hrow):
                    if hbit:
                        acc ^= g
                if acc:
                    return False
    return True


def _check_kem_identities() -> bool:
    return _toy_identities(_TOY, 5, random.Random(0x1DE))


def _check_proposition_inclusion() -> bool:
    params = _TOY
    ctx = params.field()
    rng = random.Random(0x9F0)
    pk, sk = kem.keygen(params, rng)
    alpha = attack_mod.recover_alpha(pk, params)
    chk = attack_mod.reconstruct_h3(pk, alpha, params)
    one_plus = ctx.add(1, alpha)
    for _ in range(50):
        chain, _, _ = kem.error_chain(params, rng)
        Ve = rm.span(ctx, chain)
        elems = Ve.enumerate()
        e = [elems[rng.getrandbits(Ve.dim)] for _ in range(params.N)]
        s = rm.field_matvec(ctx, chk.rows, e)
        sigma = 0
        for x in e:
            sigma ^= x
        bound = rm.span(
            ctx,
            [ctx.mul(one_plus, v) for v in rm.support(ctx, e).basis] + [sigma],
        )
        if not bound.contains_subspace(rm.support(ctx, s)):
            return False
        if any(s) and rm.scale(ctx.inv(one_plus), rm.support(ctx, s)).dim > params.L + 1:
            return False
    return True


def _check_attack_end_to_end() -> bool:
    params = _TOY
    rng = random.Random(0xA77)
    hits = 0
    for _ in range(20):
        pk, sk = kem.keygen(params, rng)
        ct, ss = kem.encapsulate(pk, params, rng)
        report = attack_mod.attack(pk, ct, params, strategy="auto")
        if report.success and report.recovered_ss == ss:
            hits += 1
    # toy R leaves a visible syndrome-deficiency rate; the break must still
    # land on a clear majority of instances
    return hits >= 14


_CHECKS = [
    ("field_mul_oracle", _check_field_oracle),
    ("field_algebra", _check_field_algebra),
    ("gf2_linalg", _check_linalg),
    ("expand_equivalence", _check_expand_equivalence),
    ("rank_support_subspaces", _check_rank_support),
    ("kem_identities", _check_kem_identities),
    ("proposition_inclusion", _check_proposition_inclusion),
    ("attack_end_to_end", _check_attack_end_to_end),
]


def cmd_selftest(args) -> int:
    ok = True
    for name, fn in _CHECKS:
        t0 = time.perf_counter()
        passed = fn()
        ok &= passed
        print(f"check={name} ok={int(passed)} time_ms={int((time.perf_counter()-t0)*1000)}")
    print(f"status={'ok' if ok else 'failure'}")
    return EXIT_OK if ok else 1


def cmd_bench(args) -> int:
    names = list(PARAMETER_SETS) if args.params in (None, "all") else [args.params]
    seed = int(args.seed, 16) if args.seed is not None else 0xB
    for name in names:
        try:
            params = PARAMETER_SETS[name]
        except KeyError:
            raise SystemExit(f"error: unknown parameter set {name!r}") from None
        rng = random.Random(seed)
        agg: dict[str, list[float]] = {}
        for _ in range(args.trials):
            t0 = time.perf_counter()
            pk, sk = kem.keygen(params, rng)
            agg.setdefault("keygen", []).append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            ct, ss = kem.encapsulate(pk, params, rng)
            agg.setdefault("encaps", []).append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            kem.decapsulate(ct, sk, params)
            agg.setdefault("decaps", []).append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            report = attack_mod.attack(pk, ct, params, strategy=args.strategy)
            agg.setdefault("attack_total", []).append(time.perf_counter() - t0)
            if not (report.success and report.recovered_ss == ss):
                print(f"set={name} status=attack-failure")
                return EXIT_ATTACK
            for phase, us in report.timings_us.items():
                agg.setdefault(f"attack_{phase}", []).append(us / 1e6)
        for op, vals in agg.items():
            mean_us = int(sum(vals) / len(vals) * 1e6)
            print(f"set={name} op={op} trials={len(vals)} mean_us={mean_us}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edonk",
        description="Edon-K KEM and the attack that recovers its shared secrets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, needs_seed=True):
        p.add_argument("--params", help="named parameter set (default edonk128ref)")
        p.add_argument("--custom", help="custom parameters m,N,K,R,nu,L")
        if needs_seed:
            p.add_argument("--seed", help="64-bit hex seed for reproducible output")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("keygen", help="generate a keypair")
    common(p)
    p.add_argument("--pk", required=True)
    p.add_argument("--sk", required=True)
    p.set_defaults(fn=cmd_keygen)

    p = sub.add_parser("encaps", help="encapsulate a fresh shared secret")
    common(p)
    p.add_argument("--pk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--ss", required=True)
    p.set_defaults(fn=cmd_encaps)

    p = sub.add_parser("decaps", help="decapsulate with the secret key")
    common(p, needs_seed=False)
    p.add_argument("--sk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--ss", required=True)
    p.set_defaults(fn=cmd_decaps)

    p = sub.add_parser("attack", help="recover the secret from pk + ciphertext")
    common(p, needs_seed=False)
    p.add_argument("--pk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--ss", help="write the recovered secret here")
    p.add_argument("--strategy", choices=("rank2", "binary", "auto"), default="auto")
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("selftest", help="run the invariant suite")
    common(p)
    p.set_defaults(fn=cmd_selftest)

    p = sub.add_parser("bench", help="per-phase timings across parameter sets")
    common(p)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--strategy", choices=("rank2", "binary", "auto"), default="auto")
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_INPUT
        raise
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
