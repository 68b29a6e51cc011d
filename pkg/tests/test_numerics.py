"""Numerics tests: wrap arithmetic, float emulation, block FP, reductions.

Derived expectations are checked against independent oracles built here:
a wide-integer mod-2^w oracle for wrapping, and an enumerate-all-values
round-to-nearest-even oracle for the emulated float formats.
"""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incsim.numerics import (
    AccumulatorPolicy,
    BlockFP,
    ElemType,
    ElemValue,
    PolicyKind,
    ReductionOrder,
    SparseVec,
    add_wrap,
    cast,
    decode_block,
    dense_switchover,
    digest_values,
    div_trunc,
    encode_block,
    error_vs_oracle,
    expected_density,
    fold_left,
    from_bits,
    mul_wrap,
    quantize,
    reduce_with_order,
    scalar_add,
    sparse_sum,
    to_bits,
)
from incsim.numerics import _FLOAT_SPECS  # white-box: enumeration oracle


def wrap_oracle(width: int, x: int) -> int:
    """Independent two's-complement oracle: reduce mod 2^w into signed range."""
    m = 1 << width
    r = x % m
    return r - m if r >= m // 2 else r


# ---------------------------------------------------------------- integers


def test_int4_add_mul_exhaustive_vs_wide_oracle():
    for a in range(-8, 8):
        for b in range(-8, 8):
            assert add_wrap(ElemType.INT4, a, b).value == wrap_oracle(4, a + b)
            assert mul_wrap(ElemType.INT4, a, b).value == wrap_oracle(4, a * b)


def test_int8_add_mul_exhaustive_vs_wide_oracle():
    for a in range(-128, 128, 7):
        for b in range(-128, 128):
            assert add_wrap(ElemType.INT8, a, b).value == wrap_oracle(8, a + b)
            assert mul_wrap(ElemType.INT8, a, b).value == wrap_oracle(8, a * b)


def test_int4_known_points():
    assert add_wrap(ElemType.INT4, 7, 5).value == -4
    assert mul_wrap(ElemType.INT4, 4, 3).value == -4
    assert div_trunc(ElemType.INT4, -4, 2).value == -2


def test_div_truncates_toward_zero():
    assert div_trunc(ElemType.INT8, -7, 2).value == -3
    assert div_trunc(ElemType.INT8, 7, -2).value == -3
    assert div_trunc(ElemType.INT8, -7, -2).value == 3


def test_div_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        div_trunc(ElemType.INT4, 3, 0)
    with pytest.raises(ZeroDivisionError):
        div_trunc(ElemType.FP32, 3.0, 0.0)
    with pytest.raises(ZeroDivisionError):
        div_trunc(ElemType.FP8_E4M3, 3.0, 0.0)


@given(st.integers(-(2**40), 2**40), st.integers(-(2**40), 2**40))
def test_int32_wrap_matches_oracle(a, b):
    assert add_wrap(ElemType.INT32, a, b).value == wrap_oracle(32, wrap_oracle(32, a) + wrap_oracle(32, b))
    assert mul_wrap(ElemType.INT32, a, b).value == wrap_oracle(32, wrap_oracle(32, a) * wrap_oracle(32, b))


def test_fold_left_additive_trace():
    r = fold_left(ElemType.INT4, 7, [("-", 5), ("+", 5), ("+", 5), ("-", 3), ("-", 7)])
    assert r.trace == (7, 2, 7, -4, -7, 2)
    assert r.final.value == 2


def test_fold_left_multiplicative_trace():
    r = fold_left(ElemType.INT4, 2, [("*", 2), ("*", 3), ("/", 2)])
    assert r.trace == (2, 4, -4, -2)
    assert r.final.value == -2


def test_fold_left_rejects_unknown_operator():
    with pytest.raises(ValueError):
        fold_left(ElemType.INT8, 1, [("%", 2)])


# ---------------------------------------------------------------- casts


def test_cast_narrowing_wraps():
    v = ElemValue.from_number(ElemType.INT32, 12)
    assert cast(v, ElemType.INT4).value == -4


def test_cast_widening_exact():
    for x in range(-8, 8):
        v = ElemValue.from_number(ElemType.INT4, x)
        assert cast(v, ElemType.INT32).value == x
        assert cast(v, ElemType.FP32).value == float(x)


def test_cast_float_to_int_rounds_then_wraps():
    v = ElemValue.from_number(ElemType.FP32, 130.6)
    assert cast(v, ElemType.INT8).value == wrap_oracle(8, 131)
    half = ElemValue.from_number(ElemType.FP32, 2.5)
    assert cast(half, ElemType.INT32).value == 2  # ties to even


def test_fp8_subset_of_fp32_roundtrips():
    spec = _FLOAT_SPECS[ElemType.FP8_E4M3]
    for bits in range(256):
        if spec.classify(bits) != "finite":
            continue
        x = from_bits(ElemType.FP8_E4M3, bits)
        rt = cast(cast(ElemValue(ElemType.FP8_E4M3, bits), ElemType.FP32), ElemType.FP8_E4M3)
        assert rt.value == x or (x == 0 and rt.value == 0)


# ------------------------------------------------- emulated float formats


def enumerate_finite(spec):
    """All finite values of a format as (Fraction, significand) pairs."""
    out = []
    for ef in range(1 << spec.ebits):
        for mant in range(1 << spec.mbits):
            bits = (ef << spec.mbits) | mant
            if spec.classify(bits) != "finite":
                continue
            if ef == 0:
                q, e = mant, spec.emin
            else:
                q, e = (1 << spec.mbits) + mant, ef - spec.bias
            val = Fraction(q) * (Fraction(2) ** (e - spec.mbits))
            out.append((val, q))
    out.sort()
    return out


def rne_oracle(spec, x: Fraction):
    """Search-based round-to-nearest-even over the enumerated value set.

    Returns a Fraction for finite results or the string 'overflow'.
    """
    if x == 0:
        return Fraction(0)
    neg = x < 0
    a = -x if neg else x
    grid = enumerate_finite(spec)
    positives = [(v, q) for v, q in grid if v > 0]
    # virtual next point above the max, for the overflow tie decision
    top_v, top_q = positives[-1]
    ulp_top = Fraction(2) ** (spec.emax - spec.mbits)
    positives.append((top_v + ulp_top, top_q + 1))
    lo = Fraction(0)
    lo_q = 0
    best = None
    for v, q in positives:
        if v >= a:
            d_lo, d_hi = a - lo, v - a
            if d_lo < d_hi:
                best = (lo, lo_q)
            elif d_hi < d_lo:
                best = (v, q)
            else:
                best = (lo, lo_q) if lo_q % 2 == 0 else (v, q)
            break
        lo, lo_q = v, q
    if best is None or best[0] > top_v:
        return "overflow"
    return -best[0] if neg else best[0]


@pytest.mark.parametrize("etype", [ElemType.FP8_E4M3, ElemType.FP8_E5M2])
def test_fp8_ops_match_enumeration_oracle(etype):
    spec = _FLOAT_SPECS[etype]
    finite = [bits for bits in range(256) if spec.classify(bits) == "finite"]
    rng = random.Random(20260822)
    pairs = [(rng.choice(finite), rng.choice(finite)) for _ in range(600)]
    for abits, bbits in pairs:
        fa, fb = spec.decode_exact(abits), spec.decode_exact(bbits)
        for op, exact in (("+", fa + fb), ("*", fa * fb)):
            got = (add_wrap if op == "+" else mul_wrap)(
                etype, ElemValue(etype, abits), ElemValue(etype, bbits)
            )
            want = rne_oracle(spec, exact)
            if want == "overflow":
                assert spec.classify(got.bits) in ("inf", "nan")
            else:
                assert Fraction(got.value) == want, (op, fa, fb)
        if fb != 0:
            got = div_trunc(etype, ElemValue(etype, abits), ElemValue(etype, bbits))
            want = rne_oracle(spec, fa / fb)
            if want == "overflow":
                assert spec.classify(got.bits) in ("inf", "nan")
            else:
                assert Fraction(got.value) == want


def test_bf16_spot_values_vs_oracle():
    spec = _FLOAT_SPECS[ElemType.BF16]
    cases = [
        (1.0, 2.0**-9),         # exact tie at half ulp of 1.0 -> stays 1.0
        (1.0, 2.0**-8),          # one ulp -> 1 + 2^-8
        (3.0, 5.0),
        (1.5, 2.0**-60),         # far below precision -> unchanged
        (2.0**100, 2.0**-100),
    ]
    for a, b in cases:
        got = add_wrap(ElemType.BF16, a, b).value
        want = rne_oracle(spec, Fraction(a) + Fraction(b))
        assert Fraction(got) == want


def test_e4m3_overflow_is_nan_e5m2_is_inf():
    big = quantize(ElemType.FP8_E4M3, 1e6)
    assert math.isnan(big)
    assert quantize(ElemType.FP8_E5M2, 1e9) == math.inf
    assert quantize(ElemType.FP8_E5M2, -1e9) == -math.inf


def test_e4m3_max_finite_and_tie():
    assert quantize(ElemType.FP8_E4M3, 448.0) == 448.0
    assert quantize(ElemType.FP8_E4M3, 464.0) == 448.0  # tie, even mantissa stays
    assert math.isnan(quantize(ElemType.FP8_E4M3, 465.0))


def test_nan_is_canonical_and_propagates():
    t = ElemType.FP8_E5M2
    nan_bits = _FLOAT_SPECS[t].nan_bits
    v = ElemValue.from_number(t, math.nan)
    assert v.bits == nan_bits
    r = add_wrap(t, v, ElemValue.from_number(t, 1.0))
    assert r.bits == nan_bits
    assert to_bits(ElemType.FP32, math.nan) == 0x7FC00000


def test_signed_zero_rules():
    t = ElemType.BF16
    neg = ElemValue.from_number(t, -0.0)
    pos = ElemValue.from_number(t, 0.0)
    assert math.copysign(1.0, add_wrap(t, neg, neg).value) < 0
    assert math.copysign(1.0, add_wrap(t, neg, pos).value) > 0
    one = ElemValue.from_number(t, -1.0)
    assert math.copysign(1.0, mul_wrap(t, one, pos).value) < 0


def test_fp32_matches_native_ieee():
    import numpy as np

    rng = random.Random(7)
    for _ in range(300):
        a = rng.uniform(-1e9, 1e9)
        b = rng.uniform(-1e9, 1e9)
        got = add_wrap(ElemType.FP32, a, b).value
        assert got == float(np.float32(np.float32(a) + np.float32(b)))
        assert scalar_add(ElemType.FP32, quantize(ElemType.FP32, a), quantize(ElemType.FP32, b)) == got


@given(st.integers(0, 255), st.integers(0, 255))
@settings(max_examples=300)
def test_scalar_helpers_agree_with_bit_ops(abits, bbits):
    t = ElemType.FP8_E4M3
    spec = _FLOAT_SPECS[t]
    if spec.classify(abits) != "finite" or spec.classify(bbits) != "finite":
        return
    a, b = from_bits(t, abits), from_bits(t, bbits)
    lhs = scalar_add(t, a, b)
    rhs = add_wrap(t, ElemValue(t, abits), ElemValue(t, bbits)).value
    assert (math.isnan(lhs) and math.isnan(rhs)) or lhs == rhs


# ----------------------------------------------------- ordered reductions


WITNESS = [[1.0], [1e8], [-1e8]]


def test_reduction_order_witness_changes_result():
    p = AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    r1 = reduce_with_order(ReductionOrder(((0, 1), 2)), WITNESS, ElemType.FP32, p)
    r2 = reduce_with_order(ReductionOrder((0, (1, 2))), WITNESS, ElemType.FP32, p)
    assert r1.values == (0.0,)
    assert r2.values == (1.0,)
    assert r1.digest != r2.digest


def test_reduction_digest_deterministic_across_runs_and_layouts():
    p = AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    order = ReductionOrder(((0, 1), (2, 3)))
    base = [[0.1 * i + 0.01 * j for j in range(8)] for i in range(4)]
    ref = reduce_with_order(order, base, ElemType.FP32, p).digest
    for _ in range(1000):
        rebuilt = [list(reversed(list(reversed(row)))) for row in base]
        assert reduce_with_order(order, rebuilt, ElemType.FP32, p).digest == ref


def test_reduction_single_leaf_identity():
    p = AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    r = reduce_with_order(ReductionOrder.left_to_right(1), [[3.0, 4.0]], ElemType.FP32, p)
    assert r.values == (3.0, 4.0)


def test_reduction_int_orders_agree():
    p = AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    vals = [[7, -3], [5, 6], [5, -8], [-3, 2]]
    orders = [
        ReductionOrder.left_to_right(4),
        ReductionOrder(((0, 1), (2, 3))),
        ReductionOrder((3, (2, (1, 0)))),
    ]
    digests = {reduce_with_order(o, vals, ElemType.INT32, p).digest for o in orders}
    assert len(digests) == 1


def test_reduction_wide_policy_downcasts_at_root():
    p = AccumulatorPolicy(PolicyKind.WIDE_EVERYWHERE, wide_type=ElemType.INT32)
    vals = [[100], [100], [-150]]  # partial sums overflow int8, total fits
    r = reduce_with_order(ReductionOrder.left_to_right(3), vals, ElemType.INT8, p)
    assert r.values == (50,)
    narrow = reduce_with_order(
        ReductionOrder.left_to_right(3), vals, ElemType.INT8, AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    )
    assert narrow.values == (50,)  # mod-256 wrap self-corrects for pure adds


def test_reduction_order_validation():
    with pytest.raises(ValueError):
        ReductionOrder((0, 0))
    with pytest.raises(ValueError):
        ReductionOrder((0, 2))
    with pytest.raises(ValueError):
        reduce_with_order(
            ReductionOrder((0, 1)), [[1.0], [2.0], [3.0]], ElemType.FP32,
            AccumulatorPolicy(PolicyKind.SAME_AS_INPUT),
        )


def test_wide_policy_must_be_at_least_input_width():
    p = AccumulatorPolicy(PolicyKind.WIDE_EVERYWHERE, wide_type=ElemType.INT8)
    with pytest.raises(ValueError):
        p.validate_against(ElemType.INT32)


# -------------------------------------------------------------- block FP


def test_block_all_zeros():
    b = encode_block([0.0] * 16)
    assert b.scale_exp == 0 and set(b.mantissas) == {0}


def test_block_254_needs_scale_two():
    b = encode_block([254.0] + [0.0] * 15)
    assert b.scale_exp == 1 and b.mantissas[0] == 127
    assert decode_block(b)[0] == 254.0


def test_block_roundtrip_error_bound():
    rng = random.Random(99)
    for _ in range(200):
        vals = [rng.uniform(-1000, 1000) for _ in range(16)]
        b = encode_block(vals)
        scale = math.ldexp(1.0, b.scale_exp)
        for v, d in zip(vals, decode_block(b)):
            assert abs(v - d) <= scale / 2 + 1e-12 * abs(v)


@given(st.lists(st.floats(-1e30, 1e30, allow_nan=False, allow_infinity=False), min_size=16, max_size=16))
@settings(max_examples=200)
def test_block_scale_is_minimal_power_of_two(vals):
    b = encode_block(vals)
    limit = 127
    maxabs = max(abs(v) for v in vals)
    assert maxabs <= limit * math.ldexp(1.0, b.scale_exp)
    if maxabs > 0 and b.scale_exp > -128:
        assert maxabs > limit * math.ldexp(1.0, b.scale_exp - 1)


def test_block_rejects_nonfinite_and_bad_size():
    with pytest.raises(ValueError):
        encode_block([math.inf] + [0.0] * 15)
    with pytest.raises(ValueError):
        encode_block([1.0] * 5, block_size=16)
    with pytest.raises(ValueError):
        BlockFP(300, (0,) * 16)


# ---------------------------------------------------------------- sparse


def test_sparse_union_and_cancellation():
    a = SparseVec.from_pairs(10, [(1, 2.0), (4, -1.0)])
    b = SparseVec.from_pairs(10, [(4, 1.0), (7, 3.0)])
    s = sparse_sum(a, b)
    assert s.indices == (1, 7)  # index 4 cancelled exactly
    assert s.values == (2.0, 3.0)


def test_sparse_disjoint_union_nnz():
    vecs = [SparseVec.from_pairs(64, [(i, 1.0)]) for i in range(8)]
    acc = vecs[0]
    for v in vecs[1:]:
        acc = sparse_sum(acc, v)
    assert acc.nnz == 8


@given(
    st.lists(st.tuples(st.integers(0, 31), st.integers(-5, 5)), max_size=20),
    st.lists(st.tuples(st.integers(0, 31), st.integers(-5, 5)), max_size=20),
)
def test_sparse_sum_matches_dense_oracle(pa, pb):
    def build(pairs):
        acc = {}
        for i, v in pairs:
            acc[i] = acc.get(i, 0.0) + float(v)
        return SparseVec.from_pairs(32, [(i, v) for i, v in acc.items() if v != 0.0])

    a, b = build(pa), build(pb)
    s = sparse_sum(a, b)
    dense = [x + y for x, y in zip(a.to_dense(), b.to_dense())]
    assert s.to_dense() == dense
    assert all(v != 0.0 for v in s.values)


def test_expected_density_values():
    assert expected_density(0.01, 1) == pytest.approx(0.01)
    assert expected_density(0.01, 64) == pytest.approx(1 - 0.99**64)
    assert abs(expected_density(0.01, 64) - 0.4744) < 1e-3
    assert expected_density(1.0, 3) == 1.0
    with pytest.raises(ValueError):
        expected_density(1.5, 2)


def test_dense_switchover_strict_boundary():
    assert dense_switchover(100, 51, 4, 4)
    assert not dense_switchover(100, 50, 4, 4)  # equality is not a switchover
    assert not dense_switchover(100, 49, 4, 4)


# -------------------------------------------------------- error reporting


def test_error_zero_for_exact_int_reduction():
    vals = [[3, -1], [4, 2]]
    stats = error_vs_oracle([7, 1], vals)
    assert stats.max_abs == 0.0 and stats.max_rel == 0.0


def test_error_nonzero_when_int4_overflows():
    vals = [[7], [7], [7]]
    p = AccumulatorPolicy(PolicyKind.SAME_AS_INPUT)
    r = reduce_with_order(ReductionOrder.left_to_right(3), vals, ElemType.INT4, p)
    stats = error_vs_oracle(r.values, vals)
    assert stats.max_abs == 16.0  # 21 wraps to 5


def test_fp8_sum_of_64_ones_matches_hand_rounded_oracle():
    t = ElemType.FP8_E4M3
    acc = quantize(t, 1.0)
    for _ in range(63):
        acc = scalar_add(t, acc, 1.0)
    # hand-rounded: exact up to 16, then 16+1 ties back down to 16 forever
    assert acc == 16.0
    stats = error_vs_oracle([acc], [[1.0]] * 64)
    assert stats.max_abs == 48.0


def test_digest_is_width_fixed_hex():
    d = digest_values(ElemType.FP32, [1.0, 2.0])
    assert len(d) == 16
    int(d, 16)
