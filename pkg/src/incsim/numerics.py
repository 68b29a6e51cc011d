"""Bit-exact low-precision element types and reduction arithmetic.

Integer types (int4/int8/int32) wrap modulo 2^width in two's complement;
division truncates toward zero. Float types compute the mathematically
exact result and round once to nearest, ties to even, into the target
format:

  fp8_e4m3   1+4+3 bits, bias 7, no infinities, the all-ones pattern
             (S.1111.111) is NaN, max finite 448
  fp8_e5m2   1+5+2 bits, bias 15, IEEE-style inf/NaN, max finite 57344
  bf16       1+8+7 bits, bias 127, IEEE-style inf/NaN
  fp32/fp64  native IEEE single/double (numpy scalar / Python float)

fp8/bf16 ops are performed in exact rational arithmetic and then encoded,
so there is no double-rounding through a wider intermediate. All NaNs are
canonicalized to a single encoding per type.

The module also provides ordered tree reductions with stable 64-bit
digests, block floating point (a block of small integer mantissas sharing
one power-of-two scale), and sparse vectors with union fill-in semantics.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from hashlib import blake2b
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ElemType",
    "ElemValue",
    "AccumulatorPolicy",
    "PolicyKind",
    "ReductionOrder",
    "ReduceResult",
    "FoldResult",
    "ErrorStats",
    "BlockFP",
    "SparseVec",
    "add_wrap",
    "mul_wrap",
    "div_trunc",
    "cast",
    "fold_left",
    "quantize",
    "to_bits",
    "from_bits",
    "scalar_add",
    "scalar_mul",
    "scalar_div",
    "reduce_with_order",
    "digest_values",
    "encode_block",
    "decode_block",
    "sparse_sum",
    "expected_density",
    "dense_switchover",
    "error_stats",
    "error_vs_oracle",
    "REL_EPS",
]

# Floor for relative-error denominators, so near-zero oracles do not blow up.
REL_EPS = 2.0 ** -40


class ElemType(Enum):
    INT4 = "int4"
    INT8 = "int8"
    INT32 = "int32"
    FP8_E4M3 = "fp8_e4m3"
    FP8_E5M2 = "fp8_e5m2"
    BF16 = "bf16"
    FP32 = "fp32"
    FP64 = "fp64"

    @property
    def width_bits(self) -> int:
        return _WIDTH_BITS[self]

    @property
    def is_integer(self) -> bool:
        return self in _INT_WIDTH

    @property
    def is_float(self) -> bool:
        return not self.is_integer

    def nbytes(self, elems: int) -> int:
        """Bytes needed for `elems` packed values (int4 packs 2 per byte)."""
        if elems < 0:
            raise ValueError("element count must be >= 0")
        return (elems * self.width_bits + 7) // 8


_INT_WIDTH = {ElemType.INT4: 4, ElemType.INT8: 8, ElemType.INT32: 32}

_WIDTH_BITS = {
    ElemType.INT4: 4,
    ElemType.INT8: 8,
    ElemType.INT32: 32,
    ElemType.FP8_E4M3: 8,
    ElemType.FP8_E5M2: 8,
    ElemType.BF16: 16,
    ElemType.FP32: 32,
    ElemType.FP64: 64,
}


def _pow2(e: int) -> Fraction:
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def _rne_int(x: Fraction) -> int:
    """Round a rational to the nearest integer, ties to even."""
    q, r = divmod(x.numerator, x.denominator)
    twice = 2 * r
    if twice > x.denominator or (twice == x.denominator and q % 2):
        q += 1
    return q


def _wrap_int(width: int, value: int) -> int:
    mask = (1 << width) - 1
    r = value & mask
    return r - (1 << width) if r >= 1 << (width - 1) else r


@dataclass(frozen=True)
class _FloatSpec:
    """Emulated binary float format; `has_inf` selects IEEE-style specials.

    Formats without infinities (fp8_e4m3) reclaim the all-ones exponent for
    normal numbers and reserve only the all-ones exponent+mantissa pattern
    for NaN, which is where the 448 maximum comes from.
    """

    ebits: int
    mbits: int
    bias: int
    has_inf: bool

    @property
    def width(self) -> int:
        return 1 + self.ebits + self.mbits

    @property
    def emin(self) -> int:
        return 1 - self.bias

    @property
    def emax(self) -> int:
        top_field = (1 << self.ebits) - 1
        return (top_field - 1 if self.has_inf else top_field) - self.bias

    @property
    def top_mant(self) -> int:
        # Largest mantissa field usable at emax.
        return (1 << self.mbits) - (1 if self.has_inf else 2)

    @property
    def max_finite(self) -> Fraction:
        return ((1 << self.mbits) + self.top_mant) * _pow2(self.emax) / (1 << self.mbits)

    @property
    def nan_bits(self) -> int:
        exp_all = ((1 << self.ebits) - 1) << self.mbits
        mant = (1 << (self.mbits - 1)) if self.has_inf else (1 << self.mbits) - 1
        return exp_all | mant

    def inf_bits(self, sign: int) -> int:
        if not self.has_inf:
            return self.nan_bits
        return (sign << (self.ebits + self.mbits)) | (((1 << self.ebits) - 1) << self.mbits)

    def classify(self, bits: int) -> str:
        ef = (bits >> self.mbits) & ((1 << self.ebits) - 1)
        mant = bits & ((1 << self.mbits) - 1)
        if ef == (1 << self.ebits) - 1:
            if self.has_inf:
                return "inf" if mant == 0 else "nan"
            if mant == (1 << self.mbits) - 1:
                return "nan"
        return "finite"

    def decode(self, bits: int) -> float:
        kind = self.classify(bits)
        sign = (bits >> (self.ebits + self.mbits)) & 1
        if kind == "nan":
            return math.nan
        if kind == "inf":
            return -math.inf if sign else math.inf
        ef = (bits >> self.mbits) & ((1 << self.ebits) - 1)
        mant = bits & ((1 << self.mbits) - 1)
        if ef == 0:
            mag = math.ldexp(mant, self.emin - self.mbits)
        else:
            mag = math.ldexp((1 << self.mbits) + mant, ef - self.bias - self.mbits)
        return -mag if sign else mag

    def decode_exact(self, bits: int) -> Fraction:
        if self.classify(bits) != "finite":
            raise ValueError("cannot decode a non-finite value exactly")
        sign = (bits >> (self.ebits + self.mbits)) & 1
        ef = (bits >> self.mbits) & ((1 << self.ebits) - 1)
        mant = bits & ((1 << self.mbits) - 1)
        if ef == 0:
            mag = mant * _pow2(self.emin - self.mbits)
        else:
            mag = ((1 << self.mbits) + mant) * _pow2(ef - self.bias - self.mbits)
        return -mag if sign else mag

    def encode(self, x: Fraction, negative_zero: bool = False) -> int:
        """Round-to-nearest-even encode of an exact rational."""
        sign_shift = self.ebits + self.mbits
        if x == 0:
            return (1 << sign_shift) if negative_zero else 0
        sign = 1 if x < 0 else 0
        a = -x if sign else x
        e = a.numerator.bit_length() - a.denominator.bit_length()
        if _pow2(e) > a:
            e -= 1
        if _pow2(e + 1) <= a:
            e += 1
        if e < self.emin:
            q = _rne_int(a / _pow2(self.emin - self.mbits))
            if q == 0:
                return sign << sign_shift
            if q < (1 << self.mbits):
                return (sign << sign_shift) | q
            e2, mant = self.emin, 0
        else:
            q = _rne_int(a / _pow2(e - self.mbits))
            if q >= 1 << (self.mbits + 1):
                q >>= 1
                e += 1
            e2, mant = e, q - (1 << self.mbits)
        if e2 > self.emax or (e2 == self.emax and mant > self.top_mant):
            return self.inf_bits(sign)
        return (sign << sign_shift) | ((e2 + self.bias) << self.mbits) | mant


_FLOAT_SPECS = {
    ElemType.FP8_E4M3: _FloatSpec(ebits=4, mbits=3, bias=7, has_inf=False),
    ElemType.FP8_E5M2: _FloatSpec(ebits=5, mbits=2, bias=15, has_inf=True),
    ElemType.BF16: _FloatSpec(ebits=8, mbits=7, bias=127, has_inf=True),
}

_F32_NAN_BITS = 0x7FC00000
_F64_NAN_BITS = 0x7FF8000000000000


def to_bits(t: ElemType, x) -> int:
    """Encode a Python number into the canonical bit pattern of `t`.

    Values not representable in `t` are quantized first (integers wrap,
    floats round to nearest even). NaN maps to one canonical pattern.
    """
    if t.is_integer:
        w = _INT_WIDTH[t]
        if isinstance(x, float):
            if not math.isfinite(x):
                raise ValueError(f"cannot encode non-finite value into {t.value}")
            x = _rne_int(Fraction(x))
        return _wrap_int(w, int(x)) & ((1 << w) - 1)
    if t is ElemType.FP32:
        xf = float(np.float32(x))
        if math.isnan(xf):
            return _F32_NAN_BITS
        return struct.unpack("<I", struct.pack("<f", xf))[0]
    if t is ElemType.FP64:
        xf = float(x)
        if math.isnan(xf):
            return _F64_NAN_BITS
        return struct.unpack("<Q", struct.pack("<d", xf))[0]
    spec = _FLOAT_SPECS[t]
    xf = float(x) if not isinstance(x, Fraction) else x
    if isinstance(xf, float):
        if math.isnan(xf):
            return spec.nan_bits
        if math.isinf(xf):
            return spec.inf_bits(1 if xf < 0 else 0)
        return spec.encode(Fraction(xf), negative_zero=(xf == 0 and math.copysign(1.0, xf) < 0))
    return spec.encode(xf)


def from_bits(t: ElemType, bits: int):
    if bits < 0 or bits >= 1 << t.width_bits:
        raise ValueError(f"bit pattern out of range for {t.value}")
    if t.is_integer:
        return _wrap_int(_INT_WIDTH[t], bits)
    if t is ElemType.FP32:
        return float(struct.unpack("<f", struct.pack("<I", bits))[0])
    if t is ElemType.FP64:
        return float(struct.unpack("<d", struct.pack("<Q", bits))[0])
    return _FLOAT_SPECS[t].decode(bits)


def quantize(t: ElemType, x):
    """Nearest representable value of `t` (wrap for ints, RNE for floats)."""
    return from_bits(t, to_bits(t, x))


@dataclass(frozen=True)
class ElemValue:
    """A scalar tagged with its element type, stored as a bit pattern."""

    etype: ElemType
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < 1 << self.etype.width_bits:
            raise ValueError(f"bit pattern out of range for {self.etype.value}")

    @classmethod
    def from_number(cls, t: ElemType, x) -> "ElemValue":
        return cls(t, to_bits(t, x))

    @property
    def value(self):
        return from_bits(self.etype, self.bits)

    def __repr__(self) -> str:
        return f"ElemValue({self.etype.value}, {self.value!r})"


def _signbit_of_bits(t: ElemType, bits: int) -> int:
    return (bits >> (t.width_bits - 1)) & 1


def _small_float_op(t: ElemType, op: str, abits: int, bbits: int) -> int:
    spec = _FLOAT_SPECS[t]
    ka, kb = spec.classify(abits), spec.classify(bbits)
    if op == "/" and kb == "finite" and spec.decode_exact(bbits) == 0:
        raise ZeroDivisionError(f"{t.value} division by zero")
    if ka != "finite" or kb != "finite":
        if ka == "nan" or kb == "nan":
            return spec.nan_bits
        af, bf = spec.decode(abits), spec.decode(bbits)
        r = af + bf if op == "+" else af * bf if op == "*" else af / bf
        if math.isnan(r):
            return spec.nan_bits
        if math.isinf(r):
            return spec.inf_bits(1 if r < 0 else 0)
        return spec.encode(Fraction(r), negative_zero=(r == 0 and math.copysign(1.0, r) < 0))
    fa, fb = spec.decode_exact(abits), spec.decode_exact(bbits)
    sa, sb = _signbit_of_bits(t, abits), _signbit_of_bits(t, bbits)
    if op == "+":
        r = fa + fb
        neg_zero = r == 0 and fa == 0 and fb == 0 and bool(sa and sb)
    elif op == "*":
        r = fa * fb
        neg_zero = r == 0 and bool(sa ^ sb)
    else:
        r = fa / fb
        neg_zero = r == 0 and bool(sa ^ sb)
    return spec.encode(r, negative_zero=neg_zero)


def _native_float_op(t: ElemType, op: str, a: float, b: float) -> float:
    if op == "/" and b == 0:
        raise ZeroDivisionError(f"{t.value} division by zero")
    if t is ElemType.FP32:
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            a32, b32 = np.float32(a), np.float32(b)
            r = a32 + b32 if op == "+" else a32 * b32 if op == "*" else a32 / b32
        return float(r)
    return a + b if op == "+" else a * b if op == "*" else a / b


def _int_op(t: ElemType, op: str, a: int, b: int) -> int:
    if op == "+":
        r = a + b
    elif op == "*":
        r = a * b
    else:
        if b == 0:
            raise ZeroDivisionError(f"{t.value} division by zero")
        q = abs(a) // abs(b)
        r = -q if (a < 0) != (b < 0) else q
    return _wrap_int(_INT_WIDTH[t], r)


def _coerce(t: ElemType, v) -> ElemValue:
    if isinstance(v, ElemValue):
        if v.etype is not t:
            raise TypeError(f"operand is {v.etype.value}, expected {t.value}")
        return v
    return ElemValue.from_number(t, v)


def _arith(t: ElemType, op: str, a, b) -> ElemValue:
    av, bv = _coerce(t, a), _coerce(t, b)
    if t.is_integer:
        return ElemValue.from_number(t, _int_op(t, op, av.value, bv.value))
    if t in (ElemType.FP32, ElemType.FP64):
        return ElemValue.from_number(t, _native_float_op(t, op, av.value, bv.value))
    return ElemValue(t, _small_float_op(t, op, av.bits, bv.bits))


def add_wrap(t: ElemType, a, b) -> ElemValue:
    """a + b in type t: two's-complement wrap for ints, exact-then-RNE for floats."""
    return _arith(t, "+", a, b)


def mul_wrap(t: ElemType, a, b) -> ElemValue:
    return _arith(t, "*", a, b)


def div_trunc(t: ElemType, a, b) -> ElemValue:
    """a / b in type t: truncation toward zero for ints, exact-then-RNE for floats."""
    return _arith(t, "/", a, b)


def cast(v: ElemValue, to: ElemType) -> ElemValue:
    """Convert between element types: exact conversion, then wrap or round."""
    if v.etype is to:
        return v
    return ElemValue.from_number(to, v.value)


# Scalar helpers on plain numbers, used by the vector execution paths.
# They agree bit-for-bit with the ElemValue ops above.

def scalar_add(t: ElemType, x, y):
    if t.is_integer:
        return _int_op(t, "+", x, y)
    if t in (ElemType.FP32, ElemType.FP64):
        return _native_float_op(t, "+", x, y)
    return _FLOAT_SPECS[t].decode(_small_float_op(t, "+", to_bits(t, x), to_bits(t, y)))


def scalar_mul(t: ElemType, x, y):
    if t.is_integer:
        return _int_op(t, "*", x, y)
    if t in (ElemType.FP32, ElemType.FP64):
        return _native_float_op(t, "*", x, y)
    return _FLOAT_SPECS[t].decode(_small_float_op(t, "*", to_bits(t, x), to_bits(t, y)))


def scalar_div(t: ElemType, x, y):
    if t.is_integer:
        return _int_op(t, "/", x, y)
    if t in (ElemType.FP32, ElemType.FP64):
        return _native_float_op(t, "/", x, y)
    return _FLOAT_SPECS[t].decode(_small_float_op(t, "/", to_bits(t, x), to_bits(t, y)))


_FOLD_OPS = {"+": add_wrap, "*": mul_wrap, "/": div_trunc}


@dataclass(frozen=True)
class FoldResult:
    """Trace of a strict left-to-right fold; `trace[0]` is the first operand."""

    etype: ElemType
    trace: tuple
    final: ElemValue


def fold_left(t: ElemType, first, ops: Iterable[tuple]) -> FoldResult:
    """Evaluate `first op1 x1 op2 x2 ...` strictly left to right in type t.

    `ops` is a sequence of (operator, operand) pairs with operator one of
    '+', '-', '*', '/'. The returned trace records the running value after
    the first operand and after every operation, so overflow points are
    visible.
    """
    acc = _coerce(t, first)
    trace = [acc.value]
    for sym, operand in ops:
        if sym == "-":
            neg = ElemValue.from_number(t, -_coerce(t, operand).value)
            acc = add_wrap(t, acc, neg)
        elif sym in _FOLD_OPS:
            acc = _FOLD_OPS[sym](t, acc, operand)
        else:
            raise ValueError(f"unknown operator {sym!r}")
        trace.append(acc.value)
    return FoldResult(t, tuple(trace), acc)


class PolicyKind(Enum):
    SAME_AS_INPUT = "same_as_input"
    WIDE_FROM_FIRST_ACCUMULATING_SWITCH = "wide_from_first_accumulating_switch"
    WIDE_EVERYWHERE = "wide_everywhere"
    ENDPOINT_SHARDED = "endpoint_sharded"


@dataclass(frozen=True)
class AccumulatorPolicy:
    """Where reductions accumulate in a wider type, if anywhere.

    `wide_type` is the accumulator type used by the wide policies; it must
    be at least as wide as the input type (checked where the input type is
    known).
    """

    kind: PolicyKind
    wide_type: ElemType = ElemType.FP64

    def validate_against(self, input_type: ElemType) -> None:
        if self.kind is PolicyKind.SAME_AS_INPUT:
            return
        if self.wide_type.width_bits < input_type.width_bits:
            raise ValueError(
                f"wide type {self.wide_type.value} narrower than input {input_type.value}"
            )
        if self.wide_type.is_integer != input_type.is_integer:
            raise ValueError("wide type must match input domain (int vs float)")


def _collect_leaves(node, out: list) -> None:
    if isinstance(node, int):
        out.append(node)
        return
    if not isinstance(node, tuple) or not node:
        raise ValueError("reduction order nodes must be ints or non-empty tuples")
    for child in node:
        _collect_leaves(child, out)


@dataclass(frozen=True)
class ReductionOrder:
    """A rooted ordered tree over contributor indices 0..m-1.

    Written as nested tuples, e.g. ((0, 1), 2) reduces contributors 0 and 1
    first. Internal nodes may have any arity; children are combined left to
    right.
    """

    node: object

    def __post_init__(self):
        leaves: list = []
        _collect_leaves(self.node, leaves)
        if sorted(leaves) != list(range(len(leaves))):
            raise ValueError("leaves must be exactly 0..m-1, each once")

    @property
    def leaf_count(self) -> int:
        leaves: list = []
        _collect_leaves(self.node, leaves)
        return len(leaves)

    @classmethod
    def left_to_right(cls, m: int) -> "ReductionOrder":
        if m < 1:
            raise ValueError("need at least one contributor")
        return cls(0 if m == 1 else tuple(range(m)))


@dataclass(frozen=True)
class ReduceResult:
    etype: ElemType
    values: tuple
    digest: str


def digest_values(t: ElemType, values: Sequence) -> str:
    """Stable 64-bit digest of a value vector's bit patterns, as hex."""
    h = blake2b(digest_size=8)
    h.update(t.value.encode())
    nbytes = (t.width_bits + 7) // 8
    for v in values:
        h.update(to_bits(t, v).to_bytes(nbytes, "little"))
    return h.hexdigest()


def reduce_with_order(
    order: ReductionOrder,
    values: Sequence[Sequence],
    elem: ElemType,
    policy: AccumulatorPolicy,
) -> ReduceResult:
    """Reduce m equal-length vectors elementwise following `order`.

    With SAME_AS_INPUT every partial sum is formed in `elem`; the other
    policies accumulate in `policy.wide_type` and cast down once at the
    root. The digest covers the final vector's bit patterns.
    """
    m = order.leaf_count
    if len(values) != m:
        raise ValueError(f"expected {m} contributor vectors, got {len(values)}")
    lengths = {len(v) for v in values}
    if len(lengths) != 1:
        raise ValueError("contributor vectors must have equal length")
    policy.validate_against(elem)
    acc_t = elem if policy.kind is PolicyKind.SAME_AS_INPUT else policy.wide_type

    def eval_node(node, j: int):
        if isinstance(node, int):
            return quantize(acc_t, quantize(elem, values[node][j]))
        acc = eval_node(node[0], j)
        for child in node[1:]:
            acc = scalar_add(acc_t, acc, eval_node(child, j))
        return acc

    n = lengths.pop()
    out = []
    for j in range(n):
        r = eval_node(order.node, j)
        out.append(quantize(elem, r) if acc_t is not elem else r)
    result = tuple(out)
    return ReduceResult(elem, result, digest_values(elem, result))


@dataclass(frozen=True)
class BlockFP:
    """Block floating point: integer mantissas sharing one power-of-two scale.

    The scale exponent is a signed 8-bit value; mantissas are symmetric
    around zero (for 8-bit mantissas: -127..127, -128 unused).
    """

    scale_exp: int
    mantissas: tuple
    mantissa_bits: int = 8

    def __post_init__(self):
        if not -128 <= self.scale_exp <= 127:
            raise ValueError("scale exponent must fit a signed 8-bit field")
        limit = (1 << (self.mantissa_bits - 1)) - 1
        for m in self.mantissas:
            if not -limit <= m <= limit:
                raise ValueError(f"mantissa {m} outside +/-{limit}")

    @property
    def block_size(self) -> int:
        return len(self.mantissas)


def encode_block(values: Sequence[float], block_size: int = 16, mantissa_bits: int = 8) -> BlockFP:
    """Quantize a block to shared-scale integers.

    The scale is the smallest power of two such that max|v| / scale fits the
    mantissa range; mantissas are rounded to nearest even, so the round-trip
    error is at most scale/2 per element.
    """
    if len(values) != block_size:
        raise ValueError(f"expected block of {block_size} values, got {len(values)}")
    vals = [float(v) for v in values]
    for v in vals:
        if not math.isfinite(v):
            raise ValueError("block values must be finite")
    limit = (1 << (mantissa_bits - 1)) - 1
    maxabs = max((abs(v) for v in vals), default=0.0)
    if maxabs == 0.0:
        return BlockFP(0, tuple(0 for _ in vals), mantissa_bits)
    e = math.frexp(maxabs / limit)[1]  # smallest e with maxabs <= limit * 2^e
    while e > -128 and maxabs <= limit * math.ldexp(1.0, e - 1):
        e -= 1
    while maxabs > limit * math.ldexp(1.0, e):
        e += 1
    if e > 127:
        raise ValueError("block magnitude exceeds the signed 8-bit scale range")
    if e < -128:
        e = -128
    mants = tuple(int(round(math.ldexp(v, -e))) for v in vals)
    return BlockFP(e, mants, mantissa_bits)


def decode_block(block: BlockFP) -> tuple:
    return tuple(math.ldexp(m, block.scale_exp) for m in block.mantissas)


@dataclass(frozen=True)
class SparseVec:
    """Sparse vector over a dense domain of length n; indices sorted, no zeros."""

    n: int
    indices: tuple
    values: tuple

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("domain length must be >= 0")
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must align")
        prev = -1
        for i, v in zip(self.indices, self.values):
            if not 0 <= i < self.n:
                raise ValueError(f"index {i} outside domain of length {self.n}")
            if i <= prev:
                raise ValueError("indices must be strictly increasing")
            if v == 0:
                raise ValueError("stored values must be nonzero")
            prev = i

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple]) -> "SparseVec":
        items = sorted((int(i), float(v)) for i, v in pairs)
        idx, vals = [], []
        for i, v in items:
            if idx and idx[-1] == i:
                raise ValueError(f"duplicate index {i}")
            if v != 0.0:
                idx.append(i)
                vals.append(v)
        return cls(n, tuple(idx), tuple(vals))

    @classmethod
    def from_dense(cls, dense: Sequence[float]) -> "SparseVec":
        idx = tuple(i for i, v in enumerate(dense) if v != 0.0)
        return cls(len(dense), idx, tuple(float(dense[i]) for i in idx))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    @property
    def density(self) -> float:
        return self.nnz / self.n if self.n else 0.0

    def to_dense(self) -> list:
        out = [0.0] * self.n
        for i, v in zip(self.indices, self.values):
            out[i] = v
        return out

    def encoded_bytes(self, index_bytes: int, value_bytes: int) -> int:
        return self.nnz * (index_bytes + value_bytes)


def sparse_sum(a: SparseVec, b: SparseVec) -> SparseVec:
    """Union-merge two sparse vectors; exact cancellations are dropped."""
    if a.n != b.n:
        raise ValueError("sparse vectors must share the domain length")
    idx, vals = [], []
    ia = ib = 0
    while ia < a.nnz or ib < b.nnz:
        ka = a.indices[ia] if ia < a.nnz else None
        kb = b.indices[ib] if ib < b.nnz else None
        if kb is None or (ka is not None and ka < kb):
            idx.append(ka)
            vals.append(a.values[ia])
            ia += 1
        elif ka is None or kb < ka:
            idx.append(kb)
            vals.append(b.values[ib])
            ib += 1
        else:
            s = a.values[ia] + b.values[ib]
            if s != 0.0:
                idx.append(ka)
                vals.append(s)
            ia += 1
            ib += 1
    return SparseVec(a.n, tuple(idx), tuple(vals))


def expected_density(p: float, m: int) -> float:
    """Expected union density of m independent draws with per-index rate p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if m < 0:
        raise ValueError("m must be >= 0")
    return 1.0 - (1.0 - p) ** m


def dense_switchover(n: int, nnz: int, index_bytes: int, value_bytes: int) -> bool:
    """True when the sparse encoding is strictly larger than dense."""
    if min(n, nnz, index_bytes, value_bytes) < 0:
        raise ValueError("arguments must be >= 0")
    return nnz * (index_bytes + value_bytes) > n * value_bytes


@dataclass(frozen=True)
class ErrorStats:
    max_abs: float
    max_rel: float


def error_stats(result: Sequence, oracle: Sequence) -> ErrorStats:
    if len(result) != len(oracle):
        raise ValueError("result and oracle lengths differ")
    max_abs = 0.0
    max_rel = 0.0
    for r, o in zip(result, oracle):
        err = abs(float(r) - float(o))
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / max(abs(float(o)), REL_EPS))
    return ErrorStats(max_abs, max_rel)


def error_vs_oracle(result: Sequence, inputs: Sequence[Sequence]) -> ErrorStats:
    """Compare a reduced vector against the exact fp64 sequential sum."""
    if not inputs:
        raise ValueError("need at least one contributor")
    n = len(inputs[0])
    for v in inputs:
        if len(v) != n:
            raise ValueError("contributor vectors must have equal length")
    oracle = [0.0] * n
    for v in inputs:
        for j in range(n):
            oracle[j] += float(v[j])
    return error_stats(result, oracle)
