"""Short-Weierstrass group law, counted double-and-add, and SEC1 encoding.

Points are tracked in Jacobian coordinates ((X, Y, Z) with x = X/Z^2,
y = Y/Z^3, Z = 0 encoding infinity) so that only the final conversion back
to affine pays a field inversion. The doubling formula is the general-`a`
Jacobian doubling at 4M + 6S, and addition is the mixed Jacobian+affine
formula at 7M + 4S; both per-step costs are exported as module constants so
operation counts stay auditable. Scalar multiplication is plain
left-to-right double-and-add, one doubling per bit and one mixed addition
per set bit after the leading one.

Two curves ship built in: the standard 256-bit prime curve (`P256`) and a
tiny fully enumerable curve (`TOY`, 9-bit prime 347, prime group order 367)
used wherever brute force over the whole group is the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import (
    FieldElement,
    Modulus,
    NonInvertibleError,
    OpCounter,
    fe,
    fe_add,
    fe_from_bytes,
    fe_inv,
    fe_mul,
    fe_neg,
    fe_pow,
    fe_sqr,
    fe_sub,
    fe_to_bytes,
)

# Per-step field-operation prices of the chosen formulas (mults, squarings).
DOUBLE_COST_M = 4
DOUBLE_COST_S = 6
MIXED_ADD_COST_M = 7
MIXED_ADD_COST_S = 4
# Jacobian -> affine conversion: one inversion plus this tail.
TO_AFFINE_COST_M = 3
TO_AFFINE_COST_S = 1


class ScalarRangeError(ValueError):
    """Scalar outside the permitted [1, order-1] (or [0, order) ) range."""


class PointEncodeError(ValueError):
    """The point has no defined encoding (infinity)."""


class PointFormatError(ValueError):
    """Malformed encoded point (bad prefix or length)."""


class PointDecodeError(ValueError):
    """Structurally valid encoding that names no curve point."""


@dataclass(frozen=True)
class CurveParams:
    """y^2 = x^3 + a*x + b over F_p with base point (gx, gy) of order `order`."""

    p: Modulus
    a: FieldElement
    b: FieldElement
    gx: FieldElement
    gy: FieldElement
    order: int
    name: str

    def validate(self) -> None:
        p = self.p
        disc = fe_add(
            fe_mul(fe(4, p), fe_pow(self.a, 3)),
            fe_mul(fe(27, p), fe_sqr(self.b)),
        )
        if disc.value == 0:
            raise ValueError(f"curve {self.name}: zero discriminant")
        if not self.contains(self.gx, self.gy):
            raise ValueError(f"curve {self.name}: base point not on curve")

    def contains(self, x: FieldElement, y: FieldElement) -> bool:
        lhs = fe_sqr(y)
        rhs = fe_add(fe_add(fe_pow(x, 3), fe_mul(self.a, x)), self.b)
        return lhs.value == rhs.value

    @property
    def generator(self) -> "AffinePoint":
        return AffinePoint(self.gx, self.gy)


@dataclass(frozen=True)
class AffinePoint:
    x: FieldElement
    y: FieldElement
    at_infinity: bool = False

    @classmethod
    def infinity(cls, m: Modulus) -> "AffinePoint":
        zero = fe(0, m)
        return cls(zero, zero, at_infinity=True)


@dataclass(frozen=True)
class JacobianPoint:
    X: FieldElement
    Y: FieldElement
    Z: FieldElement

    @property
    def is_infinity(self) -> bool:
        return self.Z.value == 0


@dataclass(frozen=True)
class KeyPair:
    """Private scalar, derived public point, and the derivation's op tallies."""

    d: int
    Q: AffinePoint
    counts: OpCounter


def to_jacobian(P: AffinePoint) -> JacobianPoint:
    m = P.x.modulus
    if P.at_infinity:
        return JacobianPoint(fe(1, m), fe(1, m), fe(0, m))
    return JacobianPoint(P.x, P.y, fe(1, m))


def to_affine(P: JacobianPoint, counter: OpCounter | None = None) -> AffinePoint:
    """Exactly one field inversion when P is finite."""
    if P.is_infinity:
        return AffinePoint.infinity(P.X.modulus)
    zinv = fe_inv(P.Z, counter)
    zinv2 = fe_sqr(zinv, counter)
    zinv3 = fe_mul(zinv2, zinv, counter)
    return AffinePoint(fe_mul(P.X, zinv2, counter), fe_mul(P.Y, zinv3, counter))


def point_double(
    P: JacobianPoint, params: CurveParams, counter: OpCounter | None = None
) -> JacobianPoint:
    """General-a Jacobian doubling, 4M + 6S on the main path."""
    if P.is_infinity or P.Y.value == 0:
        # 2-torsion (y = 0) and infinity both double to infinity.
        m = P.X.modulus
        return JacobianPoint(fe(1, m), fe(1, m), fe(0, m))
    c = counter
    xx = fe_sqr(P.X, c)
    yy = fe_sqr(P.Y, c)
    yyyy = fe_sqr(yy, c)
    zz = fe_sqr(P.Z, c)
    xyy = fe_mul(P.X, yy, c)
    s = fe_add(xyy, xyy, c)
    s = fe_add(s, s, c)  # 4*X*Y^2
    azz2 = fe_mul(params.a, fe_sqr(zz, c), c)
    m3 = fe_add(fe_add(xx, xx, c), xx, c)
    mm = fe_add(m3, azz2, c)  # 3*X^2 + a*Z^4
    t = fe_sub(fe_sub(fe_sqr(mm, c), s, c), s, c)
    y8 = fe_add(yyyy, yyyy, c)
    y8 = fe_add(y8, y8, c)
    y8 = fe_add(y8, y8, c)  # 8*Y^4
    y3 = fe_sub(fe_mul(mm, fe_sub(s, t, c), c), y8, c)
    yz = fe_mul(P.Y, P.Z, c)
    z3 = fe_add(yz, yz, c)
    return JacobianPoint(t, y3, z3)


def point_add(
    P: JacobianPoint,
    Q: AffinePoint,
    params: CurveParams,
    counter: OpCounter | None = None,
) -> JacobianPoint:
    """Mixed Jacobian + affine addition, 7M + 4S on the main path.

    Total: handles P = inf, Q = inf, P = Q (delegates to doubling) and
    P = -Q (returns infinity).
    """
    if Q.at_infinity:
        return P
    if P.is_infinity:
        return to_jacobian(Q)
    c = counter
    z1z1 = fe_sqr(P.Z, c)
    u2 = fe_mul(Q.x, z1z1, c)
    s2 = fe_mul(fe_mul(Q.y, P.Z, c), z1z1, c)
    h = fe_sub(u2, P.X, c)
    if h.value == 0:
        if s2.value == P.Y.value:
            return point_double(P, params, c)
        m = P.X.modulus
        return JacobianPoint(fe(1, m), fe(1, m), fe(0, m))
    hh = fe_sqr(h, c)
    i4 = fe_add(hh, hh, c)
    i4 = fe_add(i4, i4, c)  # 4*H^2
    j = fe_mul(h, i4, c)
    r2 = fe_sub(s2, P.Y, c)
    r2 = fe_add(r2, r2, c)  # 2*(S2 - Y1)
    v = fe_mul(P.X, i4, c)
    x3 = fe_sub(fe_sub(fe_sub(fe_sqr(r2, c), j, c), v, c), v, c)
    yj = fe_mul(P.Y, j, c)
    yj2 = fe_add(yj, yj, c)
    y3 = fe_sub(fe_mul(r2, fe_sub(v, x3, c), c), yj2, c)
    z3 = fe_sub(fe_sub(fe_sqr(fe_add(P.Z, h, c), c), z1z1, c), hh, c)
    return JacobianPoint(x3, y3, z3)


def point_neg(P: AffinePoint) -> AffinePoint:
    if P.at_infinity:
        return P
    return AffinePoint(P.x, fe_neg(P.y))


def scalar_mult(
    k: int,
    P: AffinePoint,
    params: CurveParams,
    counter: OpCounter | None = None,
) -> AffinePoint:
    """Left-to-right double-and-add; the final conversion pays one inversion."""
    if k < 0 or k >= params.order:
        raise ScalarRangeError(f"scalar {k} outside [0, order)")
    if k == 0 or P.at_infinity:
        return AffinePoint.infinity(params.p)
    acc = to_jacobian(P)
    for i in range(k.bit_length() - 2, -1, -1):
        acc = point_double(acc, params, counter)
        if (k >> i) & 1:
            acc = point_add(acc, P, params, counter)
    return to_affine(acc, counter)


def derive_public(d: int, params: CurveParams) -> KeyPair:
    """Public key Q = d*G with an exact per-derivation operation tally."""
    if d < 1 or d > params.order - 1:
        raise ScalarRangeError(f"private scalar {d} outside [1, order-1]")
    counter = OpCounter()
    Q = scalar_mult(d, params.generator, params, counter)
    return KeyPair(d, Q, counter)


def _raw_dbl(X, Y, Z, p, a):
    # Same general-a Jacobian doubling as point_double, on plain ints.
    if Z == 0 or Y == 0:
        return 1, 1, 0
    xx = X * X % p
    yy = Y * Y % p
    yyyy = yy * yy % p
    s = 4 * X * yy % p
    zz = Z * Z % p
    m_ = (3 * xx + a * (zz * zz % p)) % p
    t = (m_ * m_ - 2 * s) % p
    return t, (m_ * (s - t) - 8 * yyyy) % p, 2 * Y * Z % p


def _raw_madd(X, Y, Z, qx, qy, p, a):
    # Same mixed addition as point_add, on plain ints.
    if Z == 0:
        return qx, qy, 1
    zz = Z * Z % p
    u2 = qx * zz % p
    s2 = qy * Z % p * zz % p
    h = (u2 - X) % p
    if h == 0:
        if s2 == Y:
            return _raw_dbl(X, Y, Z, p, a)
        return 1, 1, 0
    hh = h * h % p
    i4 = 4 * hh % p
    j = h * i4 % p
    r = 2 * (s2 - Y) % p
    v = X * i4 % p
    x3 = (r * r - j - 2 * v) % p
    y3 = (r * (v - x3) - 2 * Y * j) % p
    z3 = ((Z + h) * (Z + h) - zz - hh) % p
    return x3, y3, z3


# Fixed-base comb tables for fast_public_point, keyed per curve:
# table[j][b-1] = affine b * 256^j * G for byte b in 1..255.
_COMB_CACHE: dict[tuple[int, int, int], list[list[tuple[int, int]]]] = {}


def _comb_table(params: CurveParams) -> list[list[tuple[int, int]]]:
    key = (params.p.value, params.gx.value, params.gy.value)
    cached = _COMB_CACHE.get(key)
    if cached is not None:
        return cached
    p, a = params.p.value, params.a.value
    n_chunks = (params.order.bit_length() + 7) // 8
    jac_rows = []
    base = (params.gx.value, params.gy.value, 1)
    for _ in range(n_chunks):
        row = []
        acc = (1, 1, 0)
        for _b in range(255):
            acc = _raw_madd(*acc, base[0], base[1], p, a)
            row.append(acc)
        jac_rows.append(row)
        for _ in range(8):
            base = _raw_dbl(*base, p, a)
        if base[2] != 0:
            zinv = pow(base[2], p - 2, p)
            zinv2 = zinv * zinv % p
            base = (base[0] * zinv2 % p, base[1] * zinv2 % p * zinv % p, 1)
    # Montgomery batch inversion to normalize every entry to affine.
    flat = [entry for row in jac_rows for entry in row]
    prefix = [1]
    for X, Y, Z in flat:
        prefix.append(prefix[-1] * Z % p)
    inv_all = pow(prefix[-1], p - 2, p)
    affine_flat: list[tuple[int, int]] = [None] * len(flat)  # type: ignore[list-item]
    for i in range(len(flat) - 1, -1, -1):
        X, Y, Z = flat[i]
        zinv = inv_all * prefix[i] % p
        inv_all = inv_all * Z % p
        zinv2 = zinv * zinv % p
        affine_flat[i] = (X * zinv2 % p, Y * zinv2 % p * zinv % p)
    table = [affine_flat[j * 255 : (j + 1) * 255] for j in range(n_chunks)]
    _COMB_CACHE[key] = table
    return table


def fast_public_point(d: int, params: CurveParams) -> AffinePoint:
    """Uncounted raw-integer derivation of d*G for bulk dataset generation.

    Fixed-base comb over little-endian scalar bytes: one mixed addition per
    nonzero byte against a precomputed table of b * 256^j * G, built once
    per curve. Results are pinned equal to derive_public by tests; nothing
    here feeds the operation counters, so it must never back the cost model.
    """
    if d < 1 or d > params.order - 1:
        raise ScalarRangeError(f"private scalar {d} outside [1, order-1]")
    p, a = params.p.value, params.a.value
    table = _comb_table(params)
    X, Y, Z = 1, 1, 0
    j = 0
    while d:
        b = d & 0xFF
        if b:
            qx, qy = table[j][b - 1]
            X, Y, Z = _raw_madd(X, Y, Z, qx, qy, p, a)
        d >>= 8
        j += 1
    if Z == 0:
        return AffinePoint.infinity(params.p)
    zinv = pow(Z, p - 2, p)
    zinv2 = zinv * zinv % p
    return AffinePoint(
        fe(X * zinv2 % p, params.p),
        fe(Y * zinv2 % p * zinv % p, params.p),
    )


def encode_compressed(Q: AffinePoint) -> bytes:
    """SEC1 compressed form: parity prefix 0x02/0x03 plus big-endian x."""
    if Q.at_infinity:
        raise PointEncodeError("the point at infinity has no compressed encoding")
    prefix = b"\x03" if Q.y.value & 1 else b"\x02"
    return prefix + fe_to_bytes(Q.x)


def decode_compressed(data: bytes, params: CurveParams) -> AffinePoint:
    """Recover y by square root modulo p (p = 3 mod 4), matching the prefix parity."""
    width = params.p.byte_width
    if len(data) != 1 + width:
        raise PointFormatError(f"expected {1 + width} bytes, got {len(data)}")
    if data[0] not in (0x02, 0x03):
        raise PointFormatError(f"bad prefix byte 0x{data[0]:02x}")
    if params.p.value % 4 != 3:
        raise ValueError("square-root decompression requires p = 3 mod 4")
    try:
        x = fe_from_bytes(data[1:], params.p)
    except ValueError as exc:
        raise PointDecodeError(str(exc)) from None
    rhs = fe_add(fe_add(fe_pow(x, 3), fe_mul(params.a, x)), params.b)
    y = fe_pow(rhs, (params.p.value + 1) // 4)
    if fe_sqr(y).value != rhs.value:
        raise PointDecodeError(f"x-coordinate 0x{x.value:x} is not on {params.name}")
    if (y.value & 1) != (data[0] & 1):
        y = fe_neg(y)
    return AffinePoint(x, y)


def _make_curve(p: int, a: int, b: int, gx: int, gy: int, order: int, name: str) -> CurveParams:
    m = Modulus(p)
    params = CurveParams(m, fe(a, m), fe(b, m), fe(gx, m), fe(gy, m), order, name)
    params.validate()
    return params


# Standard 256-bit prime curve (a = -3). order*G = infinity is asserted from
# the published constants; the test suite re-derives it.
P256 = _make_curve(
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    order=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
    name="p256",
)

# Fully enumerable test curve, found by brute force (scripts/find_toy_curve.py):
# smallest-b curve over a p = 3 mod 4 prime with a = -3 and prime group order
# below 500 whose whole group a single point generates.
TOY = _make_curve(p=347, a=344, b=28, gx=2, gy=77, order=367, name="toy347")

CURVES = {"p256": P256, "toy": TOY}
