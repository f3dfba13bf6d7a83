"""Cl(4,1) multivector kernel: products, conformal embeddings, versors.

Representation: dense 32-component coefficient vector. Blade i is the subset
of {e1..e5} given by the 5-bit pattern of i (bit k set <=> e_{k+1} present),
factors in ascending index order. Index 0 is the scalar, 31 the pseudoscalar.

Metric: e1^2 = e2^2 = e3^2 = e4^2 = +1, e5^2 = -1. With the null vectors
eo = 0.5*(e5 - e4) and einf = e4 + e5 this gives eo^2 = einf^2 = 0 and
eo . einf = -1, which is what the translator/dilator formulas below require.

Geometric products accumulate each output component with Neumaier-compensated
summation so that structurally cancelling terms (e.g. translator * inverse
translator) come out exact, not merely small.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import NotAMotor, NotARound, NotAVersor, NotUnit, ZeroWeight

DIM = 32
METRIC = (1.0, 1.0, 1.0, 1.0, -1.0)

# blade bitmasks used throughout
_E1, _E2, _E3, _E4, _E5 = 1, 2, 4, 8, 16
_E12, _E13, _E23, _E45 = 3, 5, 6, 24

BLADE_NAMES = tuple(
    "1" if i == 0 else "e" + "".join(str(k + 1) for k in range(5) if i >> k & 1)
    for i in range(DIM)
)
BLADE_INDEX = {name: i for i, name in enumerate(BLADE_NAMES) if i}

GRADES = np.array([bin(i).count("1") for i in range(DIM)])
_REVERSE_SIGNS = np.where(GRADES * (GRADES - 1) // 2 % 2 == 1, -1.0, 1.0)


def _reorder_sign(a: int, b: int) -> float:
    """Sign from sorting the factors of blade a followed by blade b, with metric
    contraction on repeated factors. Result blade is a ^ b."""
    total = 0
    a2 = a >> 1
    while a2:
        total += bin(a2 & b).count("1")
        a2 >>= 1
    sign = -1.0 if total % 2 else 1.0
    common = a & b
    k = 0
    while common:
        if common & 1:
            sign *= METRIC[k]
        common >>= 1
        k += 1
    return sign


def _build_tables():
    sign = np.zeros((DIM, DIM))
    for a in range(DIM):
        for b in range(DIM):
            sign[a, b] = _reorder_sign(a, b)
    # gather layout: out[k] = sum_i a[i] * SIGN2[i, k] * b[i ^ k]
    gather = np.arange(DIM)[:, None] ^ np.arange(DIM)[None, :]
    sign2 = sign[np.arange(DIM)[:, None], gather]
    # outer product keeps only disjoint-support terms, left contraction only
    # terms where the left blade's support is inside the right blade's
    j_of = gather  # j = i ^ k for row i, column k
    i_of = np.arange(DIM)[:, None] * np.ones(DIM, dtype=int)[None, :]
    outer_mask = (i_of & j_of) == 0
    inner_mask = (i_of & j_of) == i_of
    return sign2, gather, outer_mask, inner_mask


_SIGN2, _GATHER, _OUTER_MASK, _INNER_MASK = _build_tables()


def _product(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    rows = np.flatnonzero(a)
    if rows.size == 0:
        return np.zeros(DIM)
    terms = _SIGN2[rows] * (a[rows, None] * b[_GATHER[rows]])
    if mask is not None:
        terms = terms * mask[rows]
    # Neumaier compensated accumulation down the rows
    total = terms[0].copy()
    comp = np.zeros(DIM)
    for r in range(1, rows.size):
        t = terms[r]
        s = total + t
        comp += np.where(np.abs(total) >= np.abs(t), (total - s) + t, (t - s) + total)
        total = s
    return total + comp


class Multivector:
    """Immutable element of Cl(4,1). Operators: * geometric, ^ outer, | inner
    (left contraction), ~ reverse, +, -, scalar *."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.asarray(coeffs, dtype=float)
        if arr.shape != (DIM,):
            raise ValueError(f"expected {DIM} coefficients, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("multivector coefficients must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    # --- constructors -----------------------------------------------------

    @classmethod
    def zero(cls) -> "Multivector":
        return cls(np.zeros(DIM))

    @classmethod
    def scalar(cls, value: float) -> "Multivector":
        c = np.zeros(DIM)
        c[0] = value
        return cls(c)

    @classmethod
    def blade(cls, index: int, coeff: float = 1.0) -> "Multivector":
        c = np.zeros(DIM)
        c[index] = coeff
        return cls(c)

    @classmethod
    def vector(cls, x, y=None, z=None) -> "Multivector":
        """Euclidean vector x*e1 + y*e2 + z*e3."""
        if y is None:
            x, y, z = x
        c = np.zeros(DIM)
        c[_E1], c[_E2], c[_E3] = x, y, z
        return cls(c)

    # --- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return Multivector(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Multivector(self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Multivector(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.coeffs * float(other))
        return Multivector(_product(self.coeffs, _coerce(other).coeffs, None))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.coeffs * float(other))
        return _coerce(other) * self

    def __truediv__(self, scalar):
        return Multivector(self.coeffs / float(scalar))

    def __xor__(self, other):
        return Multivector(_product(self.coeffs, _coerce(other).coeffs, _OUTER_MASK))

    def __or__(self, other):
        return Multivector(_product(self.coeffs, _coerce(other).coeffs, _INNER_MASK))

    def __invert__(self):
        return Multivector(self.coeffs * _REVERSE_SIGNS)

    # --- structure ----------------------------------------------------------

    def grade(self, g: int) -> "Multivector":
        return Multivector(np.where(GRADES == g, self.coeffs, 0.0))

    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __eq__(self, other):
        return isinstance(other, Multivector) and bool(
            np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def approx_eq(self, other, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.coeffs - _coerce(other).coeffs)) <= tol)

    def __repr__(self):
        return f"Multivector({self!s})"

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            mag = f"{abs(c):g}" if i == 0 else (
                BLADE_NAMES[i] if abs(c) == 1.0 else f"{abs(c):g} {BLADE_NAMES[i]}"
            )
            if not parts:
                parts.append(f"-{mag}" if c < 0 else mag)
            else:
                parts.append(f"- {mag}" if c < 0 else f"+ {mag}")
        return " ".join(parts) if parts else "0"


def _coerce(value) -> Multivector:
    if isinstance(value, Multivector):
        return value
    if isinstance(value, (int, float)):
        return Multivector.scalar(float(value))
    raise TypeError(f"cannot combine Multivector with {type(value).__name__}")


ONE = Multivector.scalar(1.0)
E1 = Multivector.blade(_E1)
E2 = Multivector.blade(_E2)
E3 = Multivector.blade(_E3)
E4 = Multivector.blade(_E4)
E5 = Multivector.blade(_E5)
EO = Multivector((E5.coeffs - E4.coeffs) * 0.5)
EINF = Multivector(E4.coeffs + E5.coeffs)
E45 = Multivector.blade(_E45)
PSEUDOSCALAR = Multivector.blade(DIM - 1)


# --- spec types --------------------------------------------------------------

@dataclass(frozen=True)
class TranslationSpec:
    t: tuple[float, float, float]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.t):
            raise ValueError("translation components must be finite")


@dataclass(frozen=True)
class RotorSpec:
    """Rotor coefficients (scalar, e12, e13, e23)."""
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        n2 = self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2
        if abs(n2 - 1.0) > 1e-9:
            raise NotUnit(f"rotor norm^2 {n2} deviates from 1")


@dataclass(frozen=True)
class DilationSpec:
    d: float

    def __post_init__(self):
        if not (self.d > 0.0 and math.isfinite(self.d)):
            raise ValueError("scale factor must be positive and finite")


@dataclass(frozen=True)
class MotorDecomposition:
    """Translation vector, unit quaternion (w,x,y,z), positive uniform scale."""
    translation: tuple[float, float, float]
    rotation: tuple[float, float, float, float]
    scale: float

    def __post_init__(self):
        # normalize to plain floats (and -0.0 to +0.0) for clean serialization
        object.__setattr__(self, "translation",
                           tuple(float(v) + 0.0 for v in self.translation))
        object.__setattr__(self, "rotation",
                           tuple(float(v) + 0.0 for v in self.rotation))
        object.__setattr__(self, "scale", float(self.scale))
        n = math.sqrt(sum(c * c for c in self.rotation))
        if abs(n - 1.0) > 1e-9:
            raise NotUnit(f"quaternion norm {n} deviates from 1")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")

    @classmethod
    def identity(cls) -> "MotorDecomposition":
        return cls((0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0), 1.0)

    def is_identity(self, tol: float = 1e-12) -> bool:
        return (
            max(abs(v) for v in self.translation) <= tol
            and abs(self.scale - 1.0) <= tol
            and 1.0 - abs(self.rotation[0]) <= tol
        )


# --- conformal embeddings -----------------------------------------------------

def embed_point(x) -> Multivector:
    """x1 e1 + x2 e2 + x3 e3 + 0.5|x|^2 einf + eo."""
    x = np.asarray(x, dtype=float)
    return Multivector.vector(*x) + 0.5 * float(x @ x) * EINF + EO


def embed_sphere(center, radius: float) -> Multivector:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    c = np.asarray(center, dtype=float)
    return Multivector.vector(*c) + 0.5 * (float(c @ c) - radius * radius) * EINF + EO


def extract_sphere(s: Multivector, tol: float = 1e-9,
                   weight_tol: float = 1e-12):
    """Inverse of embed_sphere, up to overall scale.

    Returns (center, radius). Tolerances are relative to the normalized
    round's own magnitude (so they equal the absolute defaults at unit
    scale but absorb the float noise of far-from-origin rounds, whose
    coefficients grow like |x|^2). Radius^2 within the negative noise band
    is clamped to 0 (round-off on embedded points); below it the input is
    rejected.
    """
    c = s.coeffs
    weight = c[_E5] - c[_E4]  # eo coefficient
    if abs(weight) < weight_tol:
        raise ZeroWeight(f"eo coefficient {weight} below {weight_tol}")
    n = c / weight
    magnitude = max(1.0, float(np.max(np.abs(n[[_E1, _E2, _E3, _E4, _E5]]))))
    residue = n.copy()
    residue[[0, _E1, _E2, _E3, _E4, _E5]] = 0.0
    if np.max(np.abs(residue)) > tol * magnitude or abs(n[0]) > tol * magnitude:
        raise NotARound("non-sphere components beyond tolerance after normalization")
    alpha = 0.5 * (n[_E4] + n[_E5])  # einf coefficient
    center = np.array([n[_E1], n[_E2], n[_E3]])
    r2 = float(center @ center) - 2.0 * alpha
    r2_floor = -1e-9 * max(1.0, float(center @ center), abs(2.0 * alpha))
    if r2 < r2_floor:
        raise NotARound(f"negative squared radius {r2}")
    return center, math.sqrt(max(r2, 0.0))


def extract_point(p: Multivector, tol: float = 1e-9) -> np.ndarray:
    center, _ = extract_sphere(p, tol=tol)
    return center


# --- versor constructors -------------------------------------------------------

def translator(spec) -> Multivector:
    """T = 1 - 0.5*(t1 e1 + t2 e2 + t3 e3)*einf."""
    t = spec.t if isinstance(spec, TranslationSpec) else tuple(spec)
    return ONE - 0.5 * (Multivector.vector(*t) * EINF)


def translator_inverse(spec) -> Multivector:
    t = spec.t if isinstance(spec, TranslationSpec) else tuple(spec)
    return ONE + 0.5 * (Multivector.vector(*t) * EINF)


def rotor_from_quaternion(q, tol: float = 1e-9) -> Multivector:
    """Unit quaternion (w,x,y,z) -> rotor w - z e12 + y e13 - x e23."""
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if abs(n - 1.0) > tol:
        raise NotUnit(f"quaternion norm {n} deviates from 1 beyond {tol}")
    w, x, y, z = q
    c = np.zeros(DIM)
    c[0], c[_E12], c[_E13], c[_E23] = w, -z, y, -x
    return Multivector(c)


def quaternion_from_rotor(r: Multivector, tol: float = 1e-9) -> np.ndarray:
    """Rotor a + b e12 + c e13 + d e23 -> unit quaternion (a, -d, c, -b)."""
    c = r.coeffs
    a, b, cc, d = c[0], c[_E12], c[_E13], c[_E23]
    n = math.sqrt(a * a + b * b + cc * cc + d * d)
    if abs(n - 1.0) > tol:
        raise NotUnit(f"rotor norm {n} deviates from 1 beyond {tol}")
    return np.array([a, -d, cc, -b]) / n


def rotor_inverse(r: Multivector) -> Multivector:
    """Sign-flip of the bivector parts (reverse); exact inverse for unit rotors."""
    return ~r


def dilator(spec) -> Multivector:
    """D = 1 + ((1-d)/(1+d)) e45, a dilation by factor d about the origin."""
    d = spec.d if isinstance(spec, DilationSpec) else float(spec)
    if not d > 0:
        raise ValueError("scale factor must be positive")
    return ONE + ((1.0 - d) / (1.0 + d)) * E45


def dilator_inverse(spec) -> Multivector:
    d = spec.d if isinstance(spec, DilationSpec) else float(spec)
    if not d > 0:
        raise ValueError("scale factor must be positive")
    return Multivector.scalar((1.0 + d) ** 2 / (4.0 * d)) + ((d * d - 1.0) / (4.0 * d)) * E45


def versor_inverse(m: Multivector, tol: float = 1e-9) -> Multivector:
    """reverse(M) / <M * reverse(M)>_0, validating the scalar-residue contract."""
    rev = ~m
    prod = m * rev
    s = prod.scalar_part()
    residue = float(np.max(np.abs(prod.coeffs[1:])))
    scale = max(abs(s), 1.0)
    if residue > tol * scale:
        raise NotAVersor(f"M*~M residue {residue} above tolerance")
    if abs(s) <= tol:
        raise NotAVersor("M*~M scalar part vanishes; not invertible")
    return rev / s


def sandwich(m: Multivector, x: Multivector, tol: float = 1e-9) -> Multivector:
    """M X M^-1."""
    return m * x * versor_inverse(m, tol=tol)


def compose_motor(translation, rotation_q, scale: float) -> Multivector:
    """translator(t) * rotor(q) * dilator(s) - dilation first under sandwich."""
    return translator(translation) * rotor_from_quaternion(rotation_q) * dilator(scale)


_UNIT_SPHERE = embed_sphere((0.0, 0.0, 0.0), 1.0)
_ROTOR_BLADES = [0, _E12, _E13, _E23]


def decompose_motor(m: Multivector, tol: float = 1e-6) -> MotorDecomposition:
    """Split a versor M = T R D into translation, unit quaternion, scale.

    M is applied to the unit origin sphere; the image's center is the
    translation and its radius the scale. The translation is re-extracted
    once with the coarse part stripped, which keeps the center/radius
    arithmetic near the origin and full-precision even for |t| ~ 1e3.
    R := T^-1 M D^-1 must then lie in span{1, e12, e13, e23}.
    """
    try:
        center, _ = extract_sphere(sandwich(m, _UNIT_SPHERE))
        n = translator_inverse(tuple(center)) * m
        dt, _ = extract_sphere(sandwich(n, _UNIT_SPHERE))
        n = translator_inverse(tuple(dt)) * n
        translation = center + dt
        resid_center, scale = extract_sphere(sandwich(n, _UNIT_SPHERE))
    except (ZeroWeight, NotARound, NotAVersor) as exc:
        raise NotAMotor(f"cannot decompose: {exc}") from exc
    if not scale > 0.0:
        raise NotAMotor("extracted scale is zero; M collapses the unit sphere")
    rotor = n * dilator_inverse(scale)
    rc = rotor.coeffs
    norm = float(np.linalg.norm(rc[_ROTOR_BLADES]))
    residue = rc.copy()
    residue[_ROTOR_BLADES] = 0.0
    if norm == 0.0 or float(np.max(np.abs(residue))) > tol * max(norm, 1.0):
        raise NotAMotor("T^-1 M D^-1 has components outside the rotor span")
    q = quat.canonical_sign(
        np.array([rc[0], -rc[_E23], rc[_E13], -rc[_E12]]) / norm
    )
    return MotorDecomposition(tuple(translation), tuple(q), float(scale))
