"""Stability data, ray factorizations and wall-crossing by height induction.

Phases are compared exactly when the charge is given by Gaussian rationals:
two charges in a common open half-plane are ordered by the sign of their
cross product, and comparisons against sector endpoints (rational multiples
of pi) are decided at high precision with an exact fallback for the only
angles whose tangent is rational.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import mpmath

from .graded_algebra import TruncatedAlgebra

Key = tuple  # (src, tgt, vec)


class ZeroCharge(ValueError):
    pass


class PhaseCollision(ValueError):
    pass


class DegenerateCharge(ValueError):
    pass


class NotNilpotent(ValueError):
    pass


class NotStrict(ValueError):
    """Charges of the support do not lie in a strict sector."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12) if x != int(x) else Fraction(int(x))
    return Fraction(x)


# ---------------------------------------------------------------------------
# central charges


@dataclass(frozen=True)
class CentralCharge:
    """Linear map ``Z^d -> C`` given by its values on the standard basis.

    In ``exact`` mode values are pairs of Fractions.  ``float`` mode keeps
    doubles and compares phases with tolerance ``tol``.
    """

    values: tuple[tuple[Any, Any], ...]
    mode: str = "exact"
    tol: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown charge mode {self.mode!r}")
        conv = _frac if self.mode == "exact" else float
        object.__setattr__(self, "values", tuple((conv(a), conv(b)) for a, b in self.values))

    @classmethod
    def from_generators(cls, pairs: Sequence[tuple[Sequence[int], complex | tuple]], mode: str = "exact", tol: float = 1e-12):
        """Build from values on any basis ``[(gamma, z), ...]`` of ``Q^d``."""
        import sympy

        gammas = [list(g) for g, _ in pairs]
        zs = [(z.real, z.imag) if isinstance(z, complex) else tuple(z) for _, z in pairs]
        conv = _frac if mode == "exact" else float
        zs = [(conv(a), conv(b)) for a, b in zs]
        m = sympy.Matrix(gammas)
        if m.shape[0] != m.shape[1] or m.det() == 0:
            raise ValueError("charge generators must form a basis")
        inv = m.inv()  # rows of m are generators; e_k = sum inv[k, g] * gamma_g
        vals = []
        for k in range(m.shape[0]):
            re = sum(Fraction(int(inv[k, g].p), int(inv[k, g].q)) * zs[g][0] for g in range(len(zs)))
            im = sum(Fraction(int(inv[k, g].p), int(inv[k, g].q)) * zs[g][1] for g in range(len(zs)))
            vals.append((re, im))
        return cls(tuple(vals), mode, tol)

    def __call__(self, vec: Sequence[int]) -> tuple:
        if len(vec) != len(self.values):
            raise ValueError("vector rank does not match the charge")
        re = sum((c * v[0] for c, v in zip(vec, self.values)), 0)
        im = sum((c * v[1] for c, v in zip(vec, self.values)), 0)
        return (re, im)

    def is_zero(self, z) -> bool:
        if self.mode == "exact":
            return z[0] == 0 and z[1] == 0
        return math.hypot(*z) <= self.tol

    def phase(self, vec) -> float:
        """Argument in units of pi, in ``(-1, 1]`` (for display)."""
        z = self(vec)
        return float(mpmath.atan2(_mp(z[1]), _mp(z[0])) / mpmath.pi)


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


# ---------------------------------------------------------------------------
# sectors


@dataclass(frozen=True)
class Sector:
    """Half-open angular interval ``[start, end)`` in units of pi."""

    start: Fraction
    end: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", Fraction(self.start))
        object.__setattr__(self, "end", Fraction(self.end))
        if not (0 < self.end - self.start < 1):
            raise NotStrict(f"sector [{self.start}, {self.end}) is not strict")


_RATIONAL_TAN = {  # angles in units of pi whose direction vector is exact
    Fraction(0): (1, 0), Fraction(1, 4): (1, 1), Fraction(1, 2): (0, 1), Fraction(3, 4): (-1, 1),
    Fraction(1): (-1, 0), Fraction(5, 4): (-1, -1), Fraction(3, 2): (0, -1), Fraction(7, 4): (1, -1),
}


def _reduce(r: Fraction) -> Fraction:
    return r - 2 * math.floor(r / 2)


def _on_ray(z, r: Fraction) -> bool:
    """Exact test for ``arg(z) = r pi``; only angles with rational tangent can hit."""
    d = _RATIONAL_TAN.get(_reduce(r))
    return d is not None and cross(d, z) == 0 and dot(d, z) > 0


def angle_offset(z, r: Fraction, tol: float | None = None):
    """``(arg(z)/pi - r) mod 2`` in ``[0, 2)``; exactly ``0`` when ``z`` lies on the ray."""
    if tol is None and isinstance(z[0], Fraction) and _on_ray(z, r):
        return 0
    with mpmath.workdps(60):
        a = mpmath.atan2(_mp(z[1]), _mp(z[0])) / mpmath.pi
        d = a - mpmath.mpf(r.numerator) / r.denominator
        d = d - 2 * mpmath.floor(d / 2)
        if tol is not None and (d <= tol or 2 - d <= tol):
            return 0
        return d


def in_sector(z, v: Sector, tol: float | None = None) -> bool:
    """Membership of ``arg(z)`` in ``[start, end)``."""
    if z[0] == 0 and z[1] == 0:
        return False
    off = angle_offset(z, v.start, tol)
    if off == 0:
        return True
    width = v.end - v.start
    if tol is None and isinstance(z[0], Fraction) and _on_ray(z, v.end):
        return False
    w = mpmath.mpf(width.numerator) / width.denominator
    if tol is not None:
        return off < w - tol
    return off < w


def clockwise_key(charge: CentralCharge):
    """Sort key putting larger phases first; valid inside a strict sector."""
    tol = charge.tol if charge.mode == "float" else None

    def cmp(u, v):
        c = cross(u, v)
        if tol is not None and abs(c) <= tol * math.hypot(*u) * math.hypot(*v):
            return 0
        return (c > 0) - (c < 0)  # v clockwise from u means u first

    return functools.cmp_to_key(cmp)


def same_phase(charge: CentralCharge, u, v) -> bool:
    c = cross(u, v)
    if charge.mode == "float":
        return abs(c) <= charge.tol * math.hypot(*u) * math.hypot(*v) and dot(u, v) > 0
    return c == 0 and dot(u, v) > 0


# ---------------------------------------------------------------------------
# stability data


@dataclass
class StabilityData:
    """Charge plus ``a``: a map from basis keys ``(src, tgt, vec)`` to coefficients.

    ``algebra`` supplies the truncated target (height cutoff ``N`` and the
    height-one generators ``S``).
    """

    charge: CentralCharge
    a: Mapping[Key, Any]
    algebra: TruncatedAlgebra
    sector: Sector | None = None

    def __post_init__(self):
        self.a = {k: v for k, v in self.a.items() if v}
        for k in self.a:
            if self.algebra.coords(k[2]) is None:
                raise ValueError(f"{k} is not in the monoid generated by the height-one set")
            if self.algebra.height(k[2]) > self.algebra.N:
                raise ValueError(f"{k} exceeds the truncation height")

    @property
    def height(self) -> int:
        return self.algebra.N

    @property
    def support_generators(self):
        return self.algebra.generators

    def support(self) -> list[Key]:
        return sorted(self.a)

    def in_v(self, key: Key, v: Sector | None) -> bool:
        if v is None:
            return True
        tol = self.charge.tol if self.charge.mode == "float" else None
        return in_sector(self.charge(key[2]), v, tol)


@dataclass(frozen=True)
class SupportCertificate:
    mode: str
    passed: bool
    witness: Key | None = None
    C: float | None = None
    C_squared: Fraction | None = None
    detail: str = ""


def _norm_sq(vec, norm: str) -> Fraction:
    if norm == "l2":
        return Fraction(sum(x * x for x in vec))
    if norm == "l1":
        return Fraction(sum(abs(x) for x in vec)) ** 2
    if norm == "linf":
        return Fraction(max((abs(x) for x in vec), default=0)) ** 2
    raise ValueError(f"unknown norm {norm!r}")


def check_support(
    data: StabilityData,
    mode: str = "norm",
    C: Fraction | float | None = None,
    norm: str = "l2",
    Q: Sequence[Sequence[int]] | None = None,
) -> SupportCertificate:
    """Check the support property in ``norm`` or ``quadratic`` mode."""
    support = data.support()
    for key in support:
        if data.charge.is_zero(data.charge(key[2])):
            return SupportCertificate(mode, False, key, detail="Z vanishes on a support element")
    if mode == "norm":
        worst, wkey = Fraction(0), None
        for key in support:
            z = data.charge(key[2])
            r = _norm_sq(key[2], norm) / _frac(z[0] * z[0] + z[1] * z[1])
            if r > worst:
                worst, wkey = r, key
        if C is None:
            return SupportCertificate(mode, True, C=math.sqrt(worst), C_squared=worst)
        c2 = _frac(C) ** 2
        if worst > c2:
            return SupportCertificate(mode, False, wkey, C=float(C), C_squared=c2, detail="bound exceeded")
        return SupportCertificate(mode, True, C=float(C), C_squared=c2)
    if mode == "quadratic":
        import sympy

        if Q is None:
            raise ValueError("quadratic mode needs Q")
        q = sympy.Matrix(Q)
        if q != q.T:
            raise ValueError("Q must be symmetric")
        if data.charge.mode != "exact":
            raise ValueError("quadratic certificates need an exact charge")
        zmat = sympy.Matrix(
            [[sympy.Rational(v[0].numerator, v[0].denominator) for v in data.charge.values],
             [sympy.Rational(v[1].numerator, v[1].denominator) for v in data.charge.values]]
        )
        kernel = zmat.nullspace()
        if kernel:
            kmat = sympy.Matrix.hstack(*kernel)
            restricted = kmat.T * q * kmat
            if not restricted.is_negative_semidefinite:
                return SupportCertificate(mode, False, detail="Q is not non-positive on ker Z")
        for key in support:
            v = sympy.Matrix(list(key[2]))
            if (v.T * q * v)[0, 0] < 0:
                return SupportCertificate(mode, False, key, detail="Q negative on a support element")
        return SupportCertificate(mode, True)
    raise ValueError(f"unknown certificate mode {mode!r}")


# ---------------------------------------------------------------------------
# sector and ray elements


def _lie_element(data: StabilityData, keys: Iterable[Key]) -> dict:
    return {k: data.algebra.K(data.a[k]) for k in keys}


def sector_element(data: StabilityData, v: Sector | None = None) -> dict:
    """``exp`` of the sum of ``a(gamma)`` over charges in ``v``."""
    keys = [k for k in data.support() if data.in_v(k, v)]
    x = _lie_element(data, keys)
    if not data.algebra.is_nilpotent(x):
        raise NotNilpotent("a(gamma) must have positive height")
    return data.algebra.exp(x)


def rays(data: StabilityData, v: Sector | None = None) -> list[list[Key]]:
    """Support in ``v`` grouped by phase, in clockwise order."""
    keys = [k for k in data.support() if data.in_v(k, v)]
    zs = {k: data.charge(k[2]) for k in keys}
    for k, z in zs.items():
        if data.charge.is_zero(z):
            raise ZeroCharge(f"Z vanishes on {k}")
    if v is None:
        _check_half_plane([zs[k] for k in keys])
    keyfun = clockwise_key(data.charge)
    ordered = sorted(keys, key=lambda k: keyfun(zs[k]))
    groups: list[list[Key]] = []
    for k in ordered:
        if groups and same_phase(data.charge, zs[groups[-1][0]], zs[k]):
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def _check_half_plane(zs: Sequence) -> None:
    """All charges lie in an open half-plane (so clockwise order is total)."""
    for z in zs:
        for w in zs:
            if cross(z, w) == 0 and dot(z, w) < 0:
                raise NotStrict("support charges are not in a strict sector")
    # angular spread below pi: every pair is within pi and no triple wraps
    for a, b, c in itertools.combinations(zs, 3):
        if cross(a, b) > 0 and cross(b, c) > 0 and cross(c, a) > 0:
            raise NotStrict("support charges surround the origin")
        if cross(a, b) < 0 and cross(b, c) < 0 and cross(c, a) < 0:
            raise NotStrict("support charges surround the origin")


def ray_elements(data: StabilityData, v: Sector | None = None) -> list[tuple[list[Key], dict]]:
    out = []
    for group in rays(data, v):
        x = _lie_element(data, group)
        if not data.algebra.is_nilpotent(x):
            raise NotNilpotent("a(gamma) must have positive height")
        out.append((group, data.algebra.exp(x)))
    return out


def clockwise_product(data: StabilityData, v: Sector | None = None) -> dict:
    return data.algebra.product(g for _, g in ray_elements(data, v))


@dataclass(frozen=True)
class FactorReport:
    passed: bool
    mode: str
    key: Key | None = None
    lhs: Any = None
    rhs: Any = None

    def __bool__(self):
        return self.passed


def factor_check(
    data: StabilityData,
    v: Sector | None = None,
    mode: str = "direct",
    split: Fraction | None = None,
    reference: StabilityData | None = None,
) -> FactorReport:
    """Compare two computations of the sector element.

    ``direct``: ``exp(sum a)`` against the clockwise product of ray factors.
    ``split``: the clockwise product over ``v`` against the product over the
    two halves cut at angle ``split`` (earlier half on the left).
    ``reference``: the clockwise product against that of ``reference`` data.
    """
    alg = data.algebra
    if mode == "direct":
        lhs, rhs = sector_element(data, v), clockwise_product(data, v)
    elif mode == "split":
        if v is None or split is None or not (v.start < split < v.end):
            raise ValueError("split mode needs a sector and an interior angle")
        lhs = clockwise_product(data, v)
        rhs = alg.mul(clockwise_product(data, Sector(split, v.end)), clockwise_product(data, Sector(v.start, split)))
    elif mode == "reference":
        if reference is None:
            raise ValueError("reference mode needs reference data")
        lhs, rhs = clockwise_product(data, v), clockwise_product(reference, v)
    else:
        raise ValueError(f"unknown factor_check mode {mode!r}")
    diff = alg.first_difference(lhs, rhs)
    if diff is None:
        return FactorReport(True, mode)
    return FactorReport(False, mode, *diff)


# ---------------------------------------------------------------------------
# wall crossing


def monoid_elements(algebra: TruncatedAlgebra) -> list[tuple[int, ...]]:
    """Nonzero non-negative combinations of the generators up to height ``N``."""
    d = len(algebra.generators)
    out = []
    for coeffs in itertools.product(range(algebra.N + 1), repeat=d):
        if 0 < sum(coeffs) <= algebra.N:
            out.append(tuple(sum(c * g[i] for c, g in zip(coeffs, algebra.generators)) for i in range(algebra.rank)))
    return out


def wall_cross(data: StabilityData, new_charge: CentralCharge, v_old: Sector | None = None) -> StabilityData:
    """Recompute ``a`` so the clockwise product is unchanged under ``new_charge``."""
    alg = data.algebra
    for vec in monoid_elements(alg):
        if new_charge.is_zero(new_charge(vec)):
            raise DegenerateCharge(f"new charge vanishes on {vec}")
    keys = [k for k in data.support() if data.in_v(k, v_old)]
    restricted = StabilityData(data.charge, {k: data.a[k] for k in keys}, alg)
    target_log = alg.log(clockwise_product(restricted))
    a_new: dict = {}
    for h in range(1, alg.N + 1):
        trial = StabilityData(new_charge, a_new, alg)
        current = alg.log(clockwise_product(trial))
        delta = alg.component(alg.add(target_log, current, -1), h)
        for k, c in delta.items():
            a_new[k] = a_new.get(k, alg.K.zero) + c
        a_new = {k: c for k, c in a_new.items() if c}
    out = StabilityData(new_charge, a_new, alg)
    _check_collisions(out)
    return out


def _check_collisions(data: StabilityData) -> None:
    alg = data.algebra
    for group in rays(data):
        for k1, k2 in itertools.combinations(group, 2):
            v1, v2 = k1[2], k2[2]
            proportional = all(v1[i] * v2[j] == v1[j] * v2[i] for i in range(len(v1)) for j in range(len(v1)))
            if proportional:
                continue
            e1, e2 = {k1: alg.K.one}, {k2: alg.K.one}
            if not alg.equal(alg.mul(e1, e2), alg.mul(e2, e1)):
                raise PhaseCollision(f"{k1} and {k2} share a phase and do not commute")


# ---------------------------------------------------------------------------
# spectrum


def dilog_coefficient(alg: TruncatedAlgebra, k: int):
    """Coefficient of ``x^k`` in the logarithm of the quantum dilogarithm."""
    t = alg.t
    return alg.K((-1) ** (k - 1)) / (k * (t**k - t ** (-k)))


@dataclass
class DTSpectrum:
    rays: list[tuple[float, dict]]
    omega: dict | None = None
    mu: dict = field(default_factory=dict)


def _primitive(vec):
    g = 0
    for x in vec:
        g = math.gcd(g, x)
    return tuple(x // g for x in vec), g


def _ground(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _as_integer(x) -> int | None:
    """``x`` as an integer if it is an integral constant of the field."""
    if x.numer.is_zero:
        return 0
    if not (x.numer.is_ground and x.denom.is_ground):
        return None
    value = _ground(x.numer.LC) / _ground(x.denom.LC)
    return int(value) if value.denominator == 1 else None


def extract_spectrum(data: StabilityData, v: Sector | None = None) -> DTSpectrum:
    """Group ``a`` into clockwise rays and extract integer invariants.

    On each ray the diagonal coefficients are matched against
    ``sum_m Omega(m g) c_k`` with ``c_k`` the dilogarithm coefficients, solved
    upward in multiples of the primitive class ``g``.  Off-diagonal terms are
    reported raw in ``mu``.
    """
    alg = data.algebra
    out_rays = []
    omega: dict | None = {}
    mu = {}
    for group in rays(data, v):
        coeffs = {k: data.a[k] for k in group}
        out_rays.append((data.charge.phase(group[0][2]), coeffs))
        diag = {k: c for k, c in coeffs.items() if k[0] == k[1]}
        mu.update({k: c for k, c in coeffs.items() if k[0] != k[1]})
        if omega is None:
            continue
        by_obj: dict = {}
        for (i, _, vec), c in diag.items():
            prim, n = _primitive(vec)
            by_obj.setdefault((i, prim), {})[n] = c
        for (i, prim), series in by_obj.items():
            top = max(series)
            found: dict[int, int] = {}
            for n in range(1, top + 1):
                rest = alg.K(series.get(n, 0))
                for m, om in found.items():
                    if n % m == 0 and m < n:
                        rest -= om * dilog_coefficient(alg, n // m)
                val = _as_integer(rest / dilog_coefficient(alg, 1))
                if val is None:
                    omega = None
                    break
                if val:
                    found[n] = val
            if omega is None:
                break
            for n, val in found.items():
                omega[(i, i, tuple(n * x for x in prim))] = val
    return DTSpectrum(out_rays, omega, mu)
