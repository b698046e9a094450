"""Exact coefficient ring, groupoid-graded algebras and their matrix forms.

Coefficients live in ``Z[L^{1/2}, L^{-1/2}]`` (:class:`LaurentScalar`).  The
basis of the twisted groupoid algebra is indexed by groupoid morphisms; the
quantum torus basis is indexed by lattice vectors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

from .lattice_groupoid import (
    Cocycle,
    GroupoidMorphism,
    Skeleton,
    compose,
    pairing_value,
)


class OddHalfPower(ValueError):
    """Specialization of an odd power of ``L^{1/2}`` at a non-square."""


class ContextMismatch(TypeError):
    pass


class SizeMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# Laurent scalars


class LaurentScalar:
    """Integer Laurent polynomial in ``L^{1/2}``; key ``k`` means ``L^{k/2}``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        self.coeffs = {int(k): int(v) for k, v in (coeffs or {}).items() if v}

    @classmethod
    def const(cls, c: int) -> "LaurentScalar":
        return cls({0: c})

    @classmethod
    def L(cls, power: int = 1) -> "LaurentScalar":
        return cls({2 * power: 1})

    @classmethod
    def half(cls, k: int = 1) -> "LaurentScalar":
        """``L^{k/2}``."""
        return cls({k: 1})

    @staticmethod
    def _coerce(other):
        if isinstance(other, LaurentScalar):
            return other
        if isinstance(other, int):
            return LaurentScalar.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return LaurentScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentScalar({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[int, int] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                out[k1 + k2] = out.get(k1 + k2, 0) + v1 * v2
        return LaurentScalar(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.coeffs) != 1:
                raise ValueError("only monomials are invertible")
            (k, v), = self.coeffs.items()
            if v not in (1, -1):
                raise ValueError("only unit monomials are invertible")
            return LaurentScalar({k * n: v ** -n})
        out = LaurentScalar.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            v = self.coeffs[k]
            mono = "" if k == 0 else ("L" if k == 2 else (f"L^{k // 2}" if k % 2 == 0 else f"L^({k}/2)"))
            if not mono:
                parts.append(str(v))
            elif v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{v}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def specialize(self, q: int) -> Fraction:
        return specialize(self, q)

    def to_field(self, t):
        """Image in a field containing ``t = L^{1/2}``."""
        out = t * 0
        for k, v in self.coeffs.items():
            out += v * t ** k
        return out

    def to_json(self) -> list[list[int]]:
        return [[k, v] for k, v in sorted(self.coeffs.items())]

    @classmethod
    def from_json(cls, data) -> "LaurentScalar":
        if isinstance(data, int):
            return cls.const(data)
        return cls({int(k): int(v) for k, v in data})


def specialize(x: LaurentScalar, q: int) -> Fraction:
    """Evaluate at ``L = q`` exactly."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    root = math.isqrt(q)
    square = root * root == q
    total = Fraction(0)
    for k, v in x.coeffs.items():
        if k % 2:
            if not square:
                raise OddHalfPower(f"L^({k}/2) at q={q}")
            total += v * Fraction(root) ** k
        else:
            total += v * Fraction(q) ** (k // 2)
    return total


ONE = LaurentScalar.const(1)
ZERO = LaurentScalar()


# ---------------------------------------------------------------------------
# graded elements


TAGS = ("twisted_groupoid", "quantum_torus", "lie")


@dataclass(frozen=True)
class GradedElement:
    terms: Mapping[Any, LaurentScalar]
    tag: str = "twisted_groupoid"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown algebra tag {self.tag!r}")
        object.__setattr__(self, "terms", {k: v for k, v in self.terms.items() if v})

    @classmethod
    def basis(cls, key, tag: str = "twisted_groupoid", coeff: LaurentScalar | int = 1) -> "GradedElement":
        return cls({key: LaurentScalar._coerce(coeff)}, tag)

    @classmethod
    def zero(cls, tag: str = "twisted_groupoid") -> "GradedElement":
        return cls({}, tag)

    def _check(self, other: "GradedElement"):
        if not isinstance(other, GradedElement) or other.tag != self.tag:
            raise ContextMismatch(f"{self.tag} vs {getattr(other, 'tag', type(other))}")

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return GradedElement(out, self.tag)

    def __neg__(self):
        return GradedElement({k: -v for k, v in self.terms.items()}, self.tag)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: LaurentScalar | int) -> "GradedElement":
        c = LaurentScalar._coerce(c)
        return GradedElement({k: c * v for k, v in self.terms.items()}, self.tag)

    def __eq__(self, other):
        return isinstance(other, GradedElement) and self.tag == other.tag and self.terms == other.terms

    def __hash__(self):
        return hash((self.tag, frozenset(self.terms.items())))

    def to_json(self) -> list[dict]:
        out = []
        for k, v in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            if isinstance(k, GroupoidMorphism):
                out.append({"gamma": list(k.vec), "src": k.src, "tgt": k.tgt, "coeff": v.to_json()})
            else:
                out.append({"gamma": list(k), "src": 0, "tgt": 0, "coeff": v.to_json()})
        return out

    @classmethod
    def from_json(cls, data: str | list, tag: str = "twisted_groupoid") -> "GradedElement":
        if isinstance(data, str):
            data = json.loads(data)
        terms: dict = {}
        for item in data:
            vec = tuple(int(x) for x in item["gamma"])
            key = vec if tag == "quantum_torus" else GroupoidMorphism(int(item["src"]), int(item["tgt"]), vec)
            terms[key] = terms.get(key, ZERO) + LaurentScalar.from_json(item["coeff"])
        return cls(terms, tag)


def tga_mul(x: GradedElement, y: GradedElement, s: Cocycle) -> GradedElement:
    """Product ``e_a e_b = sigma(a, b) e_{a+b}`` in the twisted groupoid algebra."""
    x._check(y)
    if x.tag != "twisted_groupoid":
        raise ContextMismatch("tga_mul needs twisted_groupoid elements")
    out: dict = {}
    for g1, c1 in x.terms.items():
        for g2, c2 in y.terms.items():
            sign = s(g1, g2)
            if not sign:
                continue
            g = compose(g1, g2)
            out[g] = out.get(g, ZERO) + c1 * c2 * sign
    return GradedElement(out, x.tag)


def _transport(skeleton: Skeleton | None, g: GroupoidMorphism):
    return skeleton.to_automorphism(g) if skeleton is not None else g.vec


def lie_bracket(
    x: GradedElement,
    y: GradedElement,
    s: Cocycle,
    pairing: Sequence[Sequence[int]],
    skeleton: Skeleton | None = None,
) -> GradedElement:
    """``[e_a, e_b] = <Fa, Fb> (sigma(a,b) e_{ab} + sigma(b,a) e_{ba})``.

    Each sign sits on its own composite, so the bracket is antisymmetric for
    any cocycle; on automorphism pairs with the bilinear-sign cocycle the two
    signs agree.
    """
    x._check(y)
    if x.tag != "lie":
        raise ContextMismatch("lie_bracket needs lie elements")
    p = [list(r) for r in pairing]
    if any(p[i][j] != -p[j][i] for i in range(len(p)) for j in range(len(p))):
        raise ValueError("pairing must be antisymmetric")
    out: dict = {}
    for g1, c1 in x.terms.items():
        f1 = _transport(skeleton, g1)
        for g2, c2 in y.terms.items():
            f2 = _transport(skeleton, g2)
            w = pairing_value(p, f1, f2)
            if not w:
                continue
            c = c1 * c2 * w
            for a, b in ((g1, g2), (g2, g1)):
                sign = s(a, b)
                if sign:
                    g = compose(a, b)
                    out[g] = out.get(g, ZERO) + c * sign
    return GradedElement(out, x.tag)


def qtorus_mul(x: GradedElement, y: GradedElement, pairing: Sequence[Sequence[int]]) -> GradedElement:
    """``e_a e_b = L^{<a,b>/2} e_{a+b}``."""
    x._check(y)
    if x.tag != "quantum_torus":
        raise ContextMismatch("qtorus_mul needs quantum_torus elements")
    out: dict = {}
    for a, c1 in x.terms.items():
        for b, c2 in y.terms.items():
            k = pairing_value(pairing, a, b)
            key = tuple(u + v for u, v in zip(a, b))
            out[key] = out.get(key, ZERO) + c1 * c2 * LaurentScalar.half(k)
    return GradedElement(out, x.tag)


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class MatrixElement:
    """Sparse ``size x size`` matrix; ``entries`` maps ``(row, col)`` to ring elements."""

    size: int
    entries: Mapping[tuple[int, int], Any] = field(default_factory=dict)
    upper_triangular: bool = False

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise SizeMismatch(f"entry ({i},{j}) outside {self.size}x{self.size}")
            if v:
                clean[(i, j)] = v
        if self.upper_triangular and any(i >= j for i, j in clean):
            raise ValueError("entries must be strictly upper triangular")
        object.__setattr__(self, "entries", clean)

    @classmethod
    def identity(cls, size: int, one: Any = ONE) -> "MatrixElement":
        return cls(size, {(i, i): one for i in range(size)})

    @classmethod
    def unit(cls, size: int, i: int, j: int, coeff: Any = ONE) -> "MatrixElement":
        return cls(size, {(i, j): coeff})

    def __getitem__(self, ij):
        return self.entries.get(ij, 0)

    def __add__(self, other: "MatrixElement") -> "MatrixElement":
        if other.size != self.size:
            raise SizeMismatch(f"{self.size} vs {other.size}")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return MatrixElement(self.size, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "MatrixElement":
        return MatrixElement(self.size, {k: c * v for k, v in self.entries.items()})

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, MatrixElement) or other.size != self.size:
            return False
        keys = set(self.entries) | set(other.entries)
        return all(self[k] - other[k] == 0 for k in keys)

    def __hash__(self):
        return hash((self.size, frozenset(self.entries)))

    def pretty(self) -> str:
        cells = [[str(self[(i, j)]) for j in range(self.size)] for i in range(self.size)]
        width = max(len(c) for row in cells for c in row)
        return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


def mat_mul(a: MatrixElement, b: MatrixElement, entry_mul: Callable | None = None) -> MatrixElement:
    if a.size != b.size:
        raise SizeMismatch(f"{a.size} vs {b.size}")
    mul = entry_mul or (lambda u, v: u * v)
    cols: dict[int, list] = {}
    for (k, j), v in b.entries.items():
        cols.setdefault(k, []).append((j, v))
    out: dict = {}
    for (i, k), u in a.entries.items():
        for j, v in cols.get(k, ()):
            p = mul(u, v)
            out[(i, j)] = out[(i, j)] + p if (i, j) in out else p
    return MatrixElement(a.size, out)


# ---------------------------------------------------------------------------
# height-truncated algebra over a groupoid (twisted quantum torus)


def coefficient_field(extra: Sequence[str] = ()):
    """``(K, t, extras)`` with ``K = Q(t, *extra)`` and ``t = L^{1/2}``."""
    from sympy import QQ
    from sympy.polys.fields import field

    names = ",".join(("t", *extra))
    K, *gens = field(names, QQ)
    return K, gens[0], tuple(gens[1:])


Key = tuple  # (src, tgt, vec)


class TruncatedAlgebra:
    """Basis ``e_(i, j, v)`` with ``e_(i,j,a) e_(j,k,b) = sign(a,b) t^<a,b> e_(i,k,a+b)``.

    One object gives the quantum torus; several objects with zero pairing give
    (twisted) upper triangular matrix algebras.  Terms whose height in the
    generators ``S`` exceeds ``N`` are discarded.  ``S`` must be linearly
    independent so that heights are well defined.
    """

    def __init__(
        self,
        objects: int,
        pairing: Sequence[Sequence[int]],
        generators: Sequence[Sequence[int]],
        N: int,
        field_data=None,
        sign: Callable[[tuple, tuple], int] | None = None,
    ):
        import sympy

        self.objects = objects
        self.pairing = tuple(tuple(int(x) for x in r) for r in pairing)
        d = len(self.pairing)
        if any(self.pairing[i][j] != -self.pairing[j][i] for i in range(d) for j in range(d)):
            raise ValueError("pairing must be antisymmetric")
        self.generators = tuple(tuple(int(x) for x in g) for g in generators)
        if any(len(g) != d for g in self.generators):
            raise ValueError("generators must live in the pairing lattice")
        gm = sympy.Matrix([list(g) for g in self.generators]).T
        if gm.rank() != len(self.generators):
            raise ValueError("height generators must be linearly independent")
        self._pinv = (gm.T * gm).inv() * gm.T
        self._gm = gm
        self.N = N
        self.K, self.t, self.extras = field_data or coefficient_field()
        self.sign = sign
        self._height_cache: dict = {}

    @property
    def rank(self) -> int:
        return len(self.pairing)

    def coords(self, vec: Sequence[int]) -> tuple[int, ...] | None:
        """Coordinates in ``S`` if ``vec`` lies in the monoid spanned by ``S``."""
        vec = tuple(vec)
        if vec in self._height_cache:
            return self._height_cache[vec]
        import sympy

        v = sympy.Matrix(list(vec))
        c = self._pinv * v
        out = None
        if self._gm * c == v and all(x.is_integer and x >= 0 for x in c):
            out = tuple(int(x) for x in c)
        self._height_cache[vec] = out
        return out

    def height(self, vec: Sequence[int]) -> int:
        c = self.coords(vec)
        if c is None:
            raise ValueError(f"{tuple(vec)} is not in the monoid spanned by the generators")
        return sum(c)

    def pair(self, a, b) -> int:
        return pairing_value(self.pairing, a, b)

    # elements are plain dicts key -> K element

    def one(self) -> dict:
        z = (0,) * self.rank
        return {(i, i, z): self.K.one for i in range(self.objects)}

    def basis(self, i: int, j: int, vec: Sequence[int], coeff=None) -> dict:
        c = self.K.one if coeff is None else self.K(coeff)
        return self.truncate({(i, j, tuple(vec)): c})

    def truncate(self, x: Mapping) -> dict:
        return {k: v for k, v in x.items() if v and self.height(k[2]) <= self.N}

    def add(self, x: Mapping, y: Mapping, c=1) -> dict:
        out = dict(x)
        for k, v in y.items():
            out[k] = out.get(k, self.K.zero) + c * v
        return {k: v for k, v in out.items() if v}

    def scale(self, x: Mapping, c) -> dict:
        return {k: c * v for k, v in x.items() if c * v}

    def mul(self, x: Mapping, y: Mapping) -> dict:
        by_src: dict[int, list] = {}
        for k, v in y.items():
            by_src.setdefault(k[0], []).append((k, v))
        t = self.t
        out: dict = {}
        for (i, j, a), u in x.items():
            ha = self.height(a)
            for (_, k, b), v in by_src.get(j, ()):
                if ha + self.height(b) > self.N:
                    continue
                s = self.sign(a, b) if self.sign else 1
                if not s:
                    continue
                key = (i, k, tuple(p + q for p, q in zip(a, b)))
                out[key] = out.get(key, self.K.zero) + s * u * v * t ** self.pair(a, b)
        return {k: v for k, v in out.items() if v}

    def is_nilpotent(self, x: Mapping) -> bool:
        return all(self.height(k[2]) >= 1 for k in x)

    def exp(self, x: Mapping) -> dict:
        if not self.is_nilpotent(x):
            raise ValueError("exp needs an element of positive height")
        out = self.one()
        term = self.one()
        for n in range(1, self.N + 1):
            term = self.scale(self.mul(term, x), self.K(Fraction(1, n)))
            if not term:
                break
            out = self.add(out, term)
        return out

    def log(self, g: Mapping) -> dict:
        x = self.add(g, self.one(), -1)
        if not self.is_nilpotent(x):
            raise ValueError("log needs an element of the form 1 + (positive height)")
        out: dict = {}
        power = self.one()
        for n in range(1, self.N + 1):
            power = self.mul(power, x)
            if not power:
                break
            out = self.add(out, power, self.K(Fraction((-1) ** (n + 1), n)))
        return out

    def product(self, factors: Iterable[Mapping]) -> dict:
        out = self.one()
        for f in factors:
            out = self.mul(out, f)
        return out

    def component(self, x: Mapping, h: int) -> dict:
        return {k: v for k, v in x.items() if self.height(k[2]) == h}

    def equal(self, x: Mapping, y: Mapping) -> bool:
        return not self.add(x, y, -1)

    def first_difference(self, x: Mapping, y: Mapping):
        """Lowest-height key where ``x`` and ``y`` differ, with both coefficients."""
        d = self.add(x, y, -1)
        if not d:
            return None
        key = min(d, key=lambda k: (self.height(k[2]), k))
        return key, x.get(key, self.K.zero), y.get(key, self.K.zero)
