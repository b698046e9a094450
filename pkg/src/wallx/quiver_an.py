"""The A_n quiver: indecomposables, graded Hom, cones, Hall products and F_q counts.

Vertices are ``1..n`` with arrows ``v -> v - 1``.  ``M_ij`` (``0 <= i < j <= n``)
is the indecomposable supported on vertices ``i+1..j``; ``M_ij[r]`` is its
shift.  Two realizations of Hall coefficients are provided: Laurent
polynomials in ``L`` for the correspondence product, and exact point counts
over a prime field for the oracle.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Mapping, Sequence

from .graded_algebra import LaurentScalar, MatrixElement, ONE, ZERO, mat_mul
from .lattice_groupoid import an_phi, root_vector


class NoSuchMorphism(ValueError):
    pass


class ShiftedTerm(ValueError):
    pass


class CutoffExceeded(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Indec:
    i: int
    j: int
    shift: int = 0

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ValueError(f"need 0 <= i < j, got M_{self.i}{self.j}")

    def check(self, n: int) -> "Indec":
        if self.j > n:
            raise ValueError(f"M_{self.i}{self.j} does not exist for A_{n}")
        return self

    def __getitem__(self, r: int) -> "Indec":
        return Indec(self.i, self.j, self.shift + r)

    def unshifted(self) -> "Indec":
        return Indec(self.i, self.j)

    def __repr__(self):
        s = f"M{self.i}{self.j}"
        return s if self.shift == 0 else f"{s}[{self.shift}]"


def indecomposables(n: int, shifts: Sequence[int] = (0,)) -> list[Indec]:
    return [Indec(i, j, s) for s in shifts for i in range(n) for j in range(i + 1, n + 1)]


def _maybe(i: int, j: int, shift: int) -> list[Indec]:
    return [] if i == j else [Indec(min(i, j), max(i, j), shift)] if i < j else []


# ---------------------------------------------------------------------------
# graded Hom and cones


def hom_case(a: Indec, b: Indec) -> tuple[str, int] | None:
    """``("alpha", 0)`` or ``("beta", 1)`` for the unshifted pair, else ``None``."""
    i, j, k, l = a.i, a.j, b.i, b.j
    if i <= k < j <= l:
        return ("alpha", 0)
    if k < i <= l < j:
        return ("beta", 1)
    return None


def hom_ext(a: Indec, b: Indec) -> dict[int, int]:
    """``{d: dim Hom^d(a, b)}`` with zero dimensions omitted.

    ``Hom^d(M[r], N[s]) = Hom^{d+s-r}(M, N)``, so the unshifted degree ``e``
    moves to ``e + r - s``.
    """
    case = hom_case(a, b)
    if case is None:
        return {}
    return {case[1] + a.shift - b.shift: 1}


def cone_of(a: Indec, b: Indec, kind: str, degree: int = 0) -> list[Indec]:
    """Summands of the cone of the named morphism ``a[-d] -> b``.

    ``kind`` is ``"alpha"`` or ``"beta"`` for the generator of the nonzero
    graded Hom (``d`` is then read off from :func:`hom_ext`), or ``"zero"``
    for the zero map of degree ``degree``.
    """
    if kind == "zero":
        return sorted([b, a[1 - degree]])
    case = hom_case(a, b)
    if case is None or case[0] != kind:
        raise NoSuchMorphism(f"no {kind} morphism {a} -> {b}")
    i, j, k, l = a.i, a.j, b.i, b.j
    s = b.shift
    if kind == "alpha":
        out = _maybe(j, l, s) + _maybe(i, k, s + 1)
    else:
        out = _maybe(i, l, s) + _maybe(k, j, s)
    return sorted(out)


# ---------------------------------------------------------------------------
# correspondence Hall algebra


class HallElement:
    """Finite sum of basis classes with Laurent (or rational) coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def basis(cls, key, coeff=ONE) -> "HallElement":
        return cls({key: coeff})

    def __add__(self, other: "HallElement") -> "HallElement":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return HallElement(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "HallElement":
        return HallElement({k: c * v for k, v in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, HallElement):
            return NotImplemented
        return (self - other).terms == {}

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({v})*{k!r}" for k, v in sorted(self.terms.items(), key=lambda kv: repr(kv[0])))


def _corr_basis(x: Indec, y: Indec) -> Indec | None:
    """Middle term of the correspondence ``rho_x rho_y`` or ``None``."""
    if x.shift != y.shift or x.j != y.i:
        return None
    return Indec(x.i, y.j, x.shift)


L_MINUS_1 = LaurentScalar.L() - 1


def corr_product(
    x: HallElement,
    y: HallElement,
    nu: Callable[[Indec, Indec], int] | None = None,
    basis: str = "point",
) -> HallElement:
    """Product from the indecomposable-cone correspondence.

    ``rho_{M_ki[r]} rho_{M_ij[r]} = (L - 1) rho_{M_kj[r]}`` for ``k < i < j``;
    every other basis pair multiplies to zero.  ``nu(x, y)`` optionally
    supplies an extra weight ``L^{-nu}``.  With ``basis="stack"`` the classes
    are ``rho / (L - 1)`` and the structure constant is ``1``.
    """
    if basis not in ("point", "stack"):
        raise ValueError(f"unknown basis {basis!r}")
    factor = L_MINUS_1 if basis == "point" else ONE
    out: dict = {}
    for a, c1 in x.terms.items():
        for b, c2 in y.terms.items():
            m = _corr_basis(a, b)
            if m is None:
                continue
            w = factor
            if nu is not None:
                w = w * LaurentScalar.L(-nu(a, b))
            out[m] = out.get(m, ZERO) + c1 * c2 * w
    return HallElement(out)


def integrate(x: HallElement, n: int) -> MatrixElement:
    """``rho_{M_ij} -> E_ij`` as a strictly upper triangular ``(n+1)``-matrix."""
    entries: dict = {}
    for m, c in x.terms.items():
        if m.shift != 0:
            raise ShiftedTerm(f"{m} is shifted")
        m.check(n)
        entries[(m.i, m.j)] = entries.get((m.i, m.j), ZERO) + c
    return MatrixElement(n + 1, entries, upper_triangular=True)


def star_mul(a: MatrixElement, b: MatrixElement) -> MatrixElement:
    """Target product for the integration map: ``(L - 1)`` times the matrix product."""
    return mat_mul(a, b).scale(L_MINUS_1)


def phi_map(v: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    """``u_ij -> e_j - e_i``; ``v`` is a dimension vector on vertices ``1..n``."""
    n = len(v) if n is None else n
    if len(v) != n:
        raise ValueError("dimension vector has the wrong length")
    return an_phi(n)(v)


def dim_vector(m: Indec, n: int) -> tuple[int, ...]:
    return root_vector(n, m.i, m.j)


# ---------------------------------------------------------------------------
# linear algebra over F_p


def rank_mod(rows: Sequence[Sequence[int]], p: int) -> int:
    m = [[x % p for x in r] for r in rows]
    if not m or not m[0]:
        return 0
    rank = 0
    ncols = len(m[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][c], p - 2, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                f = m[r][c]
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def matmul_mod(a, b, p: int, rows: int, cols: int):
    inner = len(b)
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) % p for j in range(cols)] for i in range(rows)]


def _identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _check_prime(q: int) -> None:
    if q < 2 or any(q % d == 0 for d in range(2, int(q**0.5) + 1)):
        raise ValueError(f"q={q} must be prime")


@dataclass(frozen=True)
class FqRep:
    """Representation over ``F_q``; ``maps[v]`` is the matrix of ``V_v -> V_{v-1}``."""

    q: int
    dims: tuple[int, ...]
    maps: Mapping[int, tuple[tuple[int, ...], ...]]

    def __post_init__(self):
        n = len(self.dims)
        for v in range(2, n + 1):
            m = self.maps.get(v, ())
            rows, cols = self.dims[v - 2], self.dims[v - 1]
            if len(m) != rows or any(len(r) != cols for r in m):
                raise ValueError(f"arrow {v}->{v - 1} needs a {rows}x{cols} matrix")

    @property
    def n(self) -> int:
        return len(self.dims)

    def composite(self, a: int, b: int):
        """Matrix of the path ``V_b -> V_{a+1}``."""
        p = self.q
        mat = _identity(self.dims[b - 1])
        for v in range(b, a + 1, -1):
            f = self.maps[v]
            mat = matmul_mod(f, mat, p, self.dims[v - 2], self.dims[b - 1]) if f else [[] for _ in range(self.dims[v - 2])]
        return mat


def indec_rep(q: int, n: int, m: Indec) -> FqRep:
    dims = dim_vector(m, n)
    maps = {}
    for v in range(2, n + 1):
        rows, cols = dims[v - 2], dims[v - 1]
        maps[v] = tuple(tuple(1 if rows and cols else 0 for _ in range(cols)) for _ in range(rows))
    return FqRep(q, dims, maps)


def direct_sum(reps: Sequence[FqRep]) -> FqRep:
    q, n = reps[0].q, reps[0].n
    dims = tuple(sum(r.dims[v] for r in reps) for v in range(n))
    maps = {}
    for v in range(2, n + 1):
        rows, cols = dims[v - 2], dims[v - 1]
        m = [[0] * cols for _ in range(rows)]
        ro = co = 0
        for r in reps:
            for x, row in enumerate(r.maps[v]):
                for y, val in enumerate(row):
                    m[ro + x][co + y] = val
            ro += r.dims[v - 2]
            co += r.dims[v - 1]
        maps[v] = tuple(tuple(r) for r in m)
    return FqRep(q, dims, maps)


def class_rep(q: int, n: int, cls: Mapping[tuple[int, int], int]) -> FqRep:
    parts = [indec_rep(q, n, Indec(a, b)) for (a, b), m in sorted(cls.items()) for _ in range(m)]
    if not parts:
        return FqRep(q, (0,) * n, {v: () for v in range(2, n + 1)})
    return direct_sum(parts)


def decompose(rep: FqRep) -> dict[tuple[int, int], int]:
    """Krull-Schmidt multiplicities from ranks of path maps."""
    n, p = rep.n, rep.q

    @lru_cache(maxsize=None)
    def r(a: int, b: int) -> int:
        if a < 0 or b > n or a >= b:
            return 0
        return rank_mod(rep.composite(a, b), p) if rep.dims[b - 1] else 0

    out = {}
    for a in range(n):
        for b in range(a + 1, n + 1):
            m = r(a, b) - r(a - 1, b) - r(a, b + 1) + r(a - 1, b + 1)
            if m < 0:
                raise AssertionError("negative multiplicity")
            if m:
                out[(a, b)] = m
    return out


def _block_index(dims_a, dims_b, n):
    """Flattened coordinates for C^0 and C^1 with A the target, B the source."""
    c0 = [(v, x, y) for v in range(1, n + 1) for x in range(dims_a[v - 1]) for y in range(dims_b[v - 1])]
    c1 = [(v, x, y) for v in range(2, n + 1) for x in range(dims_a[v - 2]) for y in range(dims_b[v - 1])]
    return c0, c1


def coboundary(b: FqRep, a: FqRep) -> tuple[list, list, list]:
    """Matrix of ``delta: C^0 -> C^1`` computing ``Hom(B, A)`` and ``Ext^1(B, A)``.

    ``delta(h)_v = A_v h_v - h_{v-1} B_v`` for the arrow ``v -> v - 1``.
    Returned as rows indexed by ``C^1`` coordinates.
    """
    n, p = a.n, a.q
    c0, c1 = _block_index(a.dims, b.dims, n)
    pos0 = {c: k for k, c in enumerate(c0)}
    rows = []
    for v, x, y in c1:
        row = [0] * len(c0)
        # (A_v h_v)[x][y] = sum_z A_v[x][z] h_v[z][y]
        for z in range(a.dims[v - 1]):
            row[pos0[(v, z, y)]] += a.maps[v][x][z]
        # (h_{v-1} B_v)[x][y] = sum_z h_{v-1}[x][z] B_v[z][y]
        for z in range(b.dims[v - 2]):
            row[pos0[(v - 1, x, z)]] -= b.maps[v][z][y]
        rows.append([e % p for e in row])
    return rows, c0, c1


def hom_dim(b: FqRep, a: FqRep) -> int:
    rows, c0, _ = coboundary(b, a)
    return len(c0) - (rank_mod(rows, b.q) if rows else 0)


def ext_dim(b: FqRep, a: FqRep) -> int:
    rows, c0, c1 = coboundary(b, a)
    return len(c1) - (rank_mod(rows, b.q) if rows else 0)


def extension(b: FqRep, a: FqRep, eta: Mapping[tuple, int]) -> FqRep:
    """Middle term of ``0 -> A -> E -> B -> 0`` for the cocycle ``eta``."""
    n = a.n
    dims = tuple(a.dims[v] + b.dims[v] for v in range(n))
    maps = {}
    for v in range(2, n + 1):
        ra, ca = a.dims[v - 2], a.dims[v - 1]
        rb, cb = b.dims[v - 2], b.dims[v - 1]
        m = [[0] * (ca + cb) for _ in range(ra + rb)]
        for x in range(ra):
            for y in range(ca):
                m[x][y] = a.maps[v][x][y]
            for y in range(cb):
                m[x][ca + y] = eta.get((v, x, y), 0)
        for x in range(rb):
            for y in range(cb):
                m[ra + x][ca + y] = b.maps[v][x][y]
        maps[v] = tuple(tuple(r) for r in m)
    return FqRep(a.q, dims, maps)


def ext_classes(b: FqRep, a: FqRep) -> Iterator[dict]:
    """One cocycle per class of ``Ext^1(B, A)`` (a complement of the coboundaries)."""
    p = a.q
    rows, c0, c1 = coboundary(b, a)
    # image of delta is spanned by the columns of ``rows``
    image = [[rows[r][c] for r in range(len(c1))] for c in range(len(c0))]
    comp = []
    basis = list(image)
    base_rank = rank_mod(basis, p) if basis and c1 else 0
    for k in range(len(c1)):
        unit = [int(r == k) for r in range(len(c1))]
        if rank_mod(basis + [unit], p) > base_rank:
            basis.append(unit)
            base_rank += 1
            comp.append(k)
    for coeffs in itertools.product(range(p), repeat=len(comp)):
        yield {c1[k]: c for k, c in zip(comp, coeffs) if c}


def fq_ext_count(q: int, a: Indec, b: Indec, n: int | None = None) -> tuple[int, int, int]:
    """``(|Hom(a, b)|, |Ext^1(a, b)|, #classes with indecomposable middle term)``.

    Extensions are ``0 -> b -> E -> a -> 0``.
    """
    _check_prime(q)
    if a.shift or b.shift:
        raise ValueError("point counts need unshifted modules")
    n = n or max(a.j, b.j)
    ra, rb = indec_rep(q, n, a), indec_rep(q, n, b)
    hom = q ** hom_dim(ra, rb)
    ext = q ** ext_dim(ra, rb)
    indec = 0
    for eta in ext_classes(ra, rb):
        dec = decompose(extension(ra, rb, eta))
        if sum(dec.values()) == 1:
            indec += 1
    return hom, ext, indec


# ---------------------------------------------------------------------------
# full Hall product over F_q


Class = tuple  # sorted tuple of ((a, b), multiplicity)


def as_class(d: Mapping[tuple[int, int], int]) -> Class:
    return tuple(sorted((k, m) for k, m in d.items() if m))


def class_dims(cls: Class, n: int) -> tuple[int, ...]:
    out = [0] * n
    for (a, b), m in cls:
        for v in range(a + 1, b + 1):
            out[v - 1] += m
    return tuple(out)


def gl_order(m: int, q: int) -> int:
    out = 1
    for k in range(m):
        out *= q**m - q**k
    return out


def aut_order(cls: Class, q: int) -> int:
    """``|Aut E|`` from End dimensions; Hom between distinct indecomposables is radical."""
    items = [(Indec(a, b), m) for (a, b), m in cls]
    end = sum(mx * my * (hom_case(x, y) is not None and hom_case(x, y)[1] == 0)
              for x, mx in items for y, my in items)
    semisimple = sum(m * m for _, m in items)
    out = q ** (end - semisimple)
    for _, m in items:
        out *= gl_order(m, q)
    return out


def fq_hall_product(
    q: int,
    x: Mapping[Class, Fraction],
    y: Mapping[Class, Fraction],
    dim_cutoff: Sequence[int],
    n: int | None = None,
    normalization: str = "count",
) -> dict[Class, Fraction]:
    """Full Hall product by enumerating ``Ext^1(B, A)`` for ``[A] * [B]``.

    ``count``: coefficient of ``[E]`` is ``q^{-dim Hom(B, A)}`` times the number
    of extension classes with middle term ``E``.  ``riedtmann`` multiplies by
    ``|Aut E| / (|Aut A| |Aut B|)``, which gives the Ringel-Hall numbers.
    """
    _check_prime(q)
    n = n or len(dim_cutoff)
    out: dict[Class, Fraction] = {}
    for ca, wa in x.items():
        for cb, wb in y.items():
            total = tuple(u + v for u, v in zip(class_dims(ca, n), class_dims(cb, n)))
            if any(t > c for t, c in zip(total, dim_cutoff)):
                raise CutoffExceeded(f"{total} exceeds {tuple(dim_cutoff)}")
            for e, c in _hall_pair(q, n, ca, cb, normalization).items():
                out[e] = out.get(e, Fraction(0)) + Fraction(wa) * Fraction(wb) * c
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _hall_pair_cached(q: int, n: int, ca: Class, cb: Class, normalization: str):
    ra, rb = class_rep(q, n, dict(ca)), class_rep(q, n, dict(cb))
    weight = Fraction(1, q ** hom_dim(rb, ra))
    counts: dict[Class, int] = {}
    for eta in ext_classes(rb, ra):
        e = as_class(decompose(extension(rb, ra, eta)))
        counts[e] = counts.get(e, 0) + 1
    out = {}
    for e, c in counts.items():
        coeff = weight * c
        if normalization == "riedtmann":
            coeff *= Fraction(aut_order(e, q), aut_order(ca, q) * aut_order(cb, q))
        elif normalization != "count":
            raise ValueError(f"unknown normalization {normalization!r}")
        out[e] = coeff
    return tuple(sorted(out.items()))


def _hall_pair(q, n, ca, cb, normalization):
    return dict(_hall_pair_cached(q, n, ca, cb, normalization))


@lru_cache(maxsize=None)
def fq_corr_pair(q: int, n: int, sub: Indec, quot: Indec) -> tuple:
    """Restricted product over ``F_q``: nonzero classes in ``Ext^1(quot, sub)`` with
    indecomposable middle term, grouped by that term."""
    rs, rq = indec_rep(q, n, sub.unshifted()), indec_rep(q, n, quot.unshifted())
    counts: dict[Indec, int] = {}
    for eta in ext_classes(rq, rs):
        if not eta:
            continue
        dec = decompose(extension(rq, rs, eta))
        if sum(dec.values()) == 1:
            (a, b), = dec
            m = Indec(a, b)
            counts[m] = counts.get(m, 0) + 1
    return tuple(sorted(counts.items()))


def fq_corr_product(q: int, n: int, x: Mapping[Indec, Fraction], y: Mapping[Indec, Fraction]) -> dict[Indec, Fraction]:
    """Point-count realization of :func:`corr_product` in the point basis.

    Shifted classes multiply only at equal shift, mirroring the spread
    correspondence.
    """
    _check_prime(q)
    out: dict[Indec, Fraction] = {}
    for a, wa in x.items():
        for b, wb in y.items():
            if a.shift != b.shift:
                continue
            for m, c in fq_corr_pair(q, n, a.unshifted(), b.unshifted()):
                key = m[a.shift]
                out[key] = out.get(key, Fraction(0)) + Fraction(wa) * Fraction(wb) * c
    return {k: v for k, v in out.items() if v}
