"""Finite groupoids presented by integer lattice data.

A homomorphism ``phi: Z^m -> Z^n`` and a finite set of points ``A`` in
``Z^n`` define a groupoid whose objects are the points of ``A`` and whose
morphisms ``a -> b`` are the solutions ``v`` of ``phi(v) = b - a``.
Composition is vector addition.  Hom-sets are cosets of ``ker phi`` and are
stored as a base point plus a kernel basis.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

Vector = tuple[int, ...]


class NonComposable(ValueError):
    """Raised when two morphisms do not share an endpoint."""


class RootViolation(ValueError):
    """Raised when a degree has W-part outside ``{e_j - e_k} u {0}``."""


# ---------------------------------------------------------------------------
# integer linear algebra


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(matrix: Sequence[Sequence[int]]):
    """Return ``(D, U, V)`` with ``U @ A @ V == D`` diagonal, U and V unimodular.

    The diagonal entries are non-negative and each divides the next.
    """
    a = [list(map(int, row)) for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    u = _identity(m)
    v = _identity(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row_dst += c * row_src
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):
        for row in a:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        nonzero = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
        if not nonzero:
            break
        _, pi, pj = min(nonzero)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(t, i, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(t, j, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                # divisibility: pull in any entry the pivot does not divide
                bad = next(
                    ((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                     if a[i][j] % a[t][t]),
                    None,
                )
                if bad is None:
                    break
                add_row(bad[0], t, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return a, u, v


def _matvec(mat: Sequence[Sequence[int]], vec: Sequence[int]) -> Vector:
    return tuple(sum(r[k] * vec[k] for k in range(len(vec))) for r in mat)


def _inverse_unimodular(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    from fractions import Fraction

    n = len(mat)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(mat)]
    for c in range(n):
        p = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [[int(x) for x in row[n:]] for row in aug]


# ---------------------------------------------------------------------------
# lattice maps and cosets


@dataclass(frozen=True)
class LatticeMap:
    source_rank: int
    target_rank: int
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.matrix) != self.target_rank or any(
            len(row) != self.source_rank for row in self.matrix
        ):
            raise ValueError(
                f"matrix shape does not match ranks ({self.target_rank}x{self.source_rank})"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], source_rank: int | None = None) -> "LatticeMap":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        src = source_rank if source_rank is not None else (len(rows[0]) if rows else 0)
        return cls(src, len(rows), rows)

    @classmethod
    def identity(cls, n: int) -> "LatticeMap":
        return cls(n, n, tuple(tuple(r) for r in _identity(n)))

    def __call__(self, vec: Sequence[int]) -> Vector:
        return _matvec(self.matrix, vec)


@dataclass(frozen=True)
class Coset:
    """``base + span_Z(kernel)`` inside the source lattice."""

    base: Vector
    kernel: tuple[Vector, ...]

    def contains(self, vec: Sequence[int], phi: LatticeMap) -> bool:
        diff = tuple(x - y for x, y in zip(vec, self.base))
        return all(x == 0 for x in phi(diff))

    def enumerate(self, bound: int) -> Iterator[Vector]:
        """All members with every coordinate in ``[-bound, bound]``."""
        if not self.kernel:
            if all(abs(x) <= bound for x in self.base):
                yield self.base
            return
        # coefficients are bounded through the unimodular completion of the kernel
        dim = len(self.base)
        k = len(self.kernel)
        radius = bound + max(abs(x) for x in self.base)
        # crude but complete: kernel vectors are integral and independent, so
        # solving via least coordinates bounds each coefficient by radius * ||K^+||
        from fractions import Fraction
        import sympy

        kmat = sympy.Matrix([list(c) for c in self.kernel]).T
        pinv = (kmat.T * kmat).inv() * kmat.T
        cbound = int(sum(abs(Fraction(str(x))) for x in pinv) * radius) + 1
        seen = set()
        for coeffs in itertools.product(range(-cbound, cbound + 1), repeat=k):
            vec = tuple(
                self.base[i] + sum(c * kv[i] for c, kv in zip(coeffs, self.kernel))
                for i in range(dim)
            )
            if all(abs(x) <= bound for x in vec) and vec not in seen:
                seen.add(vec)
                yield vec


def solve_coset(phi: LatticeMap, rhs: Sequence[int]) -> Coset | None:
    """Integer solutions of ``phi(v) = rhs`` or ``None`` if there are none."""
    d, u, v = smith_normal_form(phi.matrix) if phi.target_rank else ([], [], _identity(phi.source_rank))
    ub = _matvec(u, rhs) if phi.target_rank else ()
    rank = sum(1 for i in range(min(phi.target_rank, phi.source_rank)) if d[i][i] != 0)
    y = [0] * phi.source_rank
    for i in range(len(ub)):
        if i < rank:
            if ub[i] % d[i][i]:
                return None
            y[i] = ub[i] // d[i][i]
        elif ub[i] != 0:
            return None
    base = _matvec(v, y)
    kernel = tuple(tuple(v[r][c] for r in range(phi.source_rank)) for c in range(rank, phi.source_rank))
    return Coset(base, kernel)


# ---------------------------------------------------------------------------
# groupoids


@dataclass(frozen=True, order=True)
class GroupoidMorphism:
    src: int
    tgt: int
    vec: Vector


def compose(g1: GroupoidMorphism, g2: GroupoidMorphism) -> GroupoidMorphism:
    """``g1`` followed by ``g2``."""
    if g1.tgt != g2.src:
        raise NonComposable(f"{g1} then {g2}")
    return GroupoidMorphism(g1.src, g2.tgt, tuple(a + b for a, b in zip(g1.vec, g2.vec)))


@dataclass(frozen=True)
class InducedGroupoid:
    phi: LatticeMap
    objects: tuple[Vector, ...]
    hom_cache: Mapping[tuple[int, int], Coset | None] = field(compare=False, repr=False)

    @property
    def size(self) -> int:
        return len(self.objects)

    def hom(self, i: int, j: int) -> Coset | None:
        return self.hom_cache[(i, j)]

    def is_morphism(self, g: GroupoidMorphism) -> bool:
        c = self.hom(g.src, g.tgt)
        return c is not None and c.contains(g.vec, self.phi)

    def identity(self, i: int) -> GroupoidMorphism:
        return GroupoidMorphism(i, i, (0,) * self.phi.source_rank)

    def morphisms(self, bound: int) -> list[GroupoidMorphism]:
        out = []
        for (i, j), c in sorted(self.hom_cache.items()):
            if c is not None:
                out.extend(GroupoidMorphism(i, j, v) for v in c.enumerate(bound))
        return out

    def components(self) -> list[list[int]]:
        """Isomorphism classes, each sorted, listed by least member."""
        seen: set[int] = set()
        comps = []
        for i in range(self.size):
            if i in seen:
                continue
            comp = sorted(j for j in range(self.size) if self.hom(i, j) is not None)
            seen.update(comp)
            comps.append(comp)
        return comps


def make_induced_groupoid(phi: LatticeMap, objects: Iterable[Sequence[int]]) -> InducedGroupoid:
    objs = tuple(tuple(int(x) for x in o) for o in objects)
    if len(set(objs)) != len(objs):
        raise ValueError("objects must be distinct")
    if any(len(o) != phi.target_rank for o in objs):
        raise ValueError("objects must live in the target lattice")
    cache = {}
    for i, a in enumerate(objs):
        for j, b in enumerate(objs):
            cache[(i, j)] = solve_coset(phi, tuple(y - x for x, y in zip(a, b)))
    return InducedGroupoid(phi, objs, cache)


# ---------------------------------------------------------------------------
# skeleton, F, and 2-cocycles


@dataclass(frozen=True)
class Skeleton:
    """A representative per class and chosen morphisms ``rep(i) -> i``."""

    classes: tuple[tuple[int, ...], ...]
    reps: tuple[int, ...]
    eta: Mapping[int, Vector] = field(compare=False)

    def class_of(self, i: int) -> int:
        return next(c for c, members in enumerate(self.classes) if i in members)

    def to_automorphism(self, g: GroupoidMorphism) -> Vector:
        """``F(g)``: transport ``g`` to an automorphism of its class representative."""
        hi, hj = self.eta[g.src], self.eta[g.tgt]
        return tuple(a + b - c for a, b, c in zip(hi, g.vec, hj))


def make_skeleton(g: InducedGroupoid, reps: Sequence[int] | None = None) -> Skeleton:
    comps = g.components()
    if reps is None:
        reps = [c[0] for c in comps]
    reps = list(reps)
    if len(reps) != len(comps) or any(r not in c for r, c in zip(reps, comps)):
        raise ValueError("skeleton must select exactly one object per isomorphism class")
    eta = {}
    for comp, r in zip(comps, reps):
        for i in comp:
            eta[i] = g.hom(r, i).base if i != r else (0,) * g.phi.source_rank
    return Skeleton(tuple(tuple(c) for c in comps), tuple(reps), eta)


def pairing_value(pairing: Sequence[Sequence[int]], a: Sequence[int], b: Sequence[int]) -> int:
    return sum(a[i] * pairing[i][j] * b[j] for i in range(len(a)) for j in range(len(b)))


@dataclass(frozen=True)
class Cocycle:
    """A {+1,-1}-valued 2-cocycle on composable pairs (0 elsewhere).

    ``rule`` is ``"constant_one"``, ``"bilinear_sign"`` (uses ``pairing`` on
    transported automorphisms) or ``"explicit_table"`` (``table`` maps pairs of
    morphisms to signs; missing pairs default to +1).
    """

    rule: str = "constant_one"
    pairing: tuple[tuple[int, ...], ...] | None = None
    table: Mapping[tuple[GroupoidMorphism, GroupoidMorphism], int] | None = field(default=None, compare=False)
    skeleton: Skeleton | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.rule not in ("constant_one", "bilinear_sign", "explicit_table"):
            raise ValueError(f"unknown cocycle rule {self.rule!r}")
        if self.rule == "bilinear_sign":
            if self.pairing is None:
                raise ValueError("bilinear_sign needs a pairing")
            p = self.pairing
            if any(p[i][j] != -p[j][i] for i in range(len(p)) for j in range(len(p))):
                raise ValueError("pairing must be antisymmetric")

    def __call__(self, g1: GroupoidMorphism, g2: GroupoidMorphism) -> int:
        if g1.tgt != g2.src:
            return 0
        if self.rule == "constant_one":
            return 1
        if self.rule == "explicit_table":
            return self.table.get((g1, g2), 1)
        f1 = self.skeleton.to_automorphism(g1) if self.skeleton else g1.vec
        f2 = self.skeleton.to_automorphism(g2) if self.skeleton else g2.vec
        return -1 if pairing_value(self.pairing, f1, f2) % 2 else 1


def check_cocycle(g: InducedGroupoid, s: Cocycle, search_box: int):
    """Return ``None`` if the cocycle identity holds on every composable triple in the box.

    Otherwise the first violating triple ``(g1, g2, g3)``.
    """
    mors = g.morphisms(search_box)
    by_src: dict[int, list[GroupoidMorphism]] = {}
    for m in mors:
        by_src.setdefault(m.src, []).append(m)
    for g1 in mors:
        for g2 in by_src.get(g1.tgt, []):
            g12 = compose(g1, g2)
            for g3 in by_src.get(g2.tgt, []):
                lhs = s(g1, g2) * s(g12, g3)
                rhs = s(g1, compose(g2, g3)) * s(g2, g3)
                if lhs != rhs:
                    return (g1, g2, g3)
    return None


# ---------------------------------------------------------------------------
# the grading lattice


@dataclass(frozen=True)
class GradingLattice:
    """``Gamma_V = sum over classes of (Gamma_i + W_i)``.

    Vectors are stored per class as ``(automorphism coordinates, e-coordinates)``
    where the e-coordinates index the members of the class and sum to zero.
    """

    skeleton: Skeleton
    gamma_components: tuple[tuple[Vector, ...], ...]  # kernel basis per class
    phi: LatticeMap

    @property
    def rank(self) -> int:
        return sum(len(b) + len(c) - 1 for b, c in zip(self.gamma_components, self.skeleton.classes))

    def w_basis(self, cls: int) -> list[int]:
        """Objects ``j`` with nonzero ``w_j = e_j - e_rep`` in class ``cls``."""
        return [j for j in self.skeleton.classes[cls] if j != self.skeleton.reps[cls]]

    def _kernel_coords(self, cls: int, vec: Vector) -> Vector:
        basis = self.gamma_components[cls]
        if not basis:
            return ()
        import sympy

        k = sympy.Matrix([list(b) for b in basis]).T
        sol = (k.T * k).inv() * k.T * sympy.Matrix(list(vec))
        return tuple(int(x) for x in sol)

    def degree(self, g: GroupoidMorphism) -> tuple:
        """Return the degree as ``(class, automorphism coords, w-part in e-coords)``."""
        cls = self.skeleton.class_of(g.src)
        if self.skeleton.class_of(g.tgt) != cls:
            raise ValueError("morphism between distinct classes")
        auto = self.skeleton.to_automorphism(g)
        members = self.skeleton.classes[cls]
        w = [0] * len(members)
        w[members.index(g.tgt)] += 1
        w[members.index(g.src)] -= 1
        return (cls, self._kernel_coords(cls, auto), tuple(w))

    def flat(self, degree: tuple) -> Vector:
        """Coordinates of a degree in the direct sum, using the basis ``{w_j}``."""
        cls, auto, w = degree
        out: list[int] = []
        for c, (basis, members) in enumerate(zip(self.gamma_components, self.skeleton.classes)):
            rep = self.skeleton.reps[c]
            if c == cls:
                out.extend(auto)
                out.extend(w[members.index(j)] for j in members if j != rep)
            else:
                out.extend([0] * (len(basis) + len(members) - 1))
        return tuple(out)


def is_root(w: Sequence[int]) -> bool:
    nz = [x for x in w if x]
    return not nz or sorted(nz) == [-1, 1]


def grading_lattice(g: InducedGroupoid, skeleton: Skeleton | None = None, check_bound: int = 1) -> GradingLattice:
    sk = skeleton or make_skeleton(g)
    basis = []
    for rep in sk.reps:
        c = g.hom(rep, rep)
        basis.append(c.kernel)
    lat = GradingLattice(sk, tuple(basis), g.phi)
    for m in g.morphisms(check_bound):
        _, _, w = lat.degree(m)
        if not is_root(w):
            raise RootViolation(f"degree of {m} has W-part {w}")
    return lat


# ---------------------------------------------------------------------------
# JSON


def groupoid_from_json(data: str | Mapping):
    """Parse ``{"phi": [[...]], "objects": [[...]], "cocycle": {...}}``."""
    if isinstance(data, str):
        data = json.loads(data)
    rows = data["phi"]
    src = data.get("source_rank")
    phi = LatticeMap.from_rows(rows, src)
    g = make_induced_groupoid(phi, data["objects"])
    spec = data.get("cocycle", {"kind": "constant_one"})
    kind = spec.get("kind", "constant_one")
    pairing = spec.get("pairing")
    pairing = tuple(tuple(int(x) for x in r) for r in pairing) if pairing else None
    sk = make_skeleton(g)
    cocycle = Cocycle(kind, pairing, skeleton=sk if kind == "bilinear_sign" else None)
    return g, cocycle


def an_phi(n: int) -> LatticeMap:
    """``u_i -> e_i - e_{i-1}`` on simple roots, so ``u_ij -> e_j - e_i``."""
    rows = [[0] * n for _ in range(n + 1)]
    for k in range(1, n + 1):
        rows[k][k - 1] = 1
        rows[k - 1][k - 1] = -1
    return LatticeMap.from_rows(rows, n)


def root_vector(n: int, i: int, j: int) -> Vector:
    """Dimension vector ``u_ij = u_{i+1} + ... + u_j`` in simple-root coordinates."""
    return tuple(1 if i < k + 1 <= j else 0 for k in range(n))
