"""V-collections for A_n, HN sequences, interval elements and the A_2 atlas.

Objects ``M_ij[s]`` live over the groupoid morphism ``i -> j`` when ``s`` is
even and ``j -> i`` when ``s`` is odd.  Phases are in units of pi and a shift
adds one to the phase.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import mpmath

from .graded_algebra import LaurentScalar, MatrixElement, ONE, mat_mul
from .lattice_groupoid import GroupoidMorphism, InducedGroupoid, an_phi, make_induced_groupoid, root_vector
from .quiver_an import (
    CutoffExceeded,
    HallElement,
    Indec,
    aut_order,
    as_class,
    cone_of,
    corr_product,
    dim_vector,
    fq_corr_product,
    hom_case,
    hom_ext,
    indecomposables,
)
from .stability_engine import CentralCharge, _RATIONAL_TAN, cross, dot


class DegenerateF(ValueError):
    pass


class BoundaryAmbiguity(ValueError):
    pass


class NotInCoamoeba(ValueError):
    pass


class EndpointPhase(ValueError):
    pass


# ---------------------------------------------------------------------------
# V-collections


@dataclass(frozen=True)
class VCollection:
    n: int
    groupoid: InducedGroupoid

    def cell(self, m: Indec) -> tuple[int, int]:
        return (m.i, m.j) if m.shift % 2 == 0 else (m.j, m.i)

    def epsilon(self, m: Indec) -> GroupoidMorphism:
        sign = 1 if m.shift % 2 == 0 else -1
        src, tgt = self.cell(m)
        return GroupoidMorphism(src, tgt, tuple(sign * x for x in root_vector(self.n, m.i, m.j)))

    def cells(self) -> dict[tuple[int, int], str]:
        out = {}
        for i in range(self.n + 1):
            for j in range(self.n + 1):
                if i < j:
                    out[(i, j)] = f"M{i}{j}[2k]"
                elif i > j:
                    out[(i, j)] = f"M{j}{i}[2k+1]"
        return out


def build_an_collection(n: int) -> VCollection:
    if n < 1:
        raise ValueError("n must be at least 1")
    objects = [tuple(int(k == i) for k in range(n + 1)) for i in range(n + 1)]
    return VCollection(n, make_induced_groupoid(an_phi(n), objects))


# ---------------------------------------------------------------------------
# charges from f and A_2 points


@dataclass(frozen=True)
class A2Point:
    theta01: Fraction
    theta12: Fraction
    theta02: Fraction

    @property
    def alpha1(self):
        return self.theta02 - self.theta01

    @property
    def alpha2(self):
        return self.theta12 - self.theta02

    @property
    def alpha3(self):
        return self.theta12 - self.theta01

    @classmethod
    def from_alpha(cls, a1, a2) -> "A2Point":
        """Representative on the plane ``theta01 + theta12 + theta02 = 0``."""
        a1, a2 = Fraction(a1), Fraction(a2)
        t01 = -(2 * a1 + a2) / 3
        return cls(t01, t01 + a1 + a2, t01 + a1)

    def theta(self, i: int, j: int) -> Fraction:
        return {(0, 1): self.theta01, (1, 2): self.theta12, (0, 2): self.theta02}[(i, j)]

    def phase(self, m: Indec) -> Fraction:
        return self.theta(m.i, m.j) + m.shift


def _gauss(z) -> tuple[Fraction, Fraction]:
    if isinstance(z, complex):
        return (Fraction(z.real), Fraction(z.imag))
    if isinstance(z, (int, Fraction)):
        return (Fraction(z), Fraction(0))
    return (Fraction(z[0]), Fraction(z[1]))


def exact_arg(z) -> Fraction:
    """``arg(z)/pi`` in ``(-1, 1]``; exact at multiples of 1/4, else 40 digits."""
    for r, d in _RATIONAL_TAN.items():
        if cross(d, z) == 0 and dot(d, z) > 0:
            return r if r <= 1 else r - 2
    with mpmath.workdps(50):
        a = mpmath.atan2(mpmath.mpf(z[1].numerator) / z[1].denominator,
                         mpmath.mpf(z[0].numerator) / z[0].denominator) / mpmath.pi
        return Fraction(mpmath.nstr(a, 40)).limit_denominator(10**35)


def charge_from_f(f: Sequence, arg_lifts: Mapping[tuple[int, int], int] | None = None):
    """``Z(u_ij) = f(j) - f(i)``; for ``n = 2`` also the :class:`A2Point`.

    ``arg_lifts[(i, j)] = k`` adds ``2k`` to the principal value of ``theta_ij``.
    """
    vals = [_gauss(z) for z in f]
    if len(set(vals)) != len(vals):
        raise DegenerateF("values of f must be distinct")
    n = len(vals) - 1
    charge = CentralCharge(tuple(
        (vals[k][0] - vals[k - 1][0], vals[k][1] - vals[k - 1][1]) for k in range(1, n + 1)
    ))
    if n != 2:
        return charge, None
    lifts = arg_lifts or {}
    th = {}
    for i, j in ((0, 1), (1, 2), (0, 2)):
        d = (vals[j][0] - vals[i][0], vals[j][1] - vals[i][1])
        th[(i, j)] = exact_arg(d) + 2 * lifts.get((i, j), 0)
    return charge, A2Point(th[(0, 1)], th[(1, 2)], th[(0, 2)])


def _base_region(a1, a2) -> bool:
    a3 = a1 + a2
    return (a1 > 0 and a2 > 0 and a3 < 1) or (a1 < 0 and a2 < 0 and a3 > -1)


def coamoeba_member(p: A2Point) -> tuple[bool, tuple[int, int] | None]:
    """Membership in the open coamoeba or one of its ``2Z`` translates."""
    m1 = math.floor((p.alpha1 + 1) / 2)
    m2 = math.floor((p.alpha2 + 1) / 2)
    for d1 in (-1, 0, 1):
        for d2 in (-1, 0, 1):
            t = (m1 + d1, m2 + d2)
            if _base_region(p.alpha1 - 2 * t[0], p.alpha2 - 2 * t[1]):
                return True, t
    return False, None


# ---------------------------------------------------------------------------
# A_2 classification


CASES = {
    "ALL": frozenset({Indec(0, 1), Indec(1, 2), Indec(0, 2)}),
    "I": frozenset({Indec(0, 1), Indec(0, 2)}),
    "II": frozenset({Indec(1, 2), Indec(0, 2)}),
    "III": frozenset({Indec(0, 1), Indec(1, 2)}),
}


def a2_classify(p: A2Point, check_member: bool = True) -> frozenset[str]:
    """Admissible stability types at ``p`` from the pre-slicing and HN inequalities.

    With ``check_member=False`` the inequalities are evaluated even when no
    charge realizes ``p``.
    """
    member, _ = coamoeba_member(p)
    if check_member and not member:
        raise NotInCoamoeba(f"{p} is outside the coamoeba")
    a1, a2, a3 = p.alpha1, p.alpha2, p.alpha3
    if a1 in (0, 1) or a2 in (0, 1) or a3 in (0, 1):
        raise BoundaryAmbiguity(f"alpha = ({a1}, {a2}, {a3}) lies on a dividing line")
    out = set()
    if a1 >= 0 and a2 >= 0 and a3 <= 1:
        out.add("ALL")
    if a1 >= 0 and a1 > 1:
        out.add("I")
    if a2 >= 0 and a2 > 1:
        out.add("II")
    if a3 <= 1 and a3 < 0:
        out.add("III")
    return frozenset(out)


@dataclass
class OracleVerdict:
    passed: bool
    reason: str = ""
    witness: Any = None
    hn: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def _chains(coll: VCollection, target: tuple[int, int], first: tuple[int, int], second: tuple[int, int]) -> bool:
    return first[0] == target[0] and first[1] == second[0] and second[1] == target[1]


def hn_candidates(p: A2Point, semistable: Iterable[Indec], e: Indec, window: int = 2) -> list[tuple]:
    """Length-two HN sequences of ``e``: pairs ``(sub, quotient)`` of semistables.

    The sub has the larger phase, the quotient maps to the sub in degree one
    with cone ``e``, and the two cells chain from the source to the target of
    ``e``'s cell in one of the two orders.
    """
    coll = build_an_collection(2)
    base = list(semistable)
    pool = [m[s] for m in base for s in range(e.shift - window, e.shift + window + 1)]
    target = coll.cell(e)
    out = []
    for sub in pool:
        for quot in pool:
            if p.phase(sub) <= p.phase(quot):
                continue
            if hom_ext(quot, sub).get(1, 0) == 0:
                continue
            kind = hom_case(quot.unshifted(), sub.unshifted())[0]
            if cone_of(quot, sub, kind) != [e]:
                continue
            cs, cq = coll.cell(sub), coll.cell(quot)
            if _chains(coll, target, cs, cq):
                out.append((sub, quot, "sub-first"))
            elif _chains(coll, target, cq, cs):
                out.append((sub, quot, "quotient-first"))
    return out


def a2_hn_oracle(p: A2Point, semistable: Iterable[Indec], shifts: Sequence[int] = range(-2, 2)) -> OracleVerdict:
    """Brute-force check that declaring ``semistable`` gives a stability condition at ``p``."""
    ss = sorted(set(m.unshifted() for m in semistable))
    # (a) no degree-0 morphism from a strictly higher to a strictly lower phase
    for a in ss:
        for b in ss:
            for r in shifts:
                for s in shifts:
                    x, y = a[r], b[s]
                    if p.phase(x) > p.phase(y) and hom_ext(x, y).get(0, 0):
                        return OracleVerdict(False, "Ext^0 from higher to lower phase", (x, y))
    hn = {}
    for m in indecomposables(2):
        for s in (0, 1):
            e = m[s]
            found = hn_candidates(p, ss, e)
            if m in ss:
                if found:
                    return OracleVerdict(False, "semistable object with a second HN sequence", (e, found))
                hn[e] = [(e, p.phase(e))]
                continue
            if not found:
                return OracleVerdict(False, "no HN sequence", e)
            if len(found) > 1:
                return OracleVerdict(False, "HN sequence not unique", (e, found))
            sub, quot, _ = found[0]
            hn[e] = [(sub, p.phase(sub)), (quot, p.phase(quot))]
    return OracleVerdict(True, hn=hn)


def oracle_cases(p: A2Point) -> frozenset[str]:
    return frozenset(name for name, ss in CASES.items() if a2_hn_oracle(p, ss))


def grid_points(k: int = 100, lo: Fraction = Fraction(-3), hi: Fraction = Fraction(3)) -> list[tuple[Fraction, Fraction]]:
    """Cell centers of a ``k x k`` grid on ``[lo, hi]^2`` in the alpha plane."""
    step = (Fraction(hi) - Fraction(lo)) / k
    coords = [Fraction(lo) + step * (c + Fraction(1, 2)) for c in range(k)]
    return [(a, b) for a in coords for b in coords]


def region_table(k: int = 100, lo=Fraction(-3), hi=Fraction(3), oracle: bool = True) -> list[dict]:
    rows = []
    for a1, a2 in grid_points(k, lo, hi):
        p = A2Point.from_alpha(a1, a2)
        member, translate = coamoeba_member(p)
        if not member:
            continue
        try:
            cases = a2_classify(p)
        except BoundaryAmbiguity:
            continue
        row = {"alpha1": a1, "alpha2": a2, "translate": translate, "cases": sorted(cases)}
        if oracle:
            row["oracle"] = sorted(oracle_cases(p))
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# interval elements


UNIT = "1"  # class of the zero object


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __contains__(self, x) -> bool:
        return self.lo <= x < self.hi


@dataclass
class IntervalElement:
    interval: Interval
    matrix: MatrixElement


def _hn_factors(p: A2Point, semistable, m: Indec):
    if m.unshifted() in semistable:
        return [m]
    found = hn_candidates(p, semistable, m)
    if len(found) != 1:
        return None
    sub, quot, _ = found[0]
    return [sub, quot]


def _entry_product(mode: str, q: int | None):
    def mul(x: HallElement, y: HallElement) -> HallElement:
        out = HallElement()
        for a, c1 in x.terms.items():
            for b, c2 in y.terms.items():
                if a == UNIT:
                    out = out + HallElement({b: c1 * c2})
                elif b == UNIT:
                    out = out + HallElement({a: c1 * c2})
                elif mode == "symbolic":
                    out = out + corr_product(HallElement({a: c1}), HallElement({b: c2}), basis="stack")
                else:
                    out = out + HallElement(fq_corr_product(q, 2, {a: Fraction(1)}, {b: Fraction(1)})).scale(c1 * c2)
        return out

    return mul


def interval_element(
    interval: tuple,
    p: A2Point,
    semistable: Iterable[Indec],
    mode: str = "symbolic",
    q: int | None = None,
    cutoff: Sequence[int] = (2, 2),
) -> IntervalElement:
    """``A_I``: the matrix whose ``(i, j)`` entry sums the classes over ``i -> j``
    whose HN phases all lie in ``I``.

    ``symbolic`` uses the stack basis (``rho / (L - 1)``, coefficient 1);
    ``fq`` uses point classes weighted by ``1 / |Aut|`` over ``F_q``.
    """
    if mode not in ("symbolic", "fq"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "fq" and q is None:
        raise ValueError("fq mode needs q")
    I = Interval(Fraction(interval[0]), Fraction(interval[1]))
    ss = frozenset(m.unshifted() for m in semistable)
    coll = build_an_collection(2)
    one = ONE if mode == "symbolic" else Fraction(1)
    entries = {(i, i): HallElement({UNIT: one}) for i in range(3)}
    if I.hi <= I.lo:
        return IntervalElement(I, MatrixElement(3, entries))
    for m in ss:
        base = p.theta(m.i, m.j)
        for s in range(math.floor(I.lo - base) - 1, math.ceil(I.hi - base) + 2):
            if p.phase(m[s]) in (I.lo, I.hi):
                raise EndpointPhase(f"{m[s]} has phase {p.phase(m[s])} on an endpoint")
    lo_shift = math.floor(I.lo - max(p.theta01, p.theta12, p.theta02)) - 2
    hi_shift = math.ceil(I.hi - min(p.theta01, p.theta12, p.theta02)) + 2
    for m in indecomposables(2):
        if any(d > c for d, c in zip(dim_vector(m, 2), cutoff)):
            raise CutoffExceeded(f"{m} exceeds the cutoff")
        for s in range(lo_shift, hi_shift + 1):
            e = m[s]
            factors = _hn_factors(p, ss, e)
            if factors is None or not all(p.phase(f) in I for f in factors):
                continue
            weight = one if mode == "symbolic" else Fraction(1, aut_order(as_class({(m.i, m.j): 1}), q))
            cell = coll.cell(e)
            entries[cell] = entries.get(cell, HallElement()) + HallElement({e: weight})
    return IntervalElement(I, MatrixElement(3, entries))


def _matrix_diff(a: MatrixElement, b: MatrixElement):
    for key in sorted(set(a.entries) | set(b.entries)):
        x = a.entries.get(key, HallElement())
        y = b.entries.get(key, HallElement())
        if x != y:
            return key, x, y
    return None


@dataclass
class WCFReport:
    passed: bool
    entry: tuple | None = None
    lhs: Any = None
    rhs: Any = None

    def __bool__(self):
        return self.passed


def interval_product(a: IntervalElement, b: IntervalElement, mode: str = "symbolic", q: int | None = None) -> MatrixElement:
    return mat_mul(a.matrix, b.matrix, entry_mul=_entry_product(mode, q))


def wcf_verify(
    thetas: Sequence,
    p: A2Point,
    semistable: Iterable[Indec],
    mode: str = "symbolic",
    q: int | None = None,
    cutoff: Sequence[int] = (2, 2),
    order: str = "clockwise",
) -> WCFReport:
    """Compare ``A_{[t1, t3)}`` with the product of ``A_{[t1, t2)}`` and ``A_{[t2, t3)}``.

    ``clockwise`` multiplies the higher interval on the left; ``ascending``
    puts the lower interval on the left.
    """
    t1, t2, t3 = (Fraction(t) for t in thetas)
    if not t1 <= t2 <= t3:
        raise ValueError("need t1 <= t2 <= t3")
    low = interval_element((t1, t2), p, semistable, mode, q, cutoff)
    high = interval_element((t2, t3), p, semistable, mode, q, cutoff)
    whole = interval_element((t1, t3), p, semistable, mode, q, cutoff)
    if order == "clockwise":
        prod = interval_product(high, low, mode, q)
    elif order == "ascending":
        prod = interval_product(low, high, mode, q)
    else:
        raise ValueError(f"unknown order {order!r}")
    diff = _matrix_diff(prod, whole.matrix)
    if diff is None:
        return WCFReport(True)
    return WCFReport(False, *diff)


def chamber_invariance(
    interval: tuple,
    points: Sequence[tuple[A2Point, Iterable[Indec]]],
    mode: str = "symbolic",
    q: int | None = None,
) -> WCFReport:
    """``A_I`` agrees for every (point, semistable set) pair."""
    mats = [interval_element(interval, p, ss, mode, q).matrix for p, ss in points]
    for m in mats[1:]:
        diff = _matrix_diff(mats[0], m)
        if diff is not None:
            return WCFReport(False, *diff)
    return WCFReport(True)
