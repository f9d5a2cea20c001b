"""Exact Haar-measure calculus on sheared boxes in H3(R).

A :class:`BishearBox` is the set

    { (t1, t2, t3) : t1 in [lo1, hi1], t2 in [lo2, hi2], t3 - p*t1 - q*t2 in [lo3, hi3] }

Coordinate boxes are the case p = q = 0.  The family is closed under left
translation (q picks up g.t1) and right translation (p picks up g.t2), and
Haar measure in these coordinates is Lebesgue measure dt1 dt2 dt3, so a
box's volume is the product of its three side lengths.

The exact kernel is written against the ordinary arithmetic operators, so it
runs on Fractions (exact) as well as on floats (fast inner volumes for Monte
Carlo integrands).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ShearMismatch
from .group import GroupElement, as_fraction, format_fraction


class BishearBox(NamedTuple):
    lo1: Fraction
    hi1: Fraction
    lo2: Fraction
    hi2: Fraction
    lo3: Fraction
    hi3: Fraction
    p: Fraction
    q: Fraction

    @property
    def volume(self):
        l1 = self.hi1 - self.lo1
        l2 = self.hi2 - self.lo2
        l3 = self.hi3 - self.lo3
        if l1 <= 0 or l2 <= 0 or l3 <= 0:
            return l1 * 0
        return l1 * l2 * l3

    @property
    def shear(self):
        return (self.p, self.q)

    def contains_point(self, x) -> bool:
        t1, t2, t3 = x
        if not (self.lo1 <= t1 <= self.hi1 and self.lo2 <= t2 <= self.hi2):
            return False
        w = t3 - self.p * t1 - self.q * t2
        return self.lo3 <= w <= self.hi3

    def corners(self) -> list[tuple]:
        out = []
        for t1 in (self.lo1, self.hi1):
            for t2 in (self.lo2, self.hi2):
                base = self.p * t1 + self.q * t2
                for w in (self.lo3, self.hi3):
                    out.append((t1, t2, w + base))
        return out

    def aabb(self) -> tuple:
        """Axis-aligned bounds (min1, max1, min2, max2, min3, max3)."""
        s_lo = s_hi = 0
        for coef, lo, hi in ((self.p, self.lo1, self.hi1), (self.q, self.lo2, self.hi2)):
            u, v = coef * lo, coef * hi
            if u > v:
                u, v = v, u
            s_lo += u
            s_hi += v
        return (self.lo1, self.hi1, self.lo2, self.hi2, self.lo3 + s_lo, self.hi3 + s_hi)

    def to_json(self) -> dict:
        f = format_fraction
        return {
            "i1": [f(self.lo1), f(self.hi1)],
            "i2": [f(self.lo2), f(self.hi2)],
            "i3": [f(self.lo3), f(self.hi3)],
            "p": f(self.p),
            "q": f(self.q),
        }

    @classmethod
    def from_json(cls, d: dict) -> "BishearBox":
        unknown = set(d) - {"i1", "i2", "i3", "p", "q"}
        if unknown:
            raise ValueError(f"unknown box keys: {sorted(unknown)}")
        fr = as_fraction
        return cls(fr(d["i1"][0]), fr(d["i1"][1]), fr(d["i2"][0]), fr(d["i2"][1]),
                   fr(d["i3"][0]), fr(d["i3"][1]), fr(d.get("p", 0)), fr(d.get("q", 0)))

    def to_float(self) -> "BishearBox":
        return BishearBox(*(float(v) for v in self))


def make_box(i1, i2, i3, p=0, q=0) -> BishearBox:
    fr = as_fraction
    return BishearBox(fr(i1[0]), fr(i1[1]), fr(i2[0]), fr(i2[1]), fr(i3[0]), fr(i3[1]), fr(p), fr(q))


def box(alpha, beta, gamma) -> BishearBox:
    """I(alpha, beta, gamma): |t1| <= alpha, |t2| <= beta, |t3| <= gamma."""
    al, be, ga = as_fraction(alpha), as_fraction(beta), as_fraction(gamma)
    z = Fraction(0)
    return BishearBox(-al, al, -be, be, -ga, ga, z, z)


def _shift3(bx: BishearBox, g) -> tuple:
    d = g[2] - g[0] * g[1] - bx.p * g[0] - bx.q * g[1]
    return bx.lo3 + d, bx.hi3 + d


def left_translate_box(g, bx: BishearBox) -> BishearBox:
    lo3, hi3 = _shift3(bx, g)
    return BishearBox(bx.lo1 + g[0], bx.hi1 + g[0], bx.lo2 + g[1], bx.hi2 + g[1],
                      lo3, hi3, bx.p, bx.q + g[0])


def right_translate_box(bx: BishearBox, g) -> BishearBox:
    lo3, hi3 = _shift3(bx, g)
    return BishearBox(bx.lo1 + g[0], bx.hi1 + g[0], bx.lo2 + g[1], bx.hi2 + g[1],
                      lo3, hi3, bx.p + g[1], bx.q)


# ---------------------------------------------------------------------------
# exact pairwise intersection volume


def _trapezoid(f, pts):
    total = 0
    for x0, x1 in zip(pts, pts[1:]):
        total += (x1 - x0) * (f(x0) + f(x1)) / 2
    return total


def _simpson(f, g, pts):
    total = 0
    for x0, x1 in zip(pts, pts[1:]):
        m = (x0 + x1) / 2
        total += (x1 - x0) * (f(x0) * g(x0) + 4 * f(m) * g(m) + f(x1) * g(x1)) / 6
    return total


def _grid(lo, hi, breaks):
    return [lo] + sorted({x for x in breaks if lo < x < hi}) + [hi]


def box_intersect_volume(b1: BishearBox, b2: BishearBox):
    """Exact volume of the intersection of two bishear boxes.

    Over the common (t1, t2) rectangle the t3-overlap depends only on
    u = (p1-p2) t1 + (q1-q2) t2 and is a trapezoid in u; the pushforward of
    area to u is a (possibly degenerate) trapezoid density.  Both are
    piecewise linear, so Simpson's rule on the merged breakpoints is exact.
    """
    A1 = max(b1.lo1, b2.lo1)
    B1 = min(b1.hi1, b2.hi1)
    if B1 <= A1:
        return (B1 - A1) * 0
    A2 = max(b1.lo2, b2.lo2)
    B2 = min(b1.hi2, b2.hi2)
    if B2 <= A2:
        return (B2 - A2) * 0
    lo3, hi3, lo3b, hi3b = b1.lo3, b1.hi3, b2.lo3, b2.hi3
    if hi3 <= lo3 or hi3b <= lo3b:
        return (A1 - A1)

    def overlap(u):
        v = min(hi3 + u, hi3b) - max(lo3 + u, lo3b)
        return v if v > 0 else v * 0

    f_lo, f_hi = lo3b - hi3, hi3b - lo3
    f_breaks = (lo3b - lo3, hi3b - hi3)
    sa = b1.p - b2.p
    sb = b1.q - b2.q
    w1 = B1 - A1
    w2 = B2 - A2

    if sa == 0 and sb == 0:
        return overlap(sa) * w1 * w2

    if sa == 0 or sb == 0:
        coef, (lo, hi), width = (sb, (A2, B2), w1) if sa == 0 else (sa, (A1, B1), w2)
        u0, u1 = coef * lo, coef * hi
        if u0 > u1:
            u0, u1 = u1, u0
        lo_u, hi_u = max(u0, f_lo), min(u1, f_hi)
        if hi_u <= lo_u:
            return (hi_u - hi_u)
        return width / abs(coef) * _trapezoid(overlap, _grid(lo_u, hi_u, f_breaks))

    x0, x1 = sa * A1, sa * B1
    if x0 > x1:
        x0, x1 = x1, x0
    y0, y1 = sb * A2, sb * B2
    if y0 > y1:
        y0, y1 = y1, y0
    scale = abs(sa * sb)

    def density(u):
        v = min(x1, u - y0) - max(x0, u - y1)
        return v / scale if v > 0 else v * 0

    lo_u, hi_u = max(x0 + y0, f_lo), min(x1 + y1, f_hi)
    if hi_u <= lo_u:
        return (hi_u - hi_u)
    breaks = f_breaks + (x0 + y1, x1 + y0)
    return _simpson(overlap, density, _grid(lo_u, hi_u, breaks))


# ---------------------------------------------------------------------------
# regions


class Region:
    """A finite union of pairwise-disjoint bishear boxes."""

    __slots__ = ("parts", "_aabbs")

    def __init__(self, parts: Iterable[BishearBox] = ()):
        self.parts: tuple[BishearBox, ...] = tuple(parts)
        self._aabbs = None

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Region) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self) -> str:
        return f"Region({len(self.parts)} parts, volume={self.volume})"

    @property
    def volume(self):
        return sum((bx.volume for bx in self.parts), Fraction(0))

    @property
    def aabbs(self) -> list[tuple]:
        if self._aabbs is None:
            self._aabbs = [_float_aabb(bx) for bx in self.parts]
        return self._aabbs

    def contains_point(self, x) -> bool:
        return any(bx.contains_point(x) for bx in self.parts)

    def membership(self, t1, t2, t3) -> np.ndarray:
        """Vectorized float membership test on coordinate arrays."""
        t1, t2, t3 = (np.asarray(v, dtype=float) for v in (t1, t2, t3))
        out = np.zeros(t1.shape, dtype=bool)
        for bx in self.parts:
            fb = bx.to_float()
            w = t3 - fb.p * t1 - fb.q * t2
            out |= ((fb.lo1 <= t1) & (t1 <= fb.hi1) & (fb.lo2 <= t2) & (t2 <= fb.hi2)
                    & (fb.lo3 <= w) & (w <= fb.hi3))
        return out

    def to_json(self) -> list[dict]:
        return [bx.to_json() for bx in self.parts]

    @classmethod
    def from_json(cls, data) -> "Region":
        return cls(BishearBox.from_json(d) for d in data)


EMPTY = Region()


def region(*parts: BishearBox) -> Region:
    return Region(parts)


def _float_aabb(bx: BishearBox) -> tuple:
    out = []
    for v in bx.aabb():
        fv = float(v)
        out.append(fv)
    # inflate so float rounding can never prune a genuinely overlapping pair
    res = []
    for i, fv in enumerate(out):
        slack = 1e-9 * (1.0 + abs(fv))
        res.append(fv - slack if i % 2 == 0 else fv + slack)
    return tuple(res)


def _as_region(r) -> Region:
    if isinstance(r, Region):
        return r
    if isinstance(r, BishearBox):
        return Region((r,))
    return Region(r)


def volume(r) -> Fraction:
    return _as_region(r).volume


def left_translate(g, r) -> Region:
    return Region(left_translate_box(g, bx) for bx in _as_region(r).parts)


def right_translate(r, g) -> Region:
    return Region(right_translate_box(bx, g) for bx in _as_region(r).parts)


def candidate_pairs(r1: Region, r2: Region) -> list[tuple[int, int]]:
    """Index pairs whose (slightly inflated) axis-aligned bounds overlap.

    Sweep along whichever axis separates the parts best, then filter on the
    remaining two axes.
    """
    A, B = r1.aabbs, r2.aabbs
    if not A or not B:
        return []
    if len(A) * len(B) <= 64:
        return [(i, j) for i, a in enumerate(A) for j, b in enumerate(B) if _aabb_overlap(a, b)]
    axis = _sweep_axis(A + B)
    lo_k, hi_k = 2 * axis, 2 * axis + 1
    events = sorted(
        [(a[lo_k], 0, i) for i, a in enumerate(A)] + [(b[lo_k], 1, j) for j, b in enumerate(B)]
    )
    active = ([], [])
    boxes = (A, B)
    out = []
    for lo, side, idx in events:
        other = 1 - side
        keep = [k for k in active[other] if boxes[other][k][hi_k] > lo]
        active[other][:] = keep
        me = boxes[side][idx]
        for k in keep:
            ot = boxes[other][k]
            if _aabb_overlap(me, ot):
                out.append((idx, k) if side == 0 else (k, idx))
        active[side].append(idx)
    out.sort()
    return out


def _aabb_overlap(a, b) -> bool:
    return (a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]
            and a[4] < b[5] and b[4] < a[5])


def _sweep_axis(aabbs) -> int:
    best, best_score = 0, -1.0
    for ax in range(3):
        lo = min(a[2 * ax] for a in aabbs)
        hi = max(a[2 * ax + 1] for a in aabbs)
        mean_ext = sum(a[2 * ax + 1] - a[2 * ax] for a in aabbs) / len(aabbs)
        score = (hi - lo) / mean_ext if mean_ext > 0 else math.inf
        if score > best_score:
            best, best_score = ax, score
    return best


def intersect_volume(r1, r2) -> Fraction:
    r1, r2 = _as_region(r1), _as_region(r2)
    total = Fraction(0)
    for i, j in candidate_pairs(r1, r2):
        total += box_intersect_volume(r1.parts[i], r2.parts[j])
    return total


def box_intersection_common_shear(b1: BishearBox, b2: BishearBox):
    """Intersection of two boxes with equal shear, or None if it is null."""
    lo1, hi1 = max(b1.lo1, b2.lo1), min(b1.hi1, b2.hi1)
    lo2, hi2 = max(b1.lo2, b2.lo2), min(b1.hi2, b2.hi2)
    lo3, hi3 = max(b1.lo3, b2.lo3), min(b1.hi3, b2.hi3)
    if hi1 <= lo1 or hi2 <= lo2 or hi3 <= lo3:
        return None
    return BishearBox(lo1, hi1, lo2, hi2, lo3, hi3, b1.p, b1.q)


def intersect_regions(r1, r2) -> Region:
    """Exact intersection when overlapping parts share their shear.

    Parts with different shears must be null-overlapping; otherwise the
    result would leave the class and ShearMismatch is raised.
    """
    r1, r2 = _as_region(r1), _as_region(r2)
    out = []
    for i, j in candidate_pairs(r1, r2):
        b1, b2 = r1.parts[i], r2.parts[j]
        if b1.p == b2.p and b1.q == b2.q:
            piece = box_intersection_common_shear(b1, b2)
            if piece is not None:
                out.append(piece)
        elif box_intersect_volume(b1, b2) > 0:
            raise ShearMismatch(
                "overlapping parts with different shear coefficients",
                shears=[[format_fraction(b1.p), format_fraction(b1.q)],
                        [format_fraction(b2.p), format_fraction(b2.q)]],
            )
    return Region(out)


def multi_intersect_central(rs: Sequence) -> Region:
    """Exact k-way intersection within the common-shear class."""
    if not rs:
        raise ValueError("need at least one region")
    out = _as_region(rs[0])
    for r in rs[1:]:
        out = intersect_regions(out, r)
        if not out.parts:
            break
    return out


def is_disjoint(r1, r2) -> bool:
    return intersect_volume(r1, r2) == 0


def contains(outer: BishearBox, r) -> bool:
    """Exact containment via corners (bishear boxes are convex polytopes)."""
    return all(outer.contains_point(x) for bx in _as_region(r).parts for x in bx.corners())


def bounding_box(r) -> tuple[Fraction, Fraction, Fraction]:
    """Minimal (alpha, beta, gamma) with I(alpha, beta, gamma) containing r."""
    al = be = ga = Fraction(0)
    for bx in _as_region(r).parts:
        for t1, t2, t3 in bx.corners():
            al = max(al, abs(t1))
            be = max(be, abs(t2))
            ga = max(ga, abs(t3))
    return al, be, ga


# ---------------------------------------------------------------------------
# Monte Carlo oracle


class MCEstimate(NamedTuple):
    estimate: float
    std_error: float
    hits: int
    samples: int


def sample_box(window: BishearBox, n: int, rng: np.random.Generator):
    fw = window.to_float()
    t1 = rng.uniform(fw.lo1, fw.hi1, n)
    t2 = rng.uniform(fw.lo2, fw.hi2, n)
    w = rng.uniform(fw.lo3, fw.hi3, n)
    return t1, t2, w + fw.p * t1 + fw.q * t2


def mc_volume(membership: Callable, window: BishearBox, samples: int, seed: int,
              batch: int = 200_000) -> MCEstimate:
    """Hit-or-miss Haar volume estimate of ``{x in window : membership(x)}``.

    ``membership(t1, t2, t3)`` receives float coordinate arrays and returns a
    boolean array.  The window must contain the target set.
    """
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        mask = np.asarray(membership(*sample_box(window, n, rng)), dtype=bool)
        hits += int(mask.sum())
        done += n
    vol = float(window.volume)
    frac = hits / samples
    return MCEstimate(vol * frac, vol * math.sqrt(frac * (1 - frac) / samples), hits, samples)


def inverse_membership(r: Region) -> Callable:
    """Membership in r^{-1}: x lies in r^{-1} iff x^{-1} lies in r."""

    def member(t1, t2, t3):
        return r.membership(-t1, -t2, t1 * t2 - t3)

    return member


def pair_translate_integral(X: BishearBox, Y: BishearBox, P: BishearBox, Q: BishearBox,
                            side: str, samples: int, seed: int) -> MCEstimate:
    """Monte Carlo over (x, y) in X x Y of an exact inner overlap volume.

    ``side="right"``: the integrand is lambda(P x  cap  Q y);
    ``side="left"``: it is lambda(x P  cap  y Q).  ``hits`` is unused (0).
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    rng = np.random.default_rng(seed)
    xs = np.stack(sample_box(X, samples, rng), axis=1)
    ys = np.stack(sample_box(Y, samples, rng), axis=1)
    Pf, Qf = P.to_float(), Q.to_float()
    vals = np.empty(samples)
    for k in range(samples):
        x, y = tuple(xs[k]), tuple(ys[k])
        if side == "right":
            vals[k] = box_intersect_volume(right_translate_box(Pf, x), right_translate_box(Qf, y))
        else:
            vals[k] = box_intersect_volume(left_translate_box(x, Pf), left_translate_box(y, Qf))
    scale = float(X.volume) * float(Y.volume)
    se = float(vals.std(ddof=1)) / math.sqrt(samples) if samples > 1 else math.inf
    return MCEstimate(scale * float(vals.mean()), scale * se, 0, samples)
