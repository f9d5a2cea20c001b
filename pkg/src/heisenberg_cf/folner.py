"""The box family I(alpha, beta, gamma), lattice maps, tilings and Følner metrics."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, NamedTuple, Sequence

from .errors import ReportFail
from .group import GroupElement, as_fraction, format_fraction, inv, mul
from .shearbox import (
    BishearBox,
    MCEstimate,
    Region,
    box,
    box_intersect_volume,
    candidate_pairs,
    contains,
    intersect_volume,
    inverse_membership,
    left_translate,
    mc_volume,
    right_translate,
    right_translate_box,
)


class BoxParams(NamedTuple):
    alpha: Fraction
    beta: Fraction
    gamma: Fraction

    @classmethod
    def of(cls, alpha, beta, gamma) -> "BoxParams":
        p = cls(as_fraction(alpha), as_fraction(beta), as_fraction(gamma))
        if min(p) <= 0:
            raise ValueError(f"box parameters must be positive, got {p}")
        return p

    @property
    def box(self) -> BishearBox:
        return box(self.alpha, self.beta, self.gamma)

    @property
    def volume(self) -> Fraction:
        return 8 * self.alpha * self.beta * self.gamma

    def to_json(self) -> list[str]:
        return [format_fraction(v) for v in self]

    @classmethod
    def from_json(cls, data) -> "BoxParams":
        return cls.of(*data)


def phi(params: BoxParams, z: Sequence[int]) -> GroupElement:
    """c(2 gamma j3) b(2 beta j2) a(2 alpha j1)."""
    j1, j2, j3 = z
    return GroupElement(2 * params.alpha * j1, 2 * params.beta * j2, 2 * params.gamma * j3)


def product_bound(p1: BoxParams, p2: BoxParams) -> BoxParams:
    """Parameters of the box known to contain I(p1) I(p2)."""
    return BoxParams(p1.alpha + p2.alpha, p1.beta + p2.beta,
                     p1.gamma + p2.gamma + p1.alpha * p2.beta)


def inverse_bound(p: BoxParams) -> BoxParams:
    """Parameters of the box known to contain I(p)^{-1}."""
    return BoxParams(p.alpha, p.beta, p.gamma + p.alpha * p.beta)


# ---------------------------------------------------------------------------
# tiling


def tiling_check(params: BoxParams, lattice_radius: int, step_factor=2,
                 strict: bool = False) -> dict:
    """Check that the right translates I * phi(z), |z|_inf <= R, tile an inner window.

    The t3 lattice step is ``step_factor * gamma`` (2 is the true tiling;
    smaller factors are a negative control).  Overlaps are exact rational volumes.
    """
    if lattice_radius < 0:
        raise ValueError("lattice_radius must be non-negative")
    R = lattice_radius
    factor = as_fraction(step_factor)
    al, be, ga = params
    points = list(iproduct(range(-R, R + 1), repeat=3))
    tiles = Region(
        right_translate_box(params.box, GroupElement(2 * al * j1, 2 * be * j2, factor * ga * j3))
        for j1, j2, j3 in points
    )
    offending = []
    max_overlap = Fraction(0)
    for i, j in candidate_pairs(tiles, tiles):
        if i >= j:
            continue
        v = box_intersect_volume(tiles.parts[i], tiles.parts[j])
        if v > 0:
            offending.append({"z": list(points[i]), "z_prime": list(points[j]),
                              "overlap_volume": format_fraction(v)})
            max_overlap = max(max_overlap, v)

    # every column over the inner (t1, t2) window is covered in t3 up to height G
    G = R * factor * ga + ga - 2 * al * be * R
    if G > 0:
        window = box((2 * R + 1) * al, (2 * R + 1) * be, G)
        covered = intersect_volume(tiles, window)
        uncovered = window.volume - covered
    else:
        window, uncovered = None, Fraction(0)
    n = len(points)
    report = {
        "params": params.to_json(),
        "lattice_radius": R,
        "step_factor": format_fraction(factor),
        "tiles": n,
        "pairs_checked": n * (n - 1) // 2,
        "pairs_exact": sum(1 for i, j in candidate_pairs(tiles, tiles) if i < j),
        "max_overlap_volume": format_fraction(max_overlap),
        "offending_pairs": offending,
        "inner_window": None if window is None else [format_fraction(v) for v in (window.hi1, window.hi2, window.hi3)],
        "uncovered_volume": format_fraction(uncovered),
        "passed": not offending and uncovered == 0,
    }
    if strict and not report["passed"]:
        raise ReportFail("tiling check failed", offending_pairs=offending[:20],
                         uncovered_volume=report["uncovered_volume"])
    return report


# ---------------------------------------------------------------------------
# product containment


def _random_point(p: BoxParams, rng: random.Random, denom: int) -> GroupElement:
    def draw(h):
        return Fraction(rng.randint(-denom, denom), denom) * h

    return GroupElement(draw(p.alpha), draw(p.beta), draw(p.gamma))


def product_containment_check(p1: BoxParams, p2: BoxParams, samples: int = 1000, seed: int = 0,
                              bound: BoxParams | None = None) -> bool:
    return product_containment_report(p1, p2, samples, seed, bound)["passed"]


def product_containment_report(p1: BoxParams, p2: BoxParams, samples: int = 1000, seed: int = 0,
                               bound: BoxParams | None = None) -> dict:
    """Exact check that I(p1) I(p2) lies in ``bound`` (default: the product bound).

    All 64 corner products are checked, then ``samples`` random rational pairs.
    """
    target = (bound or product_bound(p1, p2)).box
    escape = None
    for x in p1.box.corners():
        for y in p2.box.corners():
            z = mul(GroupElement(*x), GroupElement(*y))
            if not target.contains_point(z):
                escape = (x, y, z)
                break
        if escape:
            break
    rng = random.Random(seed)
    checked = 0
    if escape is None:
        for _ in range(samples):
            x, y = _random_point(p1, rng, 1 << 20), _random_point(p2, rng, 1 << 20)
            z = mul(x, y)
            checked += 1
            if not target.contains_point(z):
                escape = (x, y, z)
                break
    return {
        "bound": (bound or product_bound(p1, p2)).to_json(),
        "corners_checked": 64,
        "samples_checked": checked,
        "passed": escape is None,
        "witness": None if escape is None else [GroupElement(*e).to_json() for e in escape],
    }


# ---------------------------------------------------------------------------
# Følner quality


def folner_ratio(g: GroupElement, params: BoxParams, side: str = "left") -> Fraction:
    """lambda(gF symdiff F) / lambda(F), exact (``side="right"`` uses Fg)."""
    F = params.box
    moved = left_translate(g, F) if side == "left" else right_translate(F, g)
    vol = F.volume
    return 2 * (vol - intersect_volume(moved, F)) / vol


def inverse_symmetry_ratio(params: BoxParams, samples: int = 200_000, seed: int = 0) -> MCEstimate:
    """Monte Carlo estimate of lambda(F symdiff F^{-1}) / lambda(F)."""
    F = Region((params.box,))
    inv_member = inverse_membership(F)
    est = mc_volume(inv_member, params.box, samples, seed)
    vol = float(params.volume)
    return MCEstimate(2 * (1 - est.estimate / vol), 2 * est.std_error / vol, est.hits, samples)


def folner_report(elements: Sequence[GroupElement], param_list: Iterable[BoxParams],
                  two_sided: bool = True) -> dict:
    rows = []
    for p in param_list:
        ratios = []
        for g in elements:
            r = folner_ratio(g, p, "left")
            if two_sided:
                r = max(r, folner_ratio(g, p, "right"))
            ratios.append(r)
        rows.append({"params": p.to_json(), "ratios": [format_fraction(r) for r in ratios],
                     "max_ratio": format_fraction(max(ratios))})
    maxima = [Fraction(r["max_ratio"]) for r in rows]
    return {
        "elements": [g.to_json() for g in elements],
        "rows": rows,
        "strictly_decreasing": all(x > y for x, y in zip(maxima, maxima[1:])),
    }


def sample_inverse_containment(params: BoxParams, samples: int, seed: int) -> bool:
    """Every sampled x in I(p)^{-1} lies in the inverse bound box (exact)."""
    rng = random.Random(seed)
    target = inverse_bound(params).box
    for _ in range(samples):
        x = inv(_random_point(params, rng, 1 << 16))
        if not target.contains_point(x):
            return False
    return True


def right_translates(params: BoxParams, elements: Sequence[GroupElement]) -> Region:
    return Region(right_translate_box(params.box, c) for c in elements)


def contains_product(outer: BoxParams, inner: BoxParams, elements: Sequence[GroupElement]) -> bool:
    """I(inner) * elements is contained in I(outer) (exact, corner test)."""
    return contains(outer.box, right_translates(inner, elements))
