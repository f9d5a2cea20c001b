"""Core of the (C,F)-construction: schedules, cylinders, measure and the action.

A schedule is the finite data F_0, ..., F_N (boxes) and C_1, ..., C_N (finite
subsets of the group).  The level-n space X_n is F_n x C_{n+1} x ..., and a
cylinder [A]_n is given by a region A inside F_n.  With the normalization
mu_0 = lambda on X_0,

    mu([A]_n) = lambda(A) / (#C_1 * ... * #C_n),

so refinement [A]_n = [A C_{n+1}]_{n+1} preserves measure exactly.

Only levels 0..N exist, so the action is represented partially: T_g [A]_n is
known exactly once some refinement of A is carried by g into F_m.  When no
computed level is deep enough, correlations are returned as certified lower
bounds together with the unresolved mass (the measure of the part of the
translated set that left F_m).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import ActionOverflow, BudgetExceeded, LevelOutOfRange, ScheduleMismatch
from .folner import BoxParams, folner_ratio
from .group import IDENTITY, GroupElement, a, b, c, format_fraction
from .shearbox import (
    BishearBox,
    Region,
    box_intersect_volume,
    candidate_pairs,
    contains,
    intersect_volume,
    left_translate,
    multi_intersect_central,
    right_translate_box,
)

SCHEDULE_FORMAT = "heisenberg-cf/schedule"
SCHEDULE_VERSION = 1
DEFAULT_BUDGET = 100_000

#: Stands for the whole space X in correlation arguments.
WHOLE_SPACE = None


@dataclass(frozen=True)
class Schedule:
    f_params: tuple[BoxParams, ...]
    c_sets: tuple[tuple[GroupElement, ...], ...]
    annotations: tuple[dict, ...] = ()
    kind: str = "finite"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.c_sets) != len(self.f_params) - 1:
            raise ValueError("need exactly one C-set per level above 0")
        if self.kind not in ("finite", "infinite"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        counts = [1]
        for cs in self.c_sets:
            counts.append(counts[-1] * len(cs))
        object.__setattr__(self, "_counts", tuple(counts))

    @property
    def N(self) -> int:
        return len(self.f_params) - 1

    def F(self, n: int) -> BishearBox:
        self._check_level(n)
        return self.f_params[n].box

    def C(self, n: int) -> tuple[GroupElement, ...]:
        """C_n for 1 <= n <= N."""
        if not 1 <= n <= self.N:
            raise LevelOutOfRange(f"C_{n} is not defined", level=n, max_level=self.N)
        return self.c_sets[n - 1]

    def kappa(self, n: int) -> Fraction:
        """1 / (#C_1 ... #C_n): the factor turning lambda on F_n into mu."""
        self._check_level(n)
        return Fraction(1, self._counts[n])

    def mu_X(self, n: int) -> Fraction:
        """mu_n(X_n) = lambda(F_n) * kappa_n."""
        return self.f_params[n].volume * self.kappa(n)

    def spacer_fraction(self, n: int) -> Fraction:
        """The summand lambda(F_n minus F_{n-1}C_n) / (lambda(F_{n-1}) #C_n), n >= 1."""
        prev = self.f_params[n - 1].volume * len(self.C(n))
        return (self.f_params[n].volume - prev) / prev

    def _check_level(self, n: int):
        if not 0 <= n <= self.N:
            raise LevelOutOfRange(f"level {n} outside 0..{self.N}", level=n, max_level=self.N)

    # -- serialization -----------------------------------------------------

    def _payload(self) -> dict:
        return {
            "format": SCHEDULE_FORMAT,
            "version": SCHEDULE_VERSION,
            "kind": self.kind,
            "f_params": [p.to_json() for p in self.f_params],
            "c_sets": [[g.to_json() for g in cs] for cs in self.c_sets],
            "annotations": list(self.annotations),
            "meta": self.meta,
        }

    @property
    def content_hash(self) -> str:
        cached = self.__dict__.get("_hash")
        if cached is None:
            blob = json.dumps(self._payload(), sort_keys=True, separators=(",", ":"))
            cached = hashlib.sha256(blob.encode()).hexdigest()
            object.__setattr__(self, "_hash", cached)
        return cached

    def to_json(self) -> dict:
        d = self._payload()
        d["content_hash"] = self.content_hash
        return d

    @classmethod
    def from_json(cls, d: dict, verify_hash: bool = True) -> "Schedule":
        if d.get("format") != SCHEDULE_FORMAT:
            raise ValueError("not a schedule document")
        if d.get("version") != SCHEDULE_VERSION:
            raise ValueError(f"unsupported schedule version {d.get('version')}")
        s = cls(
            f_params=tuple(BoxParams.from_json(p) for p in d["f_params"]),
            c_sets=tuple(tuple(GroupElement.from_json(g) for g in cs) for cs in d["c_sets"]),
            annotations=tuple(d.get("annotations", ())),
            kind=d.get("kind", "finite"),
            meta=d.get("meta", {}),
        )
        if verify_hash and "content_hash" in d and d["content_hash"] != s.content_hash:
            raise ScheduleMismatch("schedule content does not match its hash",
                                   stored=d["content_hash"], computed=s.content_hash)
        return s


@dataclass(frozen=True)
class Cylinder:
    level: int
    region: Region
    schedule_hash: str | None = None

    def to_json(self) -> dict:
        return {"level": self.level, "region": self.region.to_json(),
                "schedule_hash": self.schedule_hash}

    @classmethod
    def from_json(cls, d: dict) -> "Cylinder":
        return cls(int(d["level"]), Region.from_json(d["region"]), d.get("schedule_hash"))


class MeasureValue(NamedTuple):
    value: Fraction
    normalized: Fraction
    level: int
    unresolved: Fraction = Fraction(0)

    @property
    def exact(self) -> bool:
        return self.unresolved == 0

    @property
    def upper(self) -> Fraction:
        return self.value + self.unresolved

    def to_json(self) -> dict:
        return {"value": format_fraction(self.value), "normalized": format_fraction(self.normalized),
                "level": self.level, "unresolved": format_fraction(self.unresolved),
                "exact": self.exact}


def cylinder(s: Schedule, level: int, region, check: bool = True) -> Cylinder:
    """Build the cylinder [region]_level, checking region lies in F_level."""
    if isinstance(region, BishearBox):
        region = Region((region,))
    if check and not contains(s.F(level), region):
        raise ValueError(f"region does not lie inside F_{level}")
    return Cylinder(level, region, s.content_hash)


def _check_schedule(s: Schedule, *cyls):
    h = s.content_hash
    for cy in cyls:
        if cy is not None and cy.schedule_hash is not None and cy.schedule_hash != h:
            raise ScheduleMismatch("cylinder belongs to a different schedule",
                                   cylinder_hash=cy.schedule_hash, schedule_hash=h)


def _value(s: Schedule, raw: Fraction, level: int, unresolved: Fraction = Fraction(0)) -> MeasureValue:
    top = s.mu_X(s.N)
    return MeasureValue(raw, raw / top, level, unresolved)


# ---------------------------------------------------------------------------
# validation


def _fail(failures, condition, level, **details):
    failures.append({"condition": condition, "level": level, **details})


def validate(s: Schedule, folner_elements: Sequence[GroupElement] | None = None) -> dict:
    """Exact checks of #C_n > 1, F_{n-1} C_n inside F_n and disjointness of the tiles.

    Also reports the finiteness series and the Følner trend per level.
    """
    failures: list[dict] = []
    levels = []
    for n in range(1, s.N + 1):
        prev, cur, C = s.f_params[n - 1], s.F(n), s.C(n)
        row = {"level": n, "count": len(C)}
        if len(C) <= 1:
            _fail(failures, "several_translates", n, count=len(C))
        tiles = Region(right_translate_box(prev.box, g) for g in C)
        escaped = [i for i, t in enumerate(tiles.parts) if not contains(cur, t)]
        for i in escaped[:10]:
            _fail(failures, "containment", n, element=C[i].to_json())
        row["containment"] = not escaped
        overlaps = 0
        for i, j in candidate_pairs(tiles, tiles):
            if i < j:
                v = box_intersect_volume(tiles.parts[i], tiles.parts[j])
                if v > 0:
                    overlaps += 1
                    if overlaps <= 10:
                        _fail(failures, "disjointness", n, pair=[C[i].to_json(), C[j].to_json()],
                              overlap_volume=format_fraction(v))
        row["disjoint"] = overlaps == 0
        row["spacer_fraction"] = s.spacer_fraction(n)
        levels.append(row)

    partial_sum, partial_prod = Fraction(0), Fraction(1)
    for row in levels:
        partial_sum += row["spacer_fraction"]
        partial_prod *= 1 + row["spacer_fraction"]
        row["partial_sum"] = partial_sum
        row["partial_product"] = partial_prod
    products = [r["partial_product"] for r in levels]
    growing = all(x < y for x, y in zip(products, products[1:]))
    if s.kind == "infinite" and not growing:
        _fail(failures, "finiteness_series", s.N, reason="partial products do not grow")

    elements = list(folner_elements) if folner_elements is not None else [a(1), b(1), c(1)]
    folner = []
    for n, p in enumerate(s.f_params):
        ratios = [max(folner_ratio(g, p, "left"), folner_ratio(g, p, "right")) for g in elements]
        folner.append(max(ratios) if ratios else Fraction(0))

    for row in levels:
        for key in ("spacer_fraction", "partial_sum", "partial_product"):
            row[key] = format_fraction(row[key])
    return {
        "schedule_hash": s.content_hash,
        "kind": s.kind,
        "levels": levels,
        "conditions": {
            "several_translates": not any(f["condition"] == "several_translates" for f in failures),
            "containment": not any(f["condition"] == "containment" for f in failures),
            "disjointness": not any(f["condition"] == "disjointness" for f in failures),
        },
        "partial_products_growing": growing,
        "folner_max_ratio": [format_fraction(r) for r in folner],
        "failures": failures,
        "passed": not failures,
    }


# ---------------------------------------------------------------------------
# refinement, measure, action


def _refine_region(region: Region, C: Sequence[GroupElement], budget: int) -> Region:
    if len(region) * len(C) > budget:
        raise BudgetExceeded("region component budget exceeded",
                             parts=len(region) * len(C), budget=budget)
    return Region(right_translate_box(bx, g) for g in C for bx in region.parts)


def refine(cy: Cylinder, to_level: int, s: Schedule, budget: int = DEFAULT_BUDGET) -> Cylinder:
    """[A]_n = [A C_{n+1} ... C_m]_m."""
    _check_schedule(s, cy)
    s._check_level(to_level)
    if to_level < cy.level:
        raise LevelOutOfRange("cannot refine to a coarser level", level=to_level, from_level=cy.level)
    region = cy.region
    for k in range(cy.level + 1, to_level + 1):
        region = _refine_region(region, s.C(k), budget)
    return Cylinder(to_level, region, s.content_hash)


def measure(cy: Cylinder, s: Schedule) -> MeasureValue:
    _check_schedule(s, cy)
    return _value(s, cy.region.volume * s.kappa(cy.level), cy.level)


def _search_level(g: GroupElement, cy: Cylinder, s: Schedule, start: int, max_level: int,
                  budget: int) -> tuple[int, Region, bool]:
    """Refine until g maps the region into F_m; returns (m, refined region, fits).

    Stops early (fits = False) at the deepest level within budget.
    """
    region = cy.region
    for k in range(cy.level + 1, start + 1):
        region = _refine_region(region, s.C(k), budget)
    m = start
    while True:
        if contains(s.F(m), left_translate(g, region)):
            return m, region, True
        if m >= max_level or len(region) * len(s.C(m + 1)) > budget:
            return m, region, False
        m += 1
        region = _refine_region(region, s.C(m), budget)


def act(g: GroupElement, cy: Cylinder, s: Schedule, max_level: int | None = None,
        budget: int = DEFAULT_BUDGET) -> Cylinder:
    """T_g [A]_n = [g A C_{n+1} ... C_m]_m at the least m where it fits in F_m."""
    _check_schedule(s, cy)
    top = s.N if max_level is None else max_level
    m, region, fits = _search_level(g, cy, s, cy.level, top, budget)
    if not fits:
        moved = left_translate(g, region)
        lost = region.volume - intersect_volume(moved, s.F(m))
        raise ActionOverflow("translate leaves every computed level", level=m,
                             unresolved=format_fraction(lost * s.kappa(m)))
    return Cylinder(m, left_translate(g, region), s.content_hash)


def _overflow(region: Region, moved: Region, Fm: BishearBox) -> Fraction:
    return region.volume - intersect_volume(moved, Fm)


def correlate(g: GroupElement, A: Cylinder, B: Cylinder | None, s: Schedule,
              level: int | None = None, max_level: int | None = None,
              budget: int = DEFAULT_BUDGET, strict: bool = False) -> MeasureValue:
    """mu(T_g A cap B).  B = WHOLE_SPACE gives mu(T_g A).

    With ``level`` the computation is done at that level; otherwise at the
    least level where T_g acts exactly (or the deepest one within budget).
    ``value`` is then a lower bound and ``upper`` an upper bound.
    """
    return multi_correlate([g, IDENTITY], [A, B], s, level=level, max_level=max_level,
                           budget=budget, strict=strict)


def multi_correlate(gs: Sequence[GroupElement], cs: Sequence[Cylinder | None], s: Schedule,
                    level: int | None = None, max_level: int | None = None,
                    budget: int = DEFAULT_BUDGET, strict: bool = False) -> MeasureValue:
    """mu(T_{g_1} A_1 cap ... cap T_{g_k} A_k), exact in the common-shear class.

    Entries equal to WHOLE_SPACE drop out of the intersection.
    """
    if len(gs) != len(cs):
        raise ValueError("need one group element per cylinder")
    _check_schedule(s, *cs)
    pairs = [(g, cy) for g, cy in zip(gs, cs) if cy is not None]
    if not pairs:
        raise ValueError("at least one argument must be a cylinder, not the whole space")
    top = s.N if max_level is None else max_level
    m = max(cy.level for _, cy in pairs) if level is None else level
    s._check_level(m)
    if level is None:
        m_fit = m
        for g, cy in pairs:
            mi, _, fits = _search_level(g, cy, s, m_fit, top, budget)
            m_fit = max(m_fit, mi)
        m = m_fit
    Fm = s.F(m)
    moved, inside, unresolved = [], [], Fraction(0)
    for g, cy in pairs:
        region = refine(cy, m, s, budget).region
        mv = left_translate(g, region)
        ok = contains(Fm, mv)
        if not ok:
            lost = _overflow(region, mv, Fm)
            unresolved += lost
            ok = lost == 0
            if strict and not ok:
                raise ActionOverflow("translate leaves F at the computed level", level=m,
                                     unresolved=format_fraction(lost * s.kappa(m)))
        moved.append(mv)
        inside.append(ok)
    if len(moved) == 1:
        raw = moved[0].volume if inside[0] else intersect_volume(moved[0], Fm)
    elif len(moved) == 2 and any(inside):
        # pairwise volumes are exact for arbitrary shears
        raw = intersect_volume(moved[0], moved[1])
    else:
        inter = multi_intersect_central(moved)
        raw = inter.volume if any(inside) else intersect_volume(inter, Fm)
    k = s.kappa(m)
    return _value(s, raw * k, m, unresolved * k)


# ---------------------------------------------------------------------------
# rank-one bookkeeping


def grid_cells(params: BoxParams, divisions: tuple[int, int, int]) -> list[BishearBox]:
    """Partition of I(params) into a regular grid of coordinate boxes."""
    from .shearbox import make_box

    d1, d2, d3 = divisions
    out = []
    for i in range(d1):
        for j in range(d2):
            for k in range(d3):
                lo = [-params.alpha + 2 * params.alpha * Fraction(i, d1),
                      -params.beta + 2 * params.beta * Fraction(j, d2),
                      -params.gamma + 2 * params.gamma * Fraction(k, d3)]
                hi = [-params.alpha + 2 * params.alpha * Fraction(i + 1, d1),
                      -params.beta + 2 * params.beta * Fraction(j + 1, d2),
                      -params.gamma + 2 * params.gamma * Fraction(k + 1, d3)]
                out.append(make_box((lo[0], hi[0]), (lo[1], hi[1]), (lo[2], hi[2])))
    return out


def mass_accounting(s: Schedule, n: int, divisions=(2, 2, 2)) -> dict:
    """Level-n grid cylinders tile X_n; X_{n+1} adds exactly the spacer mass."""
    cells = grid_cells(s.f_params[n], divisions)
    total = sum((measure(cylinder(s, n, cell), s).value for cell in cells), Fraction(0))
    out = {"level": n, "cells": len(cells), "cell_mass": total, "mu_X": s.mu_X(n),
           "tiles_X": total == s.mu_X(n)}
    if n < s.N:
        spacer = s.mu_X(n + 1) - s.mu_X(n)
        out["spacer_mass"] = spacer
        out["spacer_matches_series"] = spacer == s.spacer_fraction(n + 1) * s.mu_X(n)
    return out
