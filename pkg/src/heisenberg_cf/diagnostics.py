"""Finite-level surrogates for mixing, rigidity and the mod-5 asymmetry statistics.

Every row records the level it was computed at and the unresolved mass of the
truncated action, so lower bounds are never presented as exact values.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .engine import (
    WHOLE_SPACE,
    Cylinder,
    MeasureValue,
    Schedule,
    correlate,
    cylinder,
    measure,
    multi_correlate,
)
from .errors import ActionOverflow, CFError, LevelOutOfRange
from .folner import BoxParams, phi
from .group import IDENTITY, GroupElement, a, b, c, format_fraction, power
from .schedules import ASYMMETRIC_TABLE, dyadic_cells
from .shearbox import Region, make_box, right_translate_box

#: Literal central shifts (e1, e2, e3) for (B, C, D) per class j, read as
#: mu(A cap T_{c(e1)} B cap T_{c(e2)} C cap T_{c(e3)} D) / 5.  Their shift
#: sums do not match the table; kept only as a comparison column.
LITERAL_PATTERNS = {
    0: (-1, -2, -2),
    1: (1, 0, -1),
    2: (0, 1, 0),
    3: (0, 0, 1),
    4: (-1, -1, -1),
}


def derived_patterns(table: Sequence[int] = ASYMMETRIC_TABLE) -> dict[int, tuple[int, int, int]]:
    """Limit patterns implied by the spacer table.

    T_l carries copy t to copy t+1 with the central shift 1 + s(t) - s(t+1), so
    f in copy t of class j lies in T_l^k E iff c(d_k) f lies in E, where d_k
    accumulates e(j) = s(j) - s(j-1) - 1 backwards over k copies.  The pattern
    is mu(A cap T_{c(-d1)} B cap T_{c(-d2)} C cap T_{c(-d3)} D) / 5.
    """

    def e(j):
        return table[j % 5] - table[(j - 1) % 5] - 1

    out = {}
    for j in range(5):
        d1 = e(j)
        d2 = d1 + e(j - 1)
        d3 = d2 + e(j - 2)
        out[j] = (-d1, -d2, -d3)
    return out


# ---------------------------------------------------------------------------
# test families


def centered_box(p: BoxParams, fraction=Fraction(1, 2)):
    f = Fraction(fraction)
    return make_box((-p.alpha * f, p.alpha * f), (-p.beta * f, p.beta * f), (-p.gamma * f, p.gamma * f))


def fat_family(s: Schedule, n: int) -> dict[str, Cylinder]:
    """Sub-box cylinders of F_n well inside it (margins of a quarter of each side)."""
    s._check_level(n)
    p = s.f_params[n]
    half = centered_box(p)
    g = p.gamma
    lower = make_box((-p.alpha / 2, p.alpha / 2), (-p.beta / 2, p.beta / 2), (-g / 2, 0))
    upper = make_box((-p.alpha / 2, p.alpha / 2), (-p.beta / 2, p.beta / 2), (0, g / 2))
    inner = make_box((-p.alpha / 4, p.alpha / 2), (-p.beta / 2, p.beta / 4), (-g / 4, g / 2))
    return {name: cylinder(s, n, bx) for name, bx in
            (("half", half), ("lower", lower), ("upper", upper), ("skew", inner))}


def thin_cylinder(s: Schedule, n: int, thickness=Fraction(1, 2)) -> Cylinder:
    """A t3-slab of thickness < 1, so it misses its c(1) and c(2) translates."""
    s._check_level(n)
    p = s.f_params[n]
    return cylinder(s, n, make_box((-p.alpha / 2, p.alpha / 2), (-p.beta / 2, p.beta / 2),
                                   (0, Fraction(thickness))))


def standard_quadruples(fam: dict[str, Cylinder]) -> dict[str, tuple]:
    H, L, U, K = fam["half"], fam["lower"], fam["upper"], fam["skew"]
    return {
        "HHHH": (H, H, H, H),
        "HHXH": (H, H, WHOLE_SPACE, H),
        "HXHH": (H, WHOLE_SPACE, H, H),
        "LUKU": (L, U, K, U),
    }


# ---------------------------------------------------------------------------
# helpers


def _f(x: Fraction) -> str:
    return format_fraction(x)


def _mv(v: MeasureValue) -> dict:
    return v.to_json()


def _step_note(s: Schedule, n: int) -> dict:
    if not 0 <= n < len(s.annotations):
        raise LevelOutOfRange(f"no construction step {n}", level=n, max_level=len(s.annotations) - 1)
    return s.annotations[n]


def step_phi(s: Schedule, n: int) -> BoxParams:
    return BoxParams.from_json(_step_note(s, n)["phi"])


def _prob(s: Schedule, v: Fraction) -> Fraction:
    return v / s.mu_X(s.N)


# ---------------------------------------------------------------------------
# correlation decay and mixing sequences


def correlation_decay(s: Schedule, direction: str, t_grid: Sequence, A: Cylinder, B: Cylinder,
                      max_extra_levels: int = 2, budget: int = 100_000) -> dict:
    """Rows of mu(T_g A cap B) along g = a(t), b(t) or c(t), against mu(A) mu(B)."""
    gen = {"a": a, "b": b, "c": c}[direction]
    mA, mB = measure(A, s), measure(B, s)
    target = mA.normalized * mB.normalized
    top = min(s.N, max(A.level, B.level) + max_extra_levels)
    rows = []
    for t in t_grid:
        g = gen(t)
        try:
            v = correlate(g, A, B, s, max_level=top, budget=budget)
        except CFError as exc:
            rows.append({"t": _f(Fraction(t)), "error": exc.code})
            continue
        rows.append({
            "t": _f(g.t1 + g.t2 + g.t3),
            "value": _f(v.normalized),
            "product_target": _f(target),
            "gap": _f(abs(v.normalized - target)),
            "level": v.level,
            "unresolved": _f(_prob(s, v.unresolved)),
            "exact": v.exact,
        })
    return {"schedule_hash": s.content_hash, "direction": direction, "rows": rows,
            "spacer_tail": _f(s.spacer_fraction(s.N)) if s.N else "0/1"}


def mixing_sequence_test(s: Schedule, n_range: Sequence[int], cells: int = 3,
                         budget: int = 100_000) -> dict:
    """sup over sub-box cylinders A*, B* of F_{n-1} of |mu(T_{phi_n(e3)} A* cap B*) - mu(A*) mu(B*)|.

    Computed at level n+1; rows carry the unresolved mass.
    """
    rows = []
    for n in n_range:
        if n < 1 or n >= s.N:
            raise LevelOutOfRange("need 1 <= n < N", level=n, max_level=s.N - 1)
        g = phi(step_phi(s, n), (0, 0, 1))
        p = s.f_params[n - 1]
        fam = [("F", cylinder(s, n - 1, p.box))]
        fam += [(f"cell{i}", cylinder(s, n - 1, bx)) for i, bx in enumerate(dyadic_cells(p)[:cells])]
        worst = None
        for na, A in fam:
            for nb, B in fam:
                v = correlate(g, A, B, s, level=n + 1, budget=budget)
                prod = measure(A, s).normalized * measure(B, s).normalized
                gap = abs(v.normalized - prod)
                row = {"n": n, "A": na, "B": nb, "value": _f(v.normalized), "product_target": _f(prod),
                       "gap": _f(gap), "level": v.level, "unresolved": _f(_prob(s, v.unresolved))}
                if worst is None or gap > Fraction(worst["gap"]):
                    worst = row
                rows.append(row)
        rows.append({**worst, "A": "sup", "B": "sup"})
    sups = [Fraction(r["gap"]) for r in rows if r["A"] == "sup"]
    return {"schedule_hash": s.content_hash, "rows": rows,
            "sup_gaps": [_f(x) for x in sups]}


# ---------------------------------------------------------------------------
# rigidity


def rigidity_test(s: Schedule, n_range: Sequence[int], family: dict[str, Cylinder] | None = None,
                  control: GroupElement | None = None, budget: int = 100_000) -> dict:
    """sup over a fixed family of mu(T_h A symdiff A), h = phi_n(0, 0, 5), at level n+1.

    The family lives at level min(n_range).  Since the computed correlation is
    a lower bound, 2 (mu(A) - value) is an upper bound for the symmetric
    difference and 2 (mu(A) - value - unresolved) a lower bound.
    """
    n_range = sorted(n_range)
    n0 = n_range[0]
    fam = family if family is not None else fat_family(s, n0)
    ctrl = control if control is not None else a(1)
    rows = []
    for n in n_range:
        h = phi(step_phi(s, n), (0, 0, 5))
        for label, g in (("rigid", h), ("control", ctrl)):
            sup_upper = sup_lower = Fraction(0)
            for name, A in fam.items():
                mA = measure(A, s).normalized
                v = correlate(g, A, A, s, level=n + 1, budget=budget)
                up = 2 * (mA - v.normalized)
                lo = max(Fraction(0), 2 * (mA - v.normalized - _prob(s, v.unresolved)))
                rows.append({"n": n, "element": label, "h": g.to_json(), "set": name,
                             "measure": _f(mA), "correlation": _f(v.normalized),
                             "symdiff_upper": _f(up), "symdiff_lower": _f(lo), "level": v.level})
                sup_upper = max(sup_upper, up)
                sup_lower = max(sup_lower, lo)
            rows.append({"n": n, "element": label, "h": g.to_json(), "set": "sup",
                         "symdiff_upper": _f(sup_upper), "symdiff_lower": _f(sup_lower), "level": n + 1})
    sups = [Fraction(r["symdiff_upper"]) for r in rows if r["set"] == "sup" and r["element"] == "rigid"]
    ctrl_sups = [Fraction(r["symdiff_upper"]) for r in rows if r["set"] == "sup" and r["element"] == "control"]
    return {
        "schedule_hash": s.content_hash,
        "family_level": n0,
        "rows": rows,
        "sup_symdiff": [_f(x) for x in sups],
        "strictly_decreasing": all(x > y for x, y in zip(sups, sups[1:])),
        "control_sup_symdiff": [_f(x) for x in ctrl_sups],
        "control_constant": len(set(ctrl_sups)) <= 1,
    }


# ---------------------------------------------------------------------------
# asymmetry


def _class_cylinder(s: Schedule, n: int, j: int) -> Cylinder:
    note = _step_note(s, n)
    J = note["radius"]
    F = s.f_params[n].box
    parts = [right_translate_box(F, g) for t, g in zip(range(-J, J + 1), s.C(n + 1)) if t % 5 == j]
    return Cylinder(n + 1, Region(parts), s.content_hash)


def _copy_cylinder(s: Schedule, n: int, t: int) -> Cylinder:
    J = _step_note(s, n)["radius"]
    return Cylinder(n + 1, Region((right_translate_box(s.f_params[n].box, s.C(n + 1)[t + J]),)),
                    s.content_hash)


def _pattern(s: Schedule, n: int, sets, shifts) -> Fraction:
    """mu(F_n cap A cap T_{c(e1)} B cap ...) evaluated on level-n regions."""
    gs = [IDENTITY] + [c(e) for e in shifts]
    F = Cylinder(n, Region((s.f_params[n].box,)), s.content_hash)
    v = multi_correlate([IDENTITY] + gs, [F] + list(sets), s, level=n)
    return v.value


def asymmetry_report(s: Schedule, n: int, A, B, C, D, budget: int = 100_000) -> dict:
    """The five class-restricted quadruple correlations at a mod-5 step n.

    Values are computed exactly at level n+1 (lower bounds where the translates
    leave F_{n+1}; the unresolved mass is reported).  Targets are (1/5) of the
    central-translate patterns implied by the table; the literal patterns
    are reported alongside.
    """
    note = _step_note(s, n)
    if note.get("type") != "asymmetric":
        raise ValueError(f"step {n} is not a mod-5 step")
    l = GroupElement.from_json(note["l"])
    gs = [IDENTITY, l, power(l, 2), power(l, 3)]
    sets = [A, B, C, D]
    m = n + 1
    total = multi_correlate(gs, sets, s, level=m, budget=budget)
    derived = derived_patterns(note["table"])
    J = note["radius"]
    size = len(s.C(n + 1))
    classes = []
    for j in range(5):
        Fj = _class_cylinder(s, n, j)
        v = multi_correlate([IDENTITY] + gs, [Fj] + sets, s, level=m, budget=budget)
        target = _pattern(s, n, sets, derived[j]) / 5
        literal = _pattern(s, n, sets, LITERAL_PATTERNS[j]) / 5
        # second route: one copy of class j whose three predecessors exist
        interior = [t for t in range(-J + 3, J + 1) if t % 5 == j]
        via_copy = None
        if interior:
            cp = _copy_cylinder(s, n, interior[0])
            # overflow elsewhere cannot reach this copy, so the value is exact here
            w = multi_correlate([IDENTITY] + gs, [cp] + sets, s, level=m, budget=budget)
            via_copy = w.value * size / 5
        classes.append({
            "class": j,
            "value": v,
            "target": target,
            "literal_target": literal,
            "target_via_copy": via_copy,
            "pattern": derived[j],
        })
    class_sum = sum((r["value"].value for r in classes), Fraction(0))
    mA = measure(A, s).value if A is not None else s.mu_X(n)
    top = s.mu_X(s.N)
    rows = []
    for r in classes:
        v = r["value"]
        gap = abs(v.value - r["target"])
        rows.append({
            "class": r["class"],
            "pattern": list(r["pattern"]),
            "value": _f(v.value / top),
            "unresolved": _f(v.unresolved / top),
            "target": _f(r["target"] / top),
            "gap": _f(gap / top),
            "relative_gap": _f(gap / mA) if mA else None,
            "literal_target": _f(r["literal_target"] / top),
            "target_via_copy": None if r["target_via_copy"] is None else _f(r["target_via_copy"] / top),
            "targets_agree": None if r["target_via_copy"] is None else r["target_via_copy"] == r["target"],
            "level": v.level,
        })
    return {
        "schedule_hash": s.content_hash,
        "n": n,
        "level": m,
        "l": l.to_json(),
        "classes": rows,
        "class_sum": _f(class_sum / top),
        "total": _f(total.value / top),
        "total_unresolved": _f(total.unresolved / top),
        "spacer_part": _f((total.value - class_sum) / top),
        "additive": class_sum == total.value,
        "max_relative_gap": max((Fraction(r["relative_gap"]) for r in rows if r["relative_gap"]),
                                default=Fraction(0)),
    }


def forward_backward(s: Schedule, n: int, A: Cylinder, budget: int = 100_000) -> dict:
    """5 mu(A cap T_l A cap T_l^3 A) and 5 mu(A cap T_l^2 A cap T_l^3 A) at level n+1."""
    note = _step_note(s, n)
    l = GroupElement.from_json(note["l"])
    l2, l3 = power(l, 2), power(l, 3)
    fwd = multi_correlate([IDENTITY, l, l3], [A, A, A], s, level=n + 1, budget=budget)
    bwd = multi_correlate([IDENTITY, l2, l3], [A, A, A], s, level=n + 1, budget=budget)
    mA = measure(A, s)
    top = s.mu_X(s.N)
    return {
        "n": n,
        "measure": _f(mA.normalized),
        "forward": _f(5 * fwd.value / top),
        "forward_unresolved": _f(5 * fwd.unresolved / top),
        "backward": _f(5 * bwd.value / top),
        "backward_unresolved": _f(5 * bwd.unresolved / top),
        "forward_minus_backward": _f(5 * (fwd.value - bwd.value) / top),
        "forward_deficit": _f(mA.normalized - 5 * fwd.value / top),
    }
