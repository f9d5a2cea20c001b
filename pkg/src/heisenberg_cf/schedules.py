"""Builders for the three schedules and their verifiers.

* mixing steps: stochastic spacers s_n(h) = D_n[spacer(h3)] and
  c_{n+1}(h) = s_n(h) phi_n(h) over the index box H_n;
* asymmetric steps (n divisible by 3): central copies shifted by the mod-5
  table c(0), c(1), c(1), c(2), c(2);
* infinite-measure schedule: widely separated central C-sets with distinct
  differences, checked against the sufficient mixing conditions (i)-(iii).
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from . import config as config_mod
from .engine import Schedule
from .errors import BudgetExceeded
from .folner import BoxParams, inverse_bound, phi, product_bound, right_translates
from .group import GroupElement, as_fraction, c, format_fraction
from .shearbox import (
    BishearBox,
    Region,
    bounding_box,
    box_intersect_volume,
    candidate_pairs,
    contains,
    left_translate,
    make_box,
    right_translate_box,
)
from .spacers import deljunco_spacer

ASYMMETRIC_TABLE = (0, 1, 1, 2, 2)


def asymmetric_shift(j: int) -> int:
    """Central shift s_n(j) = c(ASYMMETRIC_TABLE[j mod 5])."""
    return ASYMMETRIC_TABLE[j % 5]


def _ceil(x: Fraction) -> Fraction:
    return Fraction(math.ceil(x))


def _enclosing(params: BoxParams, elements: Sequence[GroupElement], gamma_integer: bool) -> BoxParams:
    """Minimal I(alpha, alpha, gamma) containing F * elements."""
    al, be, ga = bounding_box(right_translates(params, elements))
    alpha = max(al, be)
    return BoxParams(alpha, alpha, _ceil(ga) if gamma_integer else ga)


# ---------------------------------------------------------------------------
# quadrature


def grid_points(S: BoxParams, grid: Sequence[int]) -> list[GroupElement]:
    """Centered grid in the coordinate box S: cell midpoints, g_i points per axis."""
    axes = []
    for half, g in zip(S, grid):
        axes.append([-half + half * Fraction(2 * k + 1, g) for k in range(g)])
    return [GroupElement(x, y, z) for x in axes[0] for y in axes[1] for z in axes[2]]


def dyadic_cells(params: BoxParams, depth: int = 1) -> list[BishearBox]:
    k = 2 ** depth
    out = []
    for i, j, l in iproduct(range(k), repeat=3):
        bounds = []
        for idx, half in zip((i, j, l), params):
            lo = -half + 2 * half * Fraction(idx, k)
            bounds.append((lo, lo + 2 * half / k))
        out.append(make_box(*bounds))
    return out


def quadrature_discrepancy(F: BoxParams, S: BoxParams, D: Sequence[GroupElement], pairs: int,
                           samples: int, seed: int) -> dict:
    """Compare the Dirac-comb average of f_{A,B} with its Haar average over S x S.

    f_{A,B}(x, y) = lambda(Ax cap By) / lambda(F) for dyadic sub-boxes A, B of F.
    The Haar side is a Monte Carlo estimate (exact float inner volumes).
    """
    cells = [bx.to_float() for bx in dyadic_cells(F)]
    rng = random.Random(seed)
    family = [(rng.randrange(len(cells)), rng.randrange(len(cells))) for _ in range(pairs)]
    volF = float(F.volume)
    Df = [tuple(float(v) for v in d) for d in D]
    nrng = np.random.default_rng(seed)
    Sf = [float(v) for v in S]
    rows = []
    for ia, ib in family:
        A, B = cells[ia], cells[ib]
        Ax = [right_translate_box(A, x) for x in Df]
        By = [right_translate_box(B, y) for y in Df]
        comb = sum(box_intersect_volume(u, v) for u in Ax for v in By) / (len(Df) ** 2 * volF)
        xs = nrng.uniform(-1, 1, size=(samples, 2, 3)) * Sf
        vals = np.array([box_intersect_volume(right_translate_box(A, tuple(p[0])),
                                              right_translate_box(B, tuple(p[1]))) / volF
                         for p in xs])
        haar = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        rows.append({"A": ia, "B": ib, "comb": comb, "haar": haar, "haar_se": se,
                     "discrepancy": abs(comb - haar)})
    worst = max(rows, key=lambda r: r["discrepancy"]) if rows else None
    return {
        "pairs": rows,
        "max_discrepancy": worst["discrepancy"] if worst else 0.0,
        "max_discrepancy_se": worst["haar_se"] if worst else 0.0,
    }


# ---------------------------------------------------------------------------
# single steps


def _mixing_dims(n: int, mix: dict) -> tuple[int, int, int, float, float]:
    if mix["preset"] == "asymptotic":
        w = max(n ** 3, 1)
        return w, w, max(4 ** n * mix["r0"], 2), 1.0 / max(n, 1), 1.0 / (n * n + 1)
    return mix["w1"], mix["w2"], mix["r"], mix["epsilon"], mix["delta"]


def mixing_step(n: int, F: BoxParams, F_tilde_prev: BoxParams, mix: dict, seed: int,
                gamma_integer: bool, budget: int) -> tuple[list[GroupElement], BoxParams, BoxParams, dict]:
    """One stochastic-spacer step; returns (C_{n+1}, F_{n+1}, F~_n, annotation)."""
    k = 2 * n + 1
    S = BoxParams(k * F_tilde_prev.alpha, k * F_tilde_prev.beta, k * F_tilde_prev.gamma)
    F_tilde = product_bound(F, S)
    ph = F_tilde
    w1, w2, r, eps, delta = _mixing_dims(n, mix)
    size = (2 * w1 - 1) * (2 * w2 - 1) * (2 * r - 1)
    if size > budget:
        raise BudgetExceeded("index box H_n is too large", level=n, size=size, budget=budget)
    D = grid_points(S, mix["d_grid"])
    if mix["spacer"] == "constant":
        spacer = [0] * (2 * r - 1)
        spacer_report = {"mode": "constant"}
    else:
        res = deljunco_spacer(D, r - 1, eps, delta, mix["order_k"], seed=seed,
                              windows=mix["windows"], retries=mix["retries"])
        spacer = [int(v) for v in res.indices]
        spacer_report = {"mode": "deljunco", **res.report()}
    C = []
    for h in iproduct(range(-(w1 - 1), w1), range(-(w2 - 1), w2), range(-(r - 1), r)):
        s_h = D[spacer[h[2] + r - 1]]
        C.append(s_h * phi(ph, h))
    F_next = _enclosing(F, C, gamma_integer)
    quad = quadrature_discrepancy(F, S, D, mix["quadrature_pairs"], mix["quadrature_samples"], seed)
    note = {
        "step": n,
        "type": "mixing",
        "S": S.to_json(),
        "F_tilde": F_tilde.to_json(),
        "phi": ph.to_json(),
        "H_dims": [w1, w2, r],
        "D_grid": list(mix["d_grid"]),
        "D": [d.to_json() for d in D],
        "spacer": spacer,
        "spacer_report": spacer_report,
        "quadrature": quad,
    }
    return C, F_next, F_tilde, note


def asymmetric_step(n: int, F: BoxParams, offset: Fraction, min_radius: int,
                    gamma_integer: bool) -> tuple[list[GroupElement], BoxParams, dict]:
    """Mod-5 step: c_{n+1}(j) = c(table[j mod 5]) phi(0, 0, j), |j| <= max(n, min_radius)."""
    spacing = BoxParams(F.alpha, F.alpha, F.gamma + offset)
    J = max(n, min_radius)
    C = [c(asymmetric_shift(j)) * phi(spacing, (0, 0, j)) for j in range(-J, J + 1)]
    F_next = _enclosing(F, C, gamma_integer)
    F_next = BoxParams(F.alpha, F.alpha, F_next.gamma)
    note = {
        "step": n,
        "type": "asymmetric",
        "phi": spacing.to_json(),
        "radius": J,
        "table": list(ASYMMETRIC_TABLE),
        "l": c(2 * spacing.gamma + 1).to_json(),
    }
    return C, F_next, note


# ---------------------------------------------------------------------------
# builders


def _build(levels: int, cfg: dict, asym_every: int | None) -> Schedule:
    F = BoxParams.of(*cfg["f0"])
    Fs, Cs, notes = [F], [], []
    F_tilde = None
    gi = cfg["gamma_integer"]
    for n in range(levels):
        if asym_every and n % asym_every == 0:
            C, F_next, note = asymmetric_step(n, F, as_fraction(cfg["asymmetric"]["spacing_offset"]),
                                              cfg["asymmetric"]["min_radius"], gi)
            F_tilde = None
        else:
            # with no previous auxiliary box, F_{n-1} (or F_0) stands in for it
            prev = F_tilde if F_tilde is not None else Fs[-2] if len(Fs) >= 2 else F
            C, F_next, F_tilde, note = mixing_step(n, F, prev, cfg["mixing"], cfg["seed"] * 1000 + n,
                                                   gi, cfg["budget"])
        Cs.append(tuple(C))
        Fs.append(F_next)
        notes.append(note)
        F = F_next
    return Schedule(tuple(Fs), tuple(Cs), tuple(notes), "finite",
                    {"builder": "asymmetric" if asym_every else "mixing", "config": _jsonable(cfg)})


def _jsonable(cfg: dict) -> dict:
    return {k: (_jsonable(v) if isinstance(v, dict) else v) for k, v in cfg.items()}


def build_asymmetric(levels: int, gamma_integer: bool = True, config: dict | None = None) -> Schedule:
    cfg = config_mod.resolve(config or {}, "build")
    cfg["gamma_integer"] = gamma_integer
    cfg["levels"] = levels
    return _build(levels, cfg, 3)


def build_mixing(levels: int, config: dict | None = None) -> Schedule:
    cfg = config_mod.resolve(config or {}, "build")
    cfg["levels"] = levels
    return _build(levels, cfg, None)


def build_infinite(levels: int, config: dict | None = None) -> Schedule:
    """Central, Sidon-type C-sets: c(Delta_n 2^i - centre), i = 0..n+1.

    Delta_n = factor * (4 gamma_n + 4 alpha_n^2) separates the translates of
    F_n F_n^{-1}; F_{n+1} = I(3 alpha_n, 3 alpha_n, 3 gamma_n + 4 alpha_n^2 + max|c|)
    contains F_n F_n^{-1} F_n C_{n+1}.
    """
    cfg = config_mod.resolve(config or {}, "build")
    factor = as_fraction(cfg["infinite"]["separation_factor"])
    F = BoxParams.of(*cfg["f0"])
    Fs, Cs, notes = [F], [], []
    for n in range(levels):
        al, _, ga = F
        delta = factor * (4 * ga + 4 * al * al)
        centre = delta * (2 ** (n + 1) + 1) / 2
        offsets = [delta * 2 ** i - centre for i in range(n + 2)]
        C = [c(t) for t in offsets]
        top = max(abs(t) for t in offsets)
        ga_next = 3 * ga + 4 * al * al + top
        if cfg["gamma_integer"]:
            ga_next = _ceil(ga_next)
        F_next = BoxParams(3 * al, 3 * al, ga_next)
        Cs.append(tuple(C))
        Fs.append(F_next)
        notes.append({"step": n, "type": "infinite", "separation": format_fraction(delta),
                      "offsets": [format_fraction(t) for t in offsets]})
        F = F_next
    return Schedule(tuple(Fs), tuple(Cs), tuple(notes), "infinite",
                    {"builder": "infinite", "config": _jsonable(cfg)})


def build(cfg: dict) -> Schedule:
    """Dispatch on a resolved build config."""
    kind = cfg["kind"]
    if kind == "asymmetric":
        return build_asymmetric(cfg["levels"], cfg["gamma_integer"], cfg)
    if kind == "mixing":
        return build_mixing(cfg["levels"], cfg)
    return build_infinite(cfg["levels"], cfg)


# ---------------------------------------------------------------------------
# sufficient mixing conditions for the infinite-measure schedule


def _ffinv_f(p: BoxParams) -> BoxParams:
    """Box containing F F^{-1} F."""
    return product_bound(product_bound(p, inverse_bound(p)), p)


def check_thm51(s: Schedule) -> dict:
    """Sound sufficient checks of (i)-(iii) for central C-sets.

    (i) F_n F_n^{-1} F_n C subset F_{n+1} through the enclosing box of the
    triple product, both with C = C_n (literal indexing) and C = C_{n+1} (as the
    mixing argument uses it).  (ii) the translates c1 c2^{-1} F_n F_n^{-1},
    c1 != c2 in C_{n+1}, together with F_n F_n^{-1}, are pairwise disjoint,
    checked on the enclosing boxes of F_n F_n^{-1}.  (iii) #C_n is increasing.
    """
    failures = []
    rows = []
    for n in range(0, s.N):
        p = s.f_params[n]
        nxt = s.F(n + 1)
        row = {"level": n}
        for label, k in (("i_literal", n), ("i_used", n + 1)):
            if k < 1:
                row[label] = None
                continue
            region = right_translates(_ffinv_f(p), s.C(k))
            ok = contains(nxt, region)
            row[label] = ok
            if not ok:
                failures.append({"condition": "i", "level": n, "variant": label})
        C = s.C(n + 1)
        central = all(g.t1 == 0 and g.t2 == 0 for g in C)
        row["central"] = central
        ffinv = product_bound(p, inverse_bound(p))
        shifts = [GroupElement(0, 0, Fraction(0))]
        labels = [None]
        for i, c1 in enumerate(C):
            for j, c2 in enumerate(C):
                if i != j:
                    shifts.append(c1 * c2.inv())
                    labels.append((i, j))
        sets = Region(left_translate(g, ffinv.box).parts[0] for g in shifts)
        bad = None
        if not central:
            bad = "non-central C"
        else:
            for u, v in candidate_pairs(sets, sets):
                if u < v and box_intersect_volume(sets.parts[u], sets.parts[v]) > 0:
                    bad = {"pair": [labels[u], labels[v]],
                           "shifts": [shifts[u].to_json(), shifts[v].to_json()]}
                    break
        row["ii"] = bad is None
        if bad is not None:
            failures.append({"condition": "ii", "level": n, "witness": bad})
        rows.append(row)
    counts = [len(cs) for cs in s.c_sets]
    iii = all(x < y for x, y in zip(counts, counts[1:]))
    if not iii:
        failures.append({"condition": "iii", "counts": counts})
    partial = [Fraction(1)]
    for n in range(1, s.N + 1):
        partial.append(partial[-1] * (1 + s.spacer_fraction(n)))
    growing = all(x < y for x, y in zip(partial, partial[1:]))
    return {
        "levels": rows,
        "counts": counts,
        "iii": iii,
        "partial_products": [format_fraction(x) for x in partial[1:]],
        "partial_products_growing": growing,
        "failures": failures,
        "passed": not failures,
    }
