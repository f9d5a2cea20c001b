from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest

from heisenberg_cf.engine import validate
from heisenberg_cf.errors import BudgetExceeded, ConfigError
from heisenberg_cf.folner import BoxParams
from heisenberg_cf.group import GroupElement, c, is_central
from heisenberg_cf.schedules import (
    ASYMMETRIC_TABLE,
    asymmetric_shift,
    asymmetric_step,
    build,
    build_infinite,
    build_mixing,
    check_thm51,
    grid_points,
    quadrature_discrepancy,
)
from heisenberg_cf import config as config_mod


def test_asymmetric_structure(asym):
    assert asym.N == 10
    assert asym.f_params[10] == BoxParams.of(Fraction(874225, 8), Fraction(874225, 8), 75252318119)
    for n in (0, 3, 6, 9):
        note = asym.annotations[n]
        assert note["type"] == "asymmetric"
        C = asym.C(n + 1)
        J = max(n, 1)
        assert len(C) == 2 * J + 1 and all(is_central(g) for g in C)
        spacing = BoxParams.from_json(note["phi"]).gamma
        assert spacing == asym.f_params[n].gamma + 1
        for j, g in zip(range(-J, J + 1), C):
            assert g == c(ASYMMETRIC_TABLE[j % 5] + 2 * spacing * j)
        assert GroupElement.from_json(note["l"]) == c(2 * spacing + 1)
    assert all(p.gamma.denominator == 1 for p in asym.f_params)


def test_asymmetric_step_tiles_exactly():
    F = BoxParams.of(1, 1, 1)
    C, F_next, note = asymmetric_step(3, F, Fraction(1), 1, True)
    assert [asymmetric_shift(j) for j in range(-3, 4)] == [1, 2, 2, 0, 1, 1, 2]
    # copies are spaced 2(gamma + 1) apart: gaps of width 2 minus the table jitter
    t3 = sorted(g.t3 for g in C)
    assert all(b - a >= 2 * F.gamma for a, b in zip(t3, t3[1:]))
    assert F_next.alpha == F.alpha and F_next.gamma.denominator == 1


def test_mixing_builds_validate_and_are_seeded():
    s = build_mixing(3)
    assert validate(s)["passed"]
    again = build_mixing(3)
    assert s.content_hash == again.content_hash
    other = build_mixing(3, {"seed": 1})
    assert other.content_hash != s.content_hash
    for note in s.annotations:
        assert note["type"] == "mixing"
        q = note["quadrature"]
        assert q["max_discrepancy"] >= 0
    constant = build_mixing(2, {"mixing": {"spacer": "constant"}})
    assert validate(constant)["passed"]


def test_mixing_budget():
    with pytest.raises(BudgetExceeded):
        build_mixing(2, {"budget": 2})


def test_grid_points_are_centered():
    pts = grid_points(BoxParams.of(1, 2, 3), (2, 1, 3))
    assert len(pts) == 6
    assert sum(p.t1 for p in pts) == 0 and {p.t2 for p in pts} == {0}
    assert sorted({p.t3 for p in pts}) == [-2, 0, 2]


def test_quadrature_of_a_fine_comb_is_close():
    F = BoxParams.of(1, 1, 1)
    S = BoxParams.of(2, 2, 2)
    rep = quadrature_discrepancy(F, S, grid_points(S, (6, 6, 6)), pairs=2, samples=4000, seed=0)
    for row in rep["pairs"]:
        assert row["discrepancy"] <= 5 * row["haar_se"] + 0.02


def test_infinite_schedule(infinite6):
    rep = check_thm51(infinite6)
    assert rep["passed"], rep["failures"]
    assert rep["counts"] == [2, 3, 4, 5, 6, 7]
    assert rep["partial_products_growing"]
    for cs in infinite6.c_sets:
        diffs = [x.t3 - y.t3 for x, y in combinations(cs, 2)]
        assert len(set(diffs)) == len(diffs)  # distinct differences
    assert validate(infinite6)["passed"]


def test_infinite_negative_control():
    s = build_infinite(4, {"infinite": {"separation_factor": "1/10"}})
    rep = check_thm51(s)
    assert not rep["passed"]
    assert any(f["condition"] == "ii" and f["witness"] for f in rep["failures"])


def test_build_dispatch_and_config_errors():
    assert build(config_mod.resolve({"kind": "infinite", "levels": 2}, "build")).kind == "infinite"
    with pytest.raises(ConfigError):
        config_mod.resolve({"kind": "nope"}, "build")
    with pytest.raises(ConfigError):
        config_mod.resolve({"mixing": {"bogus": 1}}, "build")
    with pytest.raises(ConfigError):
        config_mod.resolve({"levels": 0}, "build")
