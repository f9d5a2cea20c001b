from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from heisenberg_cf import spectral as spec
from heisenberg_cf.errors import GammaZero
from heisenberg_cf.group import GroupElement, a, b, c, flip, mul
from strategies import elements

INF = spec.INF
gammas = st.sampled_from([-2.0, -0.5, 0.75, 1.0, 3.0])
step = 1 / 16


def gaussian() -> spec.GridVector:
    return spec.GridVector.from_function(lambda x: np.exp(-(x ** 2)) * (1 + 0.2j * x), 12.0, step)


def on_grid(g: GroupElement) -> GroupElement:
    """Snap t1 to the grid so the shift is exact."""
    return GroupElement.of(Fraction(round(float(g.t1) / step)) * Fraction(1, 16), g.t2, g.t3)


@given(st.floats(-5, 5), st.floats(-5, 5), elements, elements)
def test_characters(al, be, g, h):
    z = spec.eval_pi_ab(al, be, g)
    assert abs(abs(z) - 1) < 1e-12
    assert spec.eval_pi_ab(al, be, mul(g, h)) == pytest.approx(z * spec.eval_pi_ab(al, be, h))


@settings(max_examples=30, deadline=None)
@given(gammas, elements)
def test_pi_gamma_center_and_unitarity(gamma, g):
    f = gaussian()
    res = spec.eval_pi_gamma(gamma, g, f)
    assert f.norm2() - res.vector.norm2() == pytest.approx(res.boundary_mass, abs=1e-12)
    z = spec.eval_pi_gamma(gamma, c(g.t3), f)
    assert np.allclose(z.vector.values, spec.center_character(gamma, g.t3) * f.values)
    assert z.boundary_mass == 0 and z.shift_cells == 0


@settings(max_examples=30, deadline=None)
@given(gammas, elements, elements)
def test_pi_gamma_is_a_homomorphism_on_grid_elements(gamma, g, h):
    g, h = on_grid(g), on_grid(h)
    # keep the Gaussian far from the window edge so zero fill loses nothing
    assume(abs(g.t1) <= 4 and abs(h.t1) <= 4)
    f = gaussian()
    inner = spec.eval_pi_gamma(gamma, h, f).vector
    twice = spec.eval_pi_gamma(gamma, g, inner).vector
    once = spec.eval_pi_gamma(gamma, mul(g, h), f).vector
    assert np.allclose(twice.values, once.values, atol=1e-9)


def test_rounding_is_recorded():
    res = spec.eval_pi_gamma(1.0, a(Fraction(1, 40)), gaussian())
    assert res.shift_cells == 0 and res.rounding == pytest.approx(1 / 40)
    with pytest.raises(GammaZero):
        spec.eval_pi_gamma(0, a(1), gaussian())


def test_flip_inverts_central_character():
    assert spec.flipped_center_character(2.0, 3) == pytest.approx(spec.center_character(2.0, -3))
    assert flip(c(3)) == c(-3)


def test_grid_file_round_trip(tmp_path):
    f = gaussian()
    spec.write_grid(tmp_path / "v.bin", f)
    blob = (tmp_path / "v.bin").read_bytes()
    header_len = int.from_bytes(blob[:4], "little")
    assert blob[4:4 + header_len].startswith(b"{")
    assert len(blob) == 4 + header_len + 8 * len(f.values)
    g = spec.read_grid(tmp_path / "v.bin")
    assert g.step == f.step and g.half_width == f.half_width
    assert np.allclose(g.values, f.values.astype(np.complex64))


def test_tensor_rule_branches():
    S = spec.SpectralTypeDescriptor.of
    assert spec.tensor_rule(1, 2) == S(center_atoms=[(1, 3, INF)])
    assert spec.tensor_rule("1/2", "-1/2") == S(planar_continuous=[("lebesgue", 1, 1)])
    assert spec.tensor_rule(-3, 1).center.atoms[0][1] == -2
    for bad in ((0, 1), (1, 0)):
        with pytest.raises(GammaZero) as err:
            spec.tensor_rule(*bad)
        assert err.value.exit_code == 9


def test_restriction_to_center():
    S = spec.SpectralTypeDescriptor.of
    d = S(planar_atoms=[(1, (0, 0), 1), (1, (2, 1), 2)], center_atoms=[(2, 1, 1), (1, -3, 5)])
    r = spec.restrict_type(d, "center")
    assert r.multiplicity(Fraction(0)) == 3
    assert r.multiplicity(Fraction(1)) == INF and r.multiplicity(Fraction(-3)) == INF
    assert sum(w for w, _, _ in r.atoms) == 5
    cont = S(planar_continuous=[("lebesgue", 1, 1)], center_continuous=[("lebesgue", 1, 1)])
    rc = spec.restrict_type(cont, "center")
    assert rc.multiplicity(Fraction(0)) == INF
    assert rc.continuous == (("lebesgue", Fraction(1), INF),)
    assert spec.restrict_type(spec.SpectralTypeDescriptor(), "center").is_empty()


def test_restriction_to_h2a():
    S = spec.SpectralTypeDescriptor.of
    d = S(planar_atoms=[(1, (1, 5), 1), (1, (1, -5), 1)], center_atoms=[(1, 2, 3)])
    r = spec.restrict_type(d, "H2a")
    # both planar atoms project onto alpha = 1
    assert r.multiplicity((Fraction(0), Fraction(1))) == 2
    assert r.continuous == (("line gamma=2/1 x lebesgue", Fraction(1), 3),)
    with pytest.raises(ValueError):
        spec.restrict_type(d, "nowhere")


def test_descriptor_algebra_and_json():
    S = spec.SpectralTypeDescriptor.of
    x = S(center_atoms=[(1, 2, 1)])
    y = S(center_atoms=[(1, 2, 2)], planar_atoms=[(1, (0, 0), 1)])
    z = x + y
    assert z.center.multiplicity(Fraction(2)) == 3
    assert spec.descriptor_from_json(z.to_json()) == z
    inf = S(center_atoms=[(1, 1, INF)])
    assert spec.descriptor_from_json(inf.to_json()) == inf
    with pytest.raises(ValueError):
        S(center_atoms=[(1, 0, 1)])
    with pytest.raises(ValueError):
        S(center_atoms=[(-1, 1, 1)])
