"""Irreducible unitary representations of H3(R) and spectral-type bookkeeping.

Representations:

* one-dimensional characters pi_{alpha,beta}(g) = exp(i(alpha t1 + beta t2));
* Schrödinger representations pi_gamma, gamma != 0, on L^2(R):
  (pi_gamma(g) f)(x) = exp(i gamma (t3 + t2 x)) f(x + t1),
  evaluated here on a uniform grid over [-L, L] with zero fill.

Spectral types are symbolic: finitely many weighted atoms, each with a
multiplicity, plus labelled continuous parts.  Multiplicities are integers
or ``math.inf``.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import GammaZero
from .group import GroupElement, as_fraction, flip, format_fraction

INF = math.inf


# ---------------------------------------------------------------------------
# representations


def eval_pi_ab(alpha: float, beta: float, g: GroupElement) -> complex:
    return complex(np.exp(1j * (alpha * float(g.t1) + beta * float(g.t2))))


@dataclass(frozen=True)
class GridVector:
    """Samples f(x_k), x_k = -L + k * step, k = 0..M-1."""

    half_width: float
    step: float
    values: np.ndarray

    @classmethod
    def zeros(cls, half_width: float, step: float) -> "GridVector":
        m = int(round(2 * half_width / step)) + 1
        return cls(half_width, step, np.zeros(m, dtype=np.complex128))

    @classmethod
    def from_function(cls, fn, half_width: float, step: float) -> "GridVector":
        g = cls.zeros(half_width, step)
        return cls(half_width, step, np.asarray(fn(g.x), dtype=np.complex128))

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.step * np.arange(len(self.values))

    def norm2(self) -> float:
        """Squared L2 norm (Riemann sum)."""
        return float(np.sum(np.abs(self.values) ** 2) * self.step)


@dataclass(frozen=True)
class PiGammaResult:
    vector: GridVector
    shift_cells: int
    rounding: float  # t1 minus the grid shift actually applied
    boundary_mass: float  # squared norm shifted out of the window


def eval_pi_gamma(gamma: float, g: GroupElement, f: GridVector) -> PiGammaResult:
    if gamma == 0:
        raise GammaZero("pi_gamma needs gamma != 0")
    t1, t2, t3 = (float(v) for v in g)
    shift = int(round(t1 / f.step))
    rounding = t1 - shift * f.step
    src = f.values
    m = len(src)
    moved = np.zeros_like(src)
    # moved[k] = f[k + shift]
    lo, hi = max(0, -shift), min(m, m - shift)
    if lo < hi:
        moved[lo:hi] = src[lo + shift: hi + shift]
    lost = np.ones(m, dtype=bool)
    if lo < hi:
        lost[lo + shift: hi + shift] = False
    boundary = float(np.sum(np.abs(src[lost]) ** 2) * f.step)
    phase = np.exp(1j * gamma * (t3 + t2 * f.x))
    return PiGammaResult(GridVector(f.half_width, f.step, phase * moved), shift, rounding, boundary)


def center_character(gamma: float, t) -> complex:
    """The scalar by which pi_gamma(c(t)) acts."""
    return complex(np.exp(1j * gamma * float(t)))


def flipped_center_character(gamma: float, t) -> complex:
    """pi_gamma(flip(c(t))): the center character of pi_gamma composed with the flip."""
    return center_character(gamma, flip(GroupElement.of(0, 0, as_fraction(t))).t3)


# ---------------------------------------------------------------------------
# binary grid format: 4-byte little-endian header length, JSON header, complex64 LE data


def write_grid(path: str | Path, f: GridVector) -> None:
    header = json.dumps({"L": f.half_width, "step": f.step, "count": len(f.values),
                         "dtype": "complex64-le"}, sort_keys=True).encode()
    data = f.values.astype("<c8").tobytes()
    Path(path).write_bytes(struct.pack("<I", len(header)) + header + data)


def read_grid(path: str | Path) -> GridVector:
    blob = Path(path).read_bytes()
    (n,) = struct.unpack("<I", blob[:4])
    header = json.loads(blob[4:4 + n])
    values = np.frombuffer(blob[4 + n:], dtype="<c8", count=header["count"]).astype(np.complex128)
    return GridVector(header["L"], header["step"], values)


# ---------------------------------------------------------------------------
# symbolic spectral types


def _mult_add(x, y):
    return x + y


def _mult_json(m):
    return "inf" if m == INF else int(m)


def _canon_atoms(atoms: Iterable[tuple]) -> tuple:
    merged: dict = {}
    for w, pt, mult in atoms:
        w = as_fraction(w)
        if w < 0:
            raise ValueError("atom weights must be non-negative")
        if w == 0:
            continue
        if pt in merged:
            w0, m0 = merged[pt]
            merged[pt] = (w0 + w, _mult_add(m0, mult))
        else:
            merged[pt] = (w, mult)
    return tuple((w, pt, m) for pt, (w, m) in sorted(merged.items()))


def _canon_cont(parts: Iterable[tuple]) -> tuple:
    merged: dict = {}
    for label, mass, mult in parts:
        mass = as_fraction(mass)
        if mass <= 0:
            continue
        if label in merged:
            m0, l0 = merged[label]
            merged[label] = (m0 + mass, _mult_add(l0, mult))
        else:
            merged[label] = (mass, mult)
    return tuple((label, m, l) for label, (m, l) in sorted(merged.items()))


@dataclass(frozen=True)
class SpectralType:
    """A measure (with multiplicities) on R or R^2: weighted atoms plus labelled continuous parts."""

    dim: int
    atoms: tuple = ()
    continuous: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canon_atoms(self.atoms))
        object.__setattr__(self, "continuous", _canon_cont(self.continuous))

    def __add__(self, other: "SpectralType") -> "SpectralType":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return SpectralType(self.dim, self.atoms + other.atoms, self.continuous + other.continuous)

    def is_empty(self) -> bool:
        return not self.atoms and not self.continuous

    def multiplicity(self, point):
        for _, pt, m in self.atoms:
            if pt == point:
                return m
        return 0

    def to_json(self) -> dict:
        def pt(p):
            return [format_fraction(v) for v in p] if isinstance(p, tuple) else format_fraction(p)

        return {
            "dim": self.dim,
            "atoms": [{"weight": format_fraction(w), "point": pt(p), "multiplicity": _mult_json(m)}
                      for w, p, m in self.atoms],
            "continuous": [{"label": lab, "mass": format_fraction(ms), "multiplicity": _mult_json(m)}
                           for lab, ms, m in self.continuous],
        }


@dataclass(frozen=True)
class SpectralTypeDescriptor:
    """Spectral data of a unitary representation of H3(R).

    ``planar`` lives on the characters (alpha, beta) in R^2, ``center`` on the
    Schrödinger parameters gamma in R minus {0}.
    """

    planar: SpectralType = field(default_factory=lambda: SpectralType(2))
    center: SpectralType = field(default_factory=lambda: SpectralType(1))

    def __post_init__(self):
        if self.planar.dim != 2 or self.center.dim != 1:
            raise ValueError("planar part lives on R^2, center part on R")
        if any(p == 0 for _, p, _ in self.center.atoms):
            raise ValueError("center atoms must avoid 0")

    @classmethod
    def of(cls, planar_atoms=(), planar_continuous=(), center_atoms=(), center_continuous=()):
        planar = SpectralType(2, tuple((w, (as_fraction(p[0]), as_fraction(p[1])), m)
                                       for w, p, m in planar_atoms), tuple(planar_continuous))
        center = SpectralType(1, tuple((w, as_fraction(p), m) for w, p, m in center_atoms),
                              tuple(center_continuous))
        return cls(planar, center)

    def __add__(self, other: "SpectralTypeDescriptor") -> "SpectralTypeDescriptor":
        return SpectralTypeDescriptor(self.planar + other.planar, self.center + other.center)

    def to_json(self) -> dict:
        return {"planar": self.planar.to_json(), "center": self.center.to_json()}


def restrict_type(d: SpectralTypeDescriptor, target: str) -> SpectralType:
    """Maximal spectral type and multiplicities of the restriction to a subgroup.

    ``center``: the planar part collapses to an atom at 0 of mass sigma^{1,2}(R^2)
    whose multiplicity counts all planar multiplicities (infinite if a
    continuous planar part is present); the Schrödinger part is carried over
    with infinite multiplicity.

    ``H2a`` (the subgroup of the a(s)c(t)), on coordinates (gamma, alpha): the
    planar part projects to the axis gamma = 0 with multiplicity summed over
    each fibre; each Schrödinger atom gamma becomes the line {gamma} x R with
    Lebesgue measure and multiplicity l^3(gamma).
    """
    if target == "center":
        atoms, cont = [], []
        mass = sum((w for w, _, _ in d.planar.atoms), Fraction(0))
        mass += sum((ms for _, ms, _ in d.planar.continuous), Fraction(0))
        if mass > 0:
            mult = sum((m for _, _, m in d.planar.atoms), 0)
            if d.planar.continuous:
                mult = INF
            atoms.append((mass, Fraction(0), mult))
        atoms += [(w, g, INF) for w, g, _ in d.center.atoms]
        cont += [(label, ms, INF) for label, ms, _ in d.center.continuous]
        return SpectralType(1, tuple(atoms), tuple(cont))
    if target == "H2a":
        atoms = [(w, (Fraction(0), p[0]), m) for w, p, m in d.planar.atoms]
        cont = [(f"delta_0 x proj_alpha({label})", ms, m) for label, ms, m in d.planar.continuous]
        cont += [(f"line gamma={format_fraction(g)} x lebesgue", w, m) for w, g, m in d.center.atoms]
        cont += [(f"{label} x lebesgue", ms, m) for label, ms, m in d.center.continuous]
        return SpectralType(2, tuple(atoms), tuple(cont))
    raise ValueError(f"unknown restriction target {target!r}")


def tensor_rule(gamma, gamma_prime) -> SpectralTypeDescriptor:
    """Decomposition of pi_gamma tensor pi_gamma'."""
    g, gp = as_fraction(gamma), as_fraction(gamma_prime)
    if g == 0 or gp == 0:
        raise GammaZero("tensor rule needs nonzero gammas", gamma=format_fraction(g),
                        gamma_prime=format_fraction(gp))
    if g + gp != 0:
        return SpectralTypeDescriptor.of(center_atoms=[(1, g + gp, INF)])
    return SpectralTypeDescriptor.of(planar_continuous=[("lebesgue", 1, 1)])


def descriptor_from_json(d: dict) -> SpectralTypeDescriptor:
    def mult(m):
        return INF if m == "inf" else int(m)

    def part(p, dim):
        atoms = []
        for a in p.get("atoms", []):
            pt = tuple(as_fraction(v) for v in a["point"]) if dim == 2 else as_fraction(a["point"])
            atoms.append((a["weight"], pt, mult(a["multiplicity"])))
        cont = [(c["label"], c["mass"], mult(c["multiplicity"])) for c in p.get("continuous", [])]
        return SpectralType(dim, tuple(atoms), tuple(cont))

    return SpectralTypeDescriptor(part(d.get("planar", {}), 2), part(d.get("center", {}), 1))
