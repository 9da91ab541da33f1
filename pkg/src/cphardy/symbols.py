"""Rational analytic self-maps of the unit disk.

Every supported symbol variant (finite Blaschke product, polynomial map,
disk automorphism, affine contraction, composition) reduces to a rational
function holomorphic on the closed disk, which makes boundary values,
derivatives and preimage equations exactly computable.  Construction
certifies the self-map property by dense boundary sampling; a rational
function with no poles on the closed disk and modulus <= 1 on the circle is
a self-map by the maximum principle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Protocol, Sequence

import numpy as np

from .numerics import PolyCoeffs, PreconditionError, poly_roots, cluster_roots

__all__ = [
    "SymbolError",
    "SymbolSpec",
    "PreimageSet",
    "SymbolEvaluator",
    "finite_blaschke",
    "polynomial_map",
    "moebius",
    "affine",
    "compose",
    "identity",
    "preimages",
    "preimage_roots_batch",
    "boundary_pushforward_point",
    "parse_symbol_record",
]

_CERT_ANGLES = 4096
_SELF_MAP_SLACK = 1e-10
_BOUNDARY_PROXIMAL = 1e-12
_PREIMAGE_RESIDUAL = 1e-10


class SymbolError(ValueError):
    """Construction-time rejection: the data does not define a usable self-map."""


class SymbolEvaluator(Protocol):
    """Extension point for future non-rational symbol classes.

    Anything exposing these four methods can be plugged into the counting and
    measure machinery; the rational implementation below is the only one
    shipped.
    """

    def eval(self, z: np.ndarray) -> np.ndarray: ...
    def deriv(self, z: np.ndarray) -> np.ndarray: ...
    def boundary_point(self, theta: np.ndarray) -> np.ndarray: ...
    def value_at_zero(self) -> complex: ...


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _poly_deriv(a: np.ndarray) -> np.ndarray:
    if len(a) == 1:
        return np.zeros(1, dtype=complex)
    return a[1:] * np.arange(1, len(a))


def _horner(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.full_like(z, c[-1])
    for k in range(len(c) - 2, -1, -1):
        out = out * z + c[k]
    return out


@dataclass(frozen=True)
class SymbolSpec:
    """A rational analytic self-map of the disk, phi = num/den (ascending coeffs)."""

    variant: str
    params: tuple
    num: tuple[complex, ...]
    den: tuple[complex, ...]

    @cached_property
    def _num(self) -> np.ndarray:
        return np.asarray(self.num, dtype=complex)

    @cached_property
    def _den(self) -> np.ndarray:
        return np.asarray(self.den, dtype=complex)

    @cached_property
    def _dnum(self) -> np.ndarray:
        return _poly_deriv(self._num)

    @cached_property
    def _dden(self) -> np.ndarray:
        return _poly_deriv(self._den)

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def eval(self, z: np.ndarray | complex) -> np.ndarray | complex:
        scalar = np.isscalar(z)
        zz = np.asarray(z, dtype=complex)
        out = _horner(self._num, zz) / _horner(self._den, zz)
        return complex(out) if scalar else out

    def deriv(self, z: np.ndarray | complex) -> np.ndarray | complex:
        scalar = np.isscalar(z)
        zz = np.asarray(z, dtype=complex)
        p, q = _horner(self._num, zz), _horner(self._den, zz)
        dp, dq = _horner(self._dnum, zz), _horner(self._dden, zz)
        out = (dp * q - p * dq) / (q * q)
        return complex(out) if scalar else out

    def boundary_point(self, theta: np.ndarray | float) -> np.ndarray | complex:
        return self.eval(np.exp(1j * np.asarray(theta, dtype=float)))

    def value_at_zero(self) -> complex:
        return complex(self._num[0] / self._den[0])

    def to_record(self) -> str:
        """Single-line text record; see the CLI docs for the grammar."""
        return _format_record(self)

    def __repr__(self):
        return f"SymbolSpec({self.to_record()!r})"


def _c(v: complex) -> str:
    return f"{v.real:.17g},{v.imag:.17g}"


def _format_record(phi: SymbolSpec) -> str:
    if phi.variant == "composition":
        outer, inner = phi.params
        return f"{_format_record(inner)} | {_format_record(outer)}"
    if phi.variant == "blaschke":
        rot, zeros = phi.params
        return "blaschke " + " ".join([_c(rot)] + [_c(a) for a in zeros])
    if phi.variant == "polynomial":
        return "polynomial " + " ".join(_c(a) for a in phi.params)
    if phi.variant == "moebius":
        a, rot = phi.params
        return f"moebius {_c(a)} {_c(rot)}"
    if phi.variant == "affine":
        r, s = phi.params
        return f"affine {_c(complex(r))} {_c(s)}"
    raise SymbolError(f"unknown variant {phi.variant!r}")


def _validate_and_build(variant: str, params: tuple, num: np.ndarray, den: np.ndarray) -> SymbolSpec:
    num = PolyCoeffs.of(num, tol=1e-14).as_array()
    den = PolyCoeffs.of(den, tol=1e-14).as_array()
    # no poles on the closed disk
    if len(den) > 1:
        pr = np.abs(np.roots(den[::-1]))
        if pr.size and pr.min() <= 1.0 + 1e-9:
            raise SymbolError(f"pole at modulus {pr.min():.6g} on the closed disk")
    th = 2.0 * np.pi * np.arange(_CERT_ANGLES) / _CERT_ANGLES
    zb = np.exp(1j * th)
    vals = _horner(num, zb) / _horner(den, zb)
    sup = float(np.max(np.abs(vals)))
    if sup > 1.0 + _SELF_MAP_SLACK:
        raise SymbolError(f"not a self-map: sup |phi| on the circle = {sup:.12g}")
    if float(np.max(np.abs(vals - vals[0]))) < 1e-13:
        raise SymbolError("constant map rejected")
    return SymbolSpec(
        variant=variant,
        params=params,
        num=tuple(complex(v) for v in num),
        den=tuple(complex(v) for v in den),
    )


def finite_blaschke(zeros: Sequence[complex], rotation: complex = 1.0) -> SymbolSpec:
    """Finite Blaschke product with the given zeros, times a unimodular constant."""
    zs = tuple(complex(a) for a in zeros)
    if not zs:
        raise SymbolError("a Blaschke product needs at least one zero")
    if any(abs(a) >= 1 for a in zs):
        raise SymbolError("Blaschke zeros must lie in the open disk")
    rot = _unimodular(rotation)
    num = np.array([rot], dtype=complex)
    den = np.array([1.0], dtype=complex)
    for a in zs:
        num = _poly_mul(num, np.array([-a, 1.0], dtype=complex))
        den = _poly_mul(den, np.array([1.0, -np.conj(a)], dtype=complex))
    return _validate_and_build("blaschke", (rot, zs), num, den)


def polynomial_map(coeffs: Sequence[complex]) -> SymbolSpec:
    cs = tuple(complex(v) for v in coeffs)
    return _validate_and_build("polynomial", cs, np.asarray(cs, dtype=complex), np.ones(1, dtype=complex))


def moebius(a: complex, rotation: complex = 1.0) -> SymbolSpec:
    """Disk automorphism rot * (z - a)/(1 - conj(a) z); maps a to 0."""
    a = complex(a)
    if abs(a) >= 1:
        raise SymbolError("moebius center must lie in the open disk")
    rot = _unimodular(rotation)
    num = np.array([-rot * a, rot], dtype=complex)
    den = np.array([1.0, -np.conj(a)], dtype=complex)
    return _validate_and_build("moebius", (a, rot), num, den)


def affine(scale: float, offset: complex = 0.0) -> SymbolSpec:
    """z -> scale*z + offset with scale in (0,1] and scale + |offset| <= 1."""
    r = float(scale)
    s = complex(offset)
    if not 0.0 < r <= 1.0:
        raise SymbolError("affine scale must lie in (0, 1]")
    if r + abs(s) > 1.0 + 1e-12:
        raise SymbolError("affine map must satisfy scale + |offset| <= 1")
    return _validate_and_build("affine", (r, s), np.array([s, r], dtype=complex), np.ones(1, dtype=complex))


def compose(outer: SymbolSpec, inner: SymbolSpec) -> SymbolSpec:
    """outer . inner, as a single rational map."""
    p1, q1 = np.asarray(outer.num, dtype=complex), np.asarray(outer.den, dtype=complex)
    d = max(len(p1), len(q1)) - 1
    p1 = np.pad(p1, (0, d + 1 - len(p1)))
    q1 = np.pad(q1, (0, d + 1 - len(q1)))
    p2, q2 = np.asarray(inner.num, dtype=complex), np.asarray(inner.den, dtype=complex)
    # powers P2^k Q2^(d-k)
    num = np.zeros(1, dtype=complex)
    den = np.zeros(1, dtype=complex)
    pk = np.ones(1, dtype=complex)
    basis = []
    for k in range(d + 1):
        qk = np.ones(1, dtype=complex)
        for _ in range(d - k):
            qk = _poly_mul(qk, q2)
        basis.append(_poly_mul(pk, qk))
        pk = _poly_mul(pk, p2)
    for k in range(d + 1):
        term = basis[k]
        num = _poly_add(num, p1[k] * term)
        den = _poly_add(den, q1[k] * term)
    return _validate_and_build("composition", (outer, inner), num, den)


def identity() -> SymbolSpec:
    return polynomial_map((0.0, 1.0))


def _poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    return np.pad(a, (0, n - len(a))) + np.pad(b, (0, n - len(b)))


def _unimodular(rot: complex) -> complex:
    rot = complex(rot)
    if abs(abs(rot) - 1.0) > 1e-12:
        raise SymbolError("rotation must be unimodular")
    return rot / abs(rot)


@dataclass(frozen=True)
class PreimageSet:
    """Solutions of phi(z) = w inside the open disk, with multiplicities."""

    points: tuple[tuple[complex, int], ...]
    boundary_proximal: bool

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.points)


def preimages(phi: SymbolSpec, w: complex, cluster_tol: float = 1e-8) -> PreimageSet:
    """All z in the open disk with phi(z) = w, by clearing denominators.

    Roots with |z| >= 1 - 1e-12 are excluded (their counting-function
    contribution is below rounding) but flagged ``boundary_proximal``.
    """
    w = complex(w)
    if abs(w) >= 1.0:
        raise PreconditionError("preimages expects |w| < 1")
    num, den = phi._num, phi._den
    n = max(len(num), len(den))
    coeffs = np.pad(num, (0, n - len(num))) - w * np.pad(den, (0, n - len(den)))
    p = PolyCoeffs.of(coeffs, tol=1e-13)
    if p.degree < 1:
        return PreimageSet(points=(), boundary_proximal=False)
    roots = poly_roots(p)
    inside = np.abs(roots) < 1.0 - _BOUNDARY_PROXIMAL
    proximal = bool(np.any((np.abs(roots) >= 1.0 - _BOUNDARY_PROXIMAL) & (np.abs(roots) <= 1.0 + 1e-9)))
    kept = roots[inside]
    if kept.size:
        resid = np.abs(np.asarray(phi.eval(kept)) - w)
        if np.max(resid) > _PREIMAGE_RESIDUAL:
            raise PreconditionError(
                f"preimage residual {np.max(resid):.3e} exceeds {_PREIMAGE_RESIDUAL:g}"
            )
    pts = tuple((z, m) for z, m in cluster_roots(kept, tol=cluster_tol))
    return PreimageSet(points=pts, boundary_proximal=proximal)


def preimage_roots_batch(phi: SymbolSpec, w: np.ndarray) -> np.ndarray:
    """Roots of phi(z) = w for a batch of targets, shape (len(w), degree).

    Rows are padded with nan where the effective degree drops.  Roots are
    polished by a few vectorized Newton steps; no disk filtering is applied
    here (callers mask by modulus).
    """
    w = np.asarray(w, dtype=complex).ravel()
    num, den = phi._num, phi._den
    n = max(len(num), len(den))
    C = np.pad(num, (0, n - len(num)))[None, :] - w[:, None] * np.pad(den, (0, n - len(den)))[None, :]
    dmax = n - 1
    out = np.full((len(w), dmax), np.nan + 0j, dtype=complex)
    scale = np.max(np.abs(C), axis=1)
    # effective degree per row: highest coefficient above the trim threshold
    mags = np.abs(C) > (1e-13 * scale)[:, None]
    degs = np.where(mags.any(axis=1), n - 1 - np.argmax(mags[:, ::-1], axis=1), 0)
    for d in np.unique(degs):
        rows = np.nonzero(degs == d)[0]
        if d < 1:
            continue
        Cd = C[rows, : d + 1]
        roots = _roots_batch(Cd)
        roots = _newton_polish_batch(Cd, roots)
        out[rows, :d] = roots
    return out


def _roots_batch(C: np.ndarray) -> np.ndarray:
    m, k = C.shape
    d = k - 1
    if d == 1:
        return (-C[:, 0] / C[:, 1])[:, None]
    if d == 2:
        a, b, c = C[:, 2], C[:, 1], C[:, 0]
        disc = np.sqrt(b * b - 4 * a * c)
        # pick the sign that avoids cancellation
        qq = -0.5 * (b + np.where(np.real(np.conj(b) * disc) >= 0, disc, -disc))
        r1 = qq / a
        with np.errstate(divide="ignore", invalid="ignore"):
            r2 = np.where(qq != 0, c / qq, np.zeros_like(qq))
        return np.stack([r1, r2], axis=1)
    comp = np.zeros((m, d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -C[:, :-1] / C[:, -1][:, None]
    return np.linalg.eigvals(comp)


def _newton_polish_batch(C: np.ndarray, roots: np.ndarray, steps: int = 4) -> np.ndarray:
    k = C.shape[1]
    Cd = C[:, 1:] * np.arange(1, k)

    def val(Cm, z):
        r = np.broadcast_to(Cm[:, -1][:, None], z.shape).copy()
        for j in range(Cm.shape[1] - 2, -1, -1):
            r = r * z + Cm[:, j][:, None]
        return r

    for _ in range(steps):
        dv = val(Cd, roots)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dv != 0, val(C, roots) / np.where(dv == 0, 1.0, dv), 0.0)
        roots = roots - step
    return roots


def boundary_pushforward_point(phi: SymbolSpec, theta: float) -> complex:
    """phi(e^{i theta}); rational maps are continuous up to the boundary, so
    this equals the radial limit."""
    return complex(phi.boundary_point(float(theta)))


def parse_symbol_record(line: str) -> SymbolSpec:
    """Parse the one-line symbol grammar (see cli module docs).

    Stages separated by ``|`` are applied left to right:
    ``A | B`` is the map z -> B(A(z)).
    """
    stages = [s.strip() for s in line.split("|")]
    if any(not s for s in stages):
        raise SymbolError(f"empty stage in symbol record {line!r}")
    built = [_parse_stage(s) for s in stages]
    phi = built[0]
    for nxt in built[1:]:
        phi = compose(nxt, phi)
    return phi


def _parse_complex(tok: str) -> complex:
    try:
        re_s, im_s = tok.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise SymbolError(f"bad complex token {tok!r}; expected 're,im'") from None


def _parse_stage(text: str) -> SymbolSpec:
    parts = text.split()
    kind, args = parts[0].lower(), parts[1:]
    if kind == "identity":
        if args:
            raise SymbolError("identity takes no parameters")
        return identity()
    if kind == "polynomial":
        if not args:
            raise SymbolError("polynomial needs coefficients")
        return polynomial_map([_parse_complex(t) for t in args])
    if kind == "blaschke":
        if len(args) < 2:
            raise SymbolError("blaschke needs a rotation and at least one zero")
        vals = [_parse_complex(t) for t in args]
        return finite_blaschke(vals[1:], rotation=vals[0])
    if kind == "moebius":
        if len(args) not in (1, 2):
            raise SymbolError("moebius needs a center and an optional rotation")
        a = _parse_complex(args[0])
        rot = _parse_complex(args[1]) if len(args) == 2 else 1.0
        return moebius(a, rot)
    if kind == "affine":
        if len(args) not in (1, 2):
            raise SymbolError("affine needs a scale and an optional offset")
        r = _parse_complex(args[0])
        if abs(r.imag) > 1e-12:
            raise SymbolError("affine scale must be real")
        s = _parse_complex(args[1]) if len(args) == 2 else 0.0
        return affine(r.real, s)
    raise SymbolError(f"unknown symbol variant {kind!r}")
