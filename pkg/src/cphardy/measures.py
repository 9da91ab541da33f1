"""Pseudo-hyperbolic geometry, boundary windows, and pullback measures.

The pullback of the normalized length measure under the boundary map of a
symbol is estimated empirically: stratified angles on the circle are pushed
through the symbol, giving weighted atoms on the closed disk.  Window masses,
the boundary density histogram, and the two integral/inequality verifiers all
consume that empirical measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import DiskQuadrature, PreconditionError, SeededSampler, log_recip_abs
from .nevanlinna import TauField
from .symbols import SymbolSpec

__all__ = [
    "pseudo_distance",
    "PseudoDisk",
    "pseudo_disk_area",
    "CarlesonWindow",
    "window_contains",
    "EmpiricalBoundaryMeasure",
    "pullback_measure",
    "measure_of_window",
    "TestObservable",
    "DensityEstimate",
    "rn_density",
    "rn_density_of_measure",
    "PushforwardIdentityReport",
    "verify_pushforward_identity",
    "WindowDominationReport",
    "verify_window_domination",
]


def pseudo_distance(z, w):
    """rho(z, w) = |z - w| / |1 - conj(z) w|, the Moebius-invariant disk metric."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs((z - w) / (1.0 - np.conj(z) * w))


@dataclass(frozen=True)
class PseudoDisk:
    """Pseudo-hyperbolic disk of center a and radius eta; a Euclidean disk."""

    a: complex
    eta: float

    def __post_init__(self):
        if abs(self.a) >= 1.0:
            raise PreconditionError("pseudo-disk center must lie in the open disk")
        if not 0.0 < self.eta < 1.0:
            raise PreconditionError("pseudo-disk radius must lie in (0, 1)")

    @property
    def euclidean_center(self) -> complex:
        a, e2 = self.a, self.eta**2
        return (1.0 - e2) * a / (1.0 - e2 * abs(a) ** 2)

    @property
    def euclidean_radius(self) -> float:
        a, eta = abs(self.a), self.eta
        return eta * (1.0 - a * a) / (1.0 - eta * eta * a * a)

    def contains(self, z) -> np.ndarray:
        return pseudo_distance(self.a, z) < self.eta

    def uniform_samples(self, s: SeededSampler, n: int) -> np.ndarray:
        rad = self.euclidean_radius * np.sqrt(s.uniform(n))
        ang = 2.0 * np.pi * s.uniform(n)
        return self.euclidean_center + rad * np.exp(1j * ang)


def pseudo_disk_area(d: PseudoDisk) -> float:
    """Normalized area, from the Euclidean closed form (radius squared)."""
    return d.euclidean_radius**2


@dataclass(frozen=True)
class CarlesonWindow:
    """Boundary box: 1-h < |z| <= 1 and |arg(z conj(zeta))| <= pi h."""

    zeta: complex
    h: float

    def __post_init__(self):
        if abs(abs(self.zeta) - 1.0) > 1e-12:
            raise PreconditionError("window center must be unimodular")
        if not 0.0 < self.h < 1.0:
            raise PreconditionError("window depth h must lie in (0, 1)")

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        mod = np.abs(z)
        ang = np.abs(np.angle(z * np.conj(self.zeta)))
        return (mod > 1.0 - self.h) & (mod <= 1.0) & (ang <= np.pi * self.h)


def window_contains(w: CarlesonWindow, z) -> bool | np.ndarray:
    res = w.contains(z)
    return bool(res) if np.isscalar(z) or np.asarray(z).ndim == 0 else res


@dataclass(frozen=True)
class EmpiricalBoundaryMeasure:
    """Weighted atoms on the closed disk approximating the boundary pullback.

    Atoms that land within rounding outside the closed disk are clamped back
    onto the circle (the symbol maps the closed disk into itself; excess
    modulus is arithmetic noise).  Weights are positive and sum to 1.
    """

    atoms: np.ndarray
    weights: np.ndarray
    angles: np.ndarray
    source: str
    seed: int

    @property
    def size(self) -> int:
        return len(self.atoms)

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, np.asarray(g(self.atoms), dtype=float)))

    def to_rows(self) -> np.ndarray:
        return np.column_stack([self.angles, self.atoms.real, self.atoms.imag, self.weights])


def pullback_measure(phi: SymbolSpec, n: int, s: SeededSampler) -> EmpiricalBoundaryMeasure:
    """Empirical pushforward of the normalized length measure under the
    boundary values of phi, from stratified-uniform angles."""
    if n < 1:
        raise PreconditionError("pullback_measure needs n >= 1")
    jitter = s.uniform(n)
    theta = 2.0 * np.pi * (np.arange(n) + jitter) / n
    atoms = np.asarray(phi.boundary_point(theta), dtype=complex)
    mod = np.abs(atoms)
    over = mod > 1.0
    if over.any():
        if np.max(mod) > 1.0 + 1e-9:
            raise PreconditionError("boundary image left the closed disk beyond rounding")
        atoms = np.where(over, atoms / mod, atoms)
    return EmpiricalBoundaryMeasure(
        atoms=atoms,
        weights=np.full(n, 1.0 / n),
        angles=theta,
        source=phi.to_record(),
        seed=s.seed,
    )


def measure_of_window(mu: EmpiricalBoundaryMeasure, w: CarlesonWindow) -> float:
    return float(np.sum(mu.weights[w.contains(mu.atoms)]))


@dataclass(frozen=True)
class TestObservable:
    """A C^2 observable paired with its exact Laplacian.

    The pairing is validated at construction by comparing ``laplacian`` with a
    5-point finite-difference stencil of ``g`` at fixed interior points.
    """

    g: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    def __post_init__(self):
        pts = 0.75 * _fixed_points(24)
        step = 1e-4
        num = (
            np.asarray(self.g(pts + step), dtype=float)
            + np.asarray(self.g(pts - step), dtype=float)
            + np.asarray(self.g(pts + 1j * step), dtype=float)
            + np.asarray(self.g(pts - 1j * step), dtype=float)
            - 4.0 * np.asarray(self.g(pts), dtype=float)
        ) / step**2
        claimed = np.asarray(self.laplacian(pts), dtype=float)
        scale = max(1.0, float(np.max(np.abs(claimed))))
        err = float(np.max(np.abs(num - claimed))) / scale
        if err > 1e-5:
            raise PreconditionError(
                f"laplacian mismatch for {self.description or 'observable'}: stencil error {err:.2e}"
            )


def _fixed_points(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    return np.sqrt(k / (n + 1)) * np.exp(1j * 2.399963229728653 * k)


@dataclass(frozen=True)
class DensityEstimate:
    """Histogram density of the circle part of a pullback measure.

    ``ess_inf`` is the minimum bin density, an estimate of the essential
    infimum from below in the sampling limit.  ``bin_error`` is the binomial
    standard error of one bin under the observed mean density.
    """

    bin_edges: np.ndarray
    densities: np.ndarray
    ess_inf: float
    max_density: float
    mass_on_circle: float
    sample_count: int
    bin_error: float


def rn_density_of_measure(
    mu: EmpiricalBoundaryMeasure, bins: int = 64, circle_tol: float = 1e-9
) -> DensityEstimate:
    if bins < 8:
        raise PreconditionError("need at least 8 bins")
    on_circle = np.abs(mu.atoms) >= 1.0 - circle_tol
    ang = np.mod(np.angle(mu.atoms[on_circle]), 2.0 * np.pi)
    wts = mu.weights[on_circle]
    edges = np.linspace(0.0, 2.0 * np.pi, bins + 1)
    mass, _ = np.histogram(ang, bins=edges, weights=wts)
    dens = mass * bins  # bin length is 1/bins in normalized measure
    mass_circle = float(wts.sum())
    mean_bin_mass = mass_circle / bins
    err = bins * np.sqrt(max(mean_bin_mass, 0.0) / max(mu.size, 1))
    return DensityEstimate(
        bin_edges=edges,
        densities=dens,
        ess_inf=float(dens.min()) if bins else 0.0,
        max_density=float(dens.max()) if bins else 0.0,
        mass_on_circle=mass_circle,
        sample_count=mu.size,
        bin_error=float(err),
    )


def rn_density(
    phi: SymbolSpec,
    bins: int,
    n: int,
    s: SeededSampler,
    circle_tol: float = 1e-9,
) -> DensityEstimate:
    """Density histogram of the circle restriction of the pullback of phi."""
    if n < 8 * bins:
        raise PreconditionError("rn_density wants n much larger than the bin count")
    return rn_density_of_measure(pullback_measure(phi, n, s), bins, circle_tol)


@dataclass(frozen=True)
class PushforwardIdentityReport:
    """Atom average of g against its interior representation.

    ``scale`` is max(|lhs|, |rhs|, mean |g| under the measure); the relative
    gap is measured against it so harmonic observables with vanishing sides
    do not produce spurious blowups.
    """

    lhs: float
    rhs: float
    abs_gap: float
    rel_gap: float
    scale: float


def verify_pushforward_identity(
    phi: SymbolSpec,
    obs: TestObservable,
    mu: EmpiricalBoundaryMeasure,
    q: DiskQuadrature | None = None,
    tau_field: TauField | None = None,
) -> PushforwardIdentityReport:
    """Compare the atom average of g with g(phi(0)) + (1/2) integral of
    (laplacian g) N dA."""
    q = q or DiskQuadrature()
    lhs = mu.integrate(obs.g)
    field = tau_field or TauField(phi)
    z = q.nodes
    nv = field.counting(z)
    rhs = float(np.asarray(obs.g(np.asarray([phi.value_at_zero()], dtype=complex)), dtype=float)[0])
    rhs += 0.5 * float(np.dot(q.weights, np.asarray(obs.laplacian(z), dtype=float) * nv))
    scale = max(abs(lhs), abs(rhs), mu.integrate(lambda w: np.abs(np.asarray(obs.g(w), dtype=float))), 1e-300)
    gap = abs(lhs - rhs)
    return PushforwardIdentityReport(lhs=lhs, rhs=rhs, abs_gap=gap, rel_gap=gap / scale, scale=scale)


@dataclass(frozen=True)
class WindowDominationReport:
    """One window's counting supremum against its dilated-window mass bound."""

    zeta: complex
    h: float
    c: float
    sup_counting: float
    dilated_mass: float
    bound: float
    margin: float

    @property
    def holds(self) -> bool:
        return self.margin >= 0.0


def verify_window_domination(
    phi: SymbolSpec,
    w: CarlesonWindow,
    c: float,
    mu: EmpiricalBoundaryMeasure,
    probe_moduli: int = 32,
    probe_angles: int = 32,
    tau_field: TauField | None = None,
) -> WindowDominationReport:
    """Probe  sup over W of N  <=  (100/c^2) * mass of W(zeta, (1+c)h).

    The supremum is approximated from below on a tensor probe grid inside the
    window, which is the conservative direction for an upper-bound check.
    Hypotheses: 0 < c < 1/8 and h < (1 - |phi(0)|)/8.
    """
    if not 0.0 < c < 0.125:
        raise PreconditionError("dilation parameter c must lie in (0, 1/8)")
    h_cap = (1.0 - abs(phi.value_at_zero())) / 8.0
    if not w.h < h_cap:
        raise PreconditionError(f"window depth h = {w.h:g} must be below (1 - |phi(0)|)/8 = {h_cap:g}")
    mods = np.linspace(1.0 - w.h, 1.0 - 1e-6, probe_moduli + 1)[1:]
    angs = np.angle(w.zeta) + np.pi * w.h * np.linspace(-1.0, 1.0, probe_angles)
    grid = (mods[:, None] * np.exp(1j * angs)[None, :]).ravel()
    field = tau_field or TauField(phi)
    sup_n = float(np.max(field.counting(grid)))
    dilated = CarlesonWindow(w.zeta, (1.0 + c) * w.h)
    mass = measure_of_window(mu, dilated)
    bound = (100.0 / (c * c)) * mass
    return WindowDominationReport(
        zeta=w.zeta,
        h=w.h,
        c=c,
        sup_counting=sup_n,
        dilated_mass=mass,
        bound=bound,
        margin=bound - sup_n,
    )
