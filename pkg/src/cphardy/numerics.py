"""Shared numerical substrate: disk/circle quadrature, seeded sampling, polynomial roots.

Measures are normalized throughout: the unit disk has area 1 and the unit
circle has length 1, so integration operators return plain averages/means in
those normalizations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "EvaluationError",
    "PreconditionError",
    "RootPolishError",
    "DiskQuadrature",
    "CircleQuadrature",
    "SeededSampler",
    "PolyCoeffs",
    "integrate_disk",
    "integrate_circle",
    "mc_region_fraction",
    "poly_roots",
    "cluster_roots",
    "log_recip_abs",
]


class EvaluationError(ValueError):
    """An integrand produced a non-finite value at a quadrature node."""


class PreconditionError(ValueError):
    """An operation was invoked outside its stated domain of validity."""


class RootPolishError(RuntimeError):
    """Root refinement failed to reach the requested residual."""


def log_recip_abs(z: np.ndarray | complex) -> np.ndarray:
    """log(1/|z|), computed via log1p near |z| = 1 to keep relative precision."""
    a = np.abs(np.asarray(z)).astype(float)
    with np.errstate(divide="ignore"):
        out = np.where(a > 0.9, -np.log1p(a - 1.0), -np.log(a))
    return out


@dataclass(frozen=True)
class DiskQuadrature:
    """Tensor quadrature for the normalized area measure on the unit disk.

    Radial nodes are Gauss-Legendre in a transformed variable, mapped by
    r = 1 - (1-u)^beta so that nodes cluster toward |z| = 1 (beta =
    ``radial_refinement``).  The origin is never a node, so integrands with
    an integrable singularity at 0 (e.g. log(1/|z|)) evaluate finitely.
    """

    radial_nodes: int = 256
    angular_nodes: int = 512
    radial_refinement: float = 2.0

    def __post_init__(self):
        if self.radial_nodes < 2 or self.angular_nodes < 4:
            raise ValueError("quadrature needs at least 2 radial and 4 angular nodes")
        if self.radial_refinement < 1.0:
            raise ValueError("radial_refinement must be >= 1")

    @cached_property
    def _radial(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = np.polynomial.legendre.leggauss(self.radial_nodes)
        u = 0.5 * (x + 1.0)
        beta = self.radial_refinement
        r = 1.0 - (1.0 - u) ** beta
        jac = beta * (1.0 - u) ** (beta - 1.0)
        return r, 0.5 * w * 2.0 * r * jac

    @cached_property
    def nodes(self) -> np.ndarray:
        r, _ = self._radial
        th = 2.0 * np.pi * (np.arange(self.angular_nodes) + 0.5) / self.angular_nodes
        return (r[:, None] * np.exp(1j * th)[None, :]).ravel()

    @cached_property
    def weights(self) -> np.ndarray:
        _, wr = self._radial
        w = np.repeat(wr, self.angular_nodes) / self.angular_nodes
        return w


@dataclass(frozen=True)
class CircleQuadrature:
    """Equispaced midpoint rule for the normalized length measure on the circle.

    Angles are offset by half a step, so 0 (a common jump location for step
    moduli) is never a node.
    """

    nodes: int = 4096

    def __post_init__(self):
        if self.nodes < 4:
            raise ValueError("need at least 4 circle nodes")

    @cached_property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * (np.arange(self.nodes) + 0.5) / self.nodes

    @cached_property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    @property
    def weight(self) -> float:
        return 1.0 / self.nodes


class SeededSampler:
    """Deterministic uniform sampler: identical seed, identical stream.

    Tracks the number of draws made (``position``) so a run can be audited.
    Child samplers derived with :meth:`spawn` are decorrelated but fully
    determined by (seed, tag).
    """

    def __init__(self, seed: int, _spawn_path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._spawn_path = _spawn_path
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=_spawn_path))
        )
        self.position = 0

    def uniform(self, n: int) -> np.ndarray:
        self.position += int(n)
        return self._gen.random(int(n))

    def spawn(self, tag: int) -> "SeededSampler":
        return SeededSampler(self.seed, self._spawn_path + (int(tag),))

    def __repr__(self):
        return f"SeededSampler(seed={self.seed}, path={self._spawn_path}, position={self.position})"


@dataclass(frozen=True)
class PolyCoeffs:
    """Complex polynomial coefficients, ascending degree, trailing zeros trimmed."""

    c: tuple[complex, ...]

    @classmethod
    def of(cls, coeffs: Sequence[complex], tol: float = 0.0) -> "PolyCoeffs":
        arr = np.asarray(coeffs, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        scale = np.max(np.abs(arr))
        if scale == 0.0:
            raise ValueError("zero polynomial")
        keep = np.nonzero(np.abs(arr) > tol * scale)[0]
        arr = arr[: keep[-1] + 1]
        return cls(tuple(complex(v) for v in arr))

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.c, dtype=complex)


def _as_real_values(vals: np.ndarray, where: str) -> np.ndarray:
    vals = np.asarray(vals)
    if np.iscomplexobj(vals):
        scale = np.max(np.abs(vals)) if vals.size else 0.0
        if scale > 0 and np.max(np.abs(vals.imag)) > 1e-9 * scale:
            raise EvaluationError(f"{where}: integrand returned complex values")
        vals = vals.real
    return vals.astype(float, copy=False)


def _check_finite(vals: np.ndarray, nodes: np.ndarray, where: str) -> None:
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(f"{where}: non-finite value {vals[i]!r} at node {nodes[i]!r}")


def integrate_disk(f: Callable[[np.ndarray], np.ndarray], q: DiskQuadrature) -> float:
    """Quadrature approximation of the integral of f over the unit disk w.r.t.
    normalized area.  ``f`` must accept a complex ndarray and return values
    of the same shape."""
    z = q.nodes
    vals = _as_real_values(f(z), "integrate_disk")
    _check_finite(vals, z, "integrate_disk")
    return float(np.dot(q.weights, vals))


def integrate_circle(f: Callable[[np.ndarray], np.ndarray], q: CircleQuadrature) -> float:
    """Midpoint-rule integral of f over the unit circle w.r.t. normalized length.
    ``f`` receives the complex boundary points e^{i theta}."""
    z = q.points
    vals = _as_real_values(f(z), "integrate_circle")
    _check_finite(vals, z, "integrate_circle")
    return float(np.mean(vals))


def mc_region_fraction(
    predicate: Callable[[np.ndarray], np.ndarray],
    region,
    n: int,
    s: SeededSampler,
) -> float:
    """Fraction of n uniform samples of ``region`` satisfying ``predicate``.

    ``region`` must expose ``uniform_samples(sampler, n) -> complex ndarray``
    (pseudo-hyperbolic disks do).  Deterministic for a fixed sampler state.
    """
    if n < 1:
        raise PreconditionError("mc_region_fraction needs n >= 1")
    pts = region.uniform_samples(s, int(n))
    hits = np.asarray(predicate(pts), dtype=bool)
    return float(np.count_nonzero(hits)) / float(n)


def _horner(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.full_like(z, c[-1])
    for k in range(len(c) - 2, -1, -1):
        out = out * z + c[k]
    return out


def poly_roots(
    p: PolyCoeffs | Sequence[complex],
    residual_tol: float = 1e-12,
    max_polish: int = 60,
) -> np.ndarray:
    """All complex roots of p, counted with multiplicity (length = degree).

    Companion-matrix eigenvalues polished by Newton iteration until
    |p(z)| <= residual_tol * max|coeff|.  Raises :class:`RootPolishError`
    when polishing cannot reach the target.
    """
    if not isinstance(p, PolyCoeffs):
        p = PolyCoeffs.of(p, tol=1e-300)
    if p.degree < 1:
        raise PreconditionError("poly_roots requires degree >= 1")
    c = p.as_array()
    scale = float(np.max(np.abs(c)))
    roots = np.roots(c[::-1])
    dc = c[1:] * np.arange(1, len(c))
    target = residual_tol * scale
    for _ in range(max_polish):
        res = _horner(c, roots)
        if np.max(np.abs(res)) <= target:
            break
        dres = _horner(dc, roots) if len(dc) else np.ones_like(roots)
        step = np.where(dres != 0, res / np.where(dres == 0, 1.0, dres), 0.0)
        # cap steps: far-out corrections indicate a near-multiple root; damp them
        big = np.abs(step) > 0.5
        step = np.where(big, 0.5 * step / np.abs(np.where(big, step, 1.0)), step)
        roots = roots - step
    res = np.abs(_horner(c, roots))
    if np.max(res) > target:
        raise RootPolishError(
            f"root polishing stalled: max residual {np.max(res):.3e} > {target:.3e}; "
            f"residuals {np.sort(res)[-3:]}"
        )
    return roots


def cluster_roots(roots: np.ndarray, tol: float = 1e-8) -> list[tuple[complex, int]]:
    """Group nearly-identical roots into (center, multiplicity) pairs.

    The tolerance separates well-spaced roots; it is configurable for
    polynomials with genuinely close roots.
    """
    remaining = list(np.asarray(roots, dtype=complex))
    out: list[tuple[complex, int]] = []
    while remaining:
        seed = remaining.pop(0)
        group = [seed]
        rest = []
        for r in remaining:
            if abs(r - seed) <= tol:
                group.append(r)
            else:
                rest.append(r)
        remaining = rest
        out.append((complex(np.mean(group)), len(group)))
    return out
