"""Nevanlinna counting function, the counting ratio tau, and its level sets.

For a symbol phi, N(w) sums log(1/|z|) over the solutions of phi(z) = w in
the open disk (with multiplicity) and is 0 off the image of phi; the value
w = phi(0) is excluded from its domain.  tau(z) = N(z)/log(1/|z|) compares
the counting weight with the one of the identity map, and G_c = {tau > c}
is the super-level set driving the area criterion.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .numerics import DiskQuadrature, PreconditionError, log_recip_abs
from .symbols import SymbolSpec, preimage_roots_batch, preimages

__all__ = [
    "counting",
    "counting_many",
    "tau",
    "tau_many",
    "in_super_level",
    "TauField",
    "ChangeOfVariableReport",
    "verify_change_of_variable",
]

_EXCLUDED_NUDGE = 1e-9


def counting(phi: SymbolSpec, w: complex) -> float:
    """N(w) = sum of log(1/|z|) over preimages of w, 0 when w is not attained."""
    w = complex(w)
    if abs(w) >= 1.0:
        raise PreconditionError("counting expects |w| < 1")
    if w == phi.value_at_zero():
        raise PreconditionError("counting is undefined at w = phi(0)")
    pre = preimages(phi, w)
    return float(sum(m * log_recip_abs(z) for z, m in pre.points))


def counting_many(phi: SymbolSpec, w: np.ndarray) -> np.ndarray:
    """Vectorized counting function.

    Targets that coincide with phi(0) or 0 to rounding are nudged off the
    excluded point; the counting function is integrable there, so the nudge
    only regularizes isolated samples.
    """
    w = np.asarray(w, dtype=complex).copy()
    w0 = phi.value_at_zero()
    hit = np.abs(w - w0) < 1e-13
    if hit.any():
        w[hit] += _EXCLUDED_NUDGE
    roots = preimage_roots_batch(phi, w.ravel())
    mods = np.abs(roots)
    inside = np.isfinite(mods) & (mods < 1.0 - 1e-12)
    contrib = np.where(inside, log_recip_abs(np.where(inside, roots, 1.0)), 0.0)
    return contrib.sum(axis=1).reshape(w.shape)


def tau(phi: SymbolSpec, z: complex) -> float:
    """Counting ratio N(z)/log(1/|z|); 0 wherever z is off the image."""
    z = complex(z)
    if z == 0:
        raise PreconditionError("tau is undefined at 0")
    return counting(phi, z) / float(log_recip_abs(z))


def tau_many(phi: SymbolSpec, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex).copy()
    tiny = np.abs(z) < 1e-13
    if tiny.any():
        z[tiny] += _EXCLUDED_NUDGE
    return counting_many(phi, z) / log_recip_abs(z)


def in_super_level(phi: SymbolSpec, z: complex, c: float) -> bool:
    """Membership in G_c = {tau > c}."""
    if c <= 0:
        raise PreconditionError("level c must be positive")
    return bool(tau(phi, z) > c)


@dataclass
class TauField:
    """Cached tau evaluations for one symbol.

    Batch queries are memoized by a digest of the query array, so repeated
    verification passes over a fixed grid solve the preimage equations once.
    Reads and idempotent re-inserts are safe under concurrent use.
    """

    phi: SymbolSpec
    levels: tuple[float, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @staticmethod
    def _key(pts: np.ndarray) -> bytes:
        return hashlib.blake2b(np.ascontiguousarray(pts).tobytes(), digest_size=16).digest()

    def counting(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        key = (b"N", self._key(pts))
        if key not in self._cache:
            self._cache[key] = counting_many(self.phi, pts)
        return self._cache[key]

    def tau(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        key = (b"T", self._key(pts))
        if key not in self._cache:
            z = pts.copy()
            tiny = np.abs(z) < 1e-13
            if tiny.any():
                z[tiny] += _EXCLUDED_NUDGE
            self._cache[key] = self.counting(z) / log_recip_abs(z)
        return self._cache[key]

    def in_super_level(self, pts: np.ndarray, c: float) -> np.ndarray:
        return self.tau(pts) > c


@dataclass(frozen=True)
class ChangeOfVariableReport:
    """Both sides of the non-univalent substitution identity and their gap.

    ``constant`` multiplies the counting-function side; 1.0 makes the
    identity exact under the normalized area measure (fixed by the identity
    symbol with g = 1, where both sides equal 1/2).  ``gap_if_doubled``
    records how far the frequently quoted doubled right side is from the
    left side, for diagnostic comparison.
    """

    lhs: float
    rhs: float
    rel_gap: float
    constant: float
    gap_if_doubled: float


def verify_change_of_variable(
    phi: SymbolSpec,
    g,
    q: DiskQuadrature | None = None,
    tau_field: TauField | None = None,
    constant: float = 1.0,
) -> ChangeOfVariableReport:
    """Check  integral g(phi(z)) |phi'(z)|^2 log(1/|z|) dA  against
    ``constant`` * integral g(w) N(w) dA(w), both by quadrature.

    ``g`` is a nonnegative measurable field, vectorized over complex arrays.
    Pass a shared ``tau_field`` to reuse counting values across observables.
    """
    q = q or DiskQuadrature()
    z, wts = q.nodes, q.weights
    gv = np.asarray(g(np.asarray(phi.eval(z))), dtype=float)
    lhs = float(np.dot(wts, gv * np.abs(phi.deriv(z)) ** 2 * log_recip_abs(z)))
    field_ = tau_field or TauField(phi)
    nv = field_.counting(z)
    rhs_raw = float(np.dot(wts, np.asarray(g(z), dtype=float) * nv))
    rhs = constant * rhs_raw
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return ChangeOfVariableReport(
        lhs=lhs,
        rhs=rhs,
        rel_gap=abs(lhs - rhs) / scale,
        constant=constant,
        gap_if_doubled=abs(lhs - 2.0 * rhs_raw) / max(abs(lhs), abs(2.0 * rhs_raw), 1e-300),
    )
