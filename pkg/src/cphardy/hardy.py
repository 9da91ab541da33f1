"""Hardy space machinery: norms by three routes, outer functions, kernels.

All norm operations return the p-th power of the norm; every inequality this
library evaluates is stated on p-th powers, and returning powers avoids
fractional-power noise in comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import CircleQuadrature, DiskQuadrature, PreconditionError, integrate_disk, log_recip_abs

__all__ = [
    "TestFunction",
    "KernelSpec",
    "default_radius_grid",
    "circle_means",
    "norm_boundary",
    "norm_hardy_stein",
    "norm_layer_cake",
    "outer_function",
    "outer_step",
    "kernel",
    "hardy_stein_constant",
]

_TOP_RADIUS = 1.0 - 1e-6


@dataclass(frozen=True)
class TestFunction:
    """An analytic function with an explicit derivative evaluator.

    ``zero_free`` is a claim checked on a fixed dense sample of the closed
    disk at construction.  ``max_radius`` bounds the radii at which the
    evaluators are trustworthy; quadrature-backed outer functions cannot be
    evaluated arbitrarily close to the boundary.
    """

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    zero_free: bool = False
    description: str = ""
    max_radius: float = _TOP_RADIUS

    def __post_init__(self):
        if self.zero_free:
            pts = _disk_sample(512, self.max_radius)
            vals = np.abs(np.asarray(self.f(pts)))
            if not np.all(vals > 0.0):
                raise PreconditionError(
                    f"zero_free claim fails for {self.description or 'function'}: "
                    f"min |f| = {vals.min():.3e}"
                )

    def __call__(self, z):
        return self.f(np.asarray(z, dtype=complex))

    def deriv(self, z):
        return self.df(np.asarray(z, dtype=complex))


def _disk_sample(n: int, max_radius: float) -> np.ndarray:
    # deterministic golden-angle spiral; dense and cheap
    k = np.arange(1, n + 1)
    r = max_radius * np.sqrt(k / n)
    th = 2.399963229728653 * k
    return r * np.exp(1j * th)


def hardy_stein_constant(p: float) -> float:
    """Constant making the derivative-energy identity exact: p^2 / 2.

    Fixed by the monomial f(z) = z at p = 2, where the boundary norm is 1 and
    the logarithmic area integral is 1/2 under normalized area.
    """
    return 0.5 * p * p


def default_radius_grid(max_radius: float = _TOP_RADIUS) -> np.ndarray:
    """Geometric radii 1 - 2^-k approaching the boundary, capped at max_radius."""
    r = 1.0 - 0.5 ** np.arange(21, dtype=float)
    r = np.append(r[r < max_radius], max_radius)
    return r


def _evaluator(f) -> Callable[[np.ndarray], np.ndarray]:
    return f.f if isinstance(f, TestFunction) else f


def circle_means(f, p: float, radii: np.ndarray, q: CircleQuadrature) -> np.ndarray:
    """Mean of |f|^p over the circle of each radius (normalized length)."""
    ev = _evaluator(f)
    pts = q.points
    out = np.empty(len(radii))
    for i, r in enumerate(radii):
        vals = np.abs(np.asarray(ev(r * pts)))
        out[i] = float(np.mean(vals**p))
    return out


def norm_boundary(f, p: float, q: CircleQuadrature | None = None, radii: np.ndarray | None = None) -> float:
    """sup over a radius grid of the circle p-means: the p-th norm power."""
    _check_p(p)
    q = q or CircleQuadrature()
    if radii is None:
        cap = f.max_radius if isinstance(f, TestFunction) else _TOP_RADIUS
        radii = default_radius_grid(cap)
    means = circle_means(f, p, np.asarray(radii, dtype=float), q)
    if not np.all(np.isfinite(means)):
        raise PreconditionError("norm_boundary: non-finite circle mean")
    return float(np.max(means))


def norm_hardy_stein(
    f: TestFunction,
    p: float,
    q: DiskQuadrature | None = None,
    constant: float | None = None,
) -> float:
    """|f(0)|^p plus the weighted derivative-energy integral over the disk.

    The weight is |f|^(p-2) |f'|^2 log(1/|z|) and the exact multiplier is
    p^2/2 (see :func:`hardy_stein_constant`); ``constant`` overrides it,
    which is only useful as a deliberate negative control.
    """
    _check_p(p)
    if p < 2.0 and not f.zero_free:
        raise PreconditionError(
            "norm_hardy_stein with p < 2 needs a zero-free function (|f|^(p-2) is singular at zeros)"
        )
    q = q or DiskQuadrature()
    c = hardy_stein_constant(p) if constant is None else float(constant)

    def integrand(z):
        fv = np.abs(np.asarray(f.f(z)))
        dv = np.abs(np.asarray(f.df(z)))
        if p == 2.0:
            base = np.ones_like(fv)
        else:
            # a zero at a node despite the zero_free gate surfaces as inf -> EvaluationError
            base = np.where(fv > 0, np.where(fv > 0, fv, 1.0) ** (p - 2.0), np.inf if p < 2.0 else 0.0)
        return base * dv * dv * log_recip_abs(z)

    f0 = abs(complex(np.asarray(f.f(np.zeros(1, dtype=complex)))[0]))
    return float(f0**p + c * integrate_disk(integrand, q))


def norm_layer_cake(
    f,
    p: float,
    q: CircleQuadrature | None = None,
    level_cells: int = 16384,
) -> float:
    """Distribution-function route: integral of p t^(p-1) m{|f| > t} dt.

    The level integral uses exact p-power increments per cell with the
    empirical distribution of |f| on the boundary grid, truncated at the
    largest sampled modulus.
    """
    _check_p(p)
    q = q or CircleQuadrature()
    ev = _evaluator(f)
    cap = f.max_radius if isinstance(f, TestFunction) else 1.0
    vals = np.sort(np.abs(np.asarray(ev(min(cap, 1.0) * q.points))))
    top = float(vals[-1])
    if top == 0.0:
        return 0.0
    edges = np.linspace(0.0, top, level_cells + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    dist = 1.0 - np.searchsorted(vals, mids, side="right") / len(vals)
    return float(np.dot(dist, edges[1:] ** p - edges[:-1] ** p))


def outer_function(psi: Callable[[np.ndarray], np.ndarray], q: CircleQuadrature | None = None) -> TestFunction:
    """Zero-free function with prescribed boundary modulus psi (a function of
    the angle), via the exponential of the discretized analytic completion of
    log psi.

    The returned evaluators are accurate for |z| <= max_radius, a few dozen
    node spacings inside the boundary; resolution is set by ``q``.  For
    piecewise-constant moduli prefer :func:`outer_step`, which is exact.
    """
    q = q or CircleQuadrature()
    logs = np.log(_positive_modulus(np.asarray(psi(q.angles), dtype=float)))
    nodes = q.points
    w = q.weight
    max_radius = 1.0 - 32.0 / q.nodes

    def herglotz(z, kernel):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        block = max(1, (1 << 22) // len(nodes))
        for i in range(0, len(flat), block):
            zz = flat[i : i + block][:, None]
            out[i : i + block] = np.sum(kernel(zz) * logs[None, :], axis=1) * w
        return out.reshape(z.shape)

    def fval(z):
        return np.exp(herglotz(z, lambda zz: (nodes[None, :] + zz) / (nodes[None, :] - zz)))

    def dval(z):
        s = herglotz(z, lambda zz: 2.0 * nodes[None, :] / (nodes[None, :] - zz) ** 2)
        return fval(z) * s

    return TestFunction(
        f=fval, df=dval, zero_free=True, description="outer(quadrature)", max_radius=max_radius
    )


def outer_step(angles, moduli) -> TestFunction:
    """Exact outer function for a piecewise-constant boundary modulus.

    ``moduli[j]`` holds on the arc from ``angles[j]`` to ``angles[j+1]``
    (wrapping at the end).  Exactness comes from the closed form of the
    analytic completion over an arc, valid on the whole open disk.
    """
    a = np.asarray(angles, dtype=float)
    m = _positive_modulus(np.asarray(moduli, dtype=float))
    if len(a) != len(m) or len(a) < 1:
        raise PreconditionError("outer_step needs matching nonempty angles and moduli")
    starts = a
    ends = np.roll(a, -1)
    spans = np.mod(ends - starts, 2.0 * np.pi)
    if len(a) > 1 and abs(spans.sum() - 2.0 * np.pi) > 1e-9:
        raise PreconditionError("outer_step arcs must partition the circle")
    if len(a) == 1:
        spans = np.array([2.0 * np.pi])
    logs = np.log(m)

    e_s = np.exp(-1j * starts)
    e_e = np.exp(-1j * ends)

    def completion(z):
        z = np.asarray(z, dtype=complex)[..., None]
        # arc term: m(arc) - (i/pi) [Log(1 - z e^{-i b}) - Log(1 - z e^{-i a})]
        omega = spans / (2.0 * np.pi) - (1j / np.pi) * (np.log(1.0 - z * e_e) - np.log(1.0 - z * e_s))
        return np.sum(logs * omega, axis=-1)

    def dcompletion(z):
        z = np.asarray(z, dtype=complex)[..., None]
        domega = (1j / np.pi) * (e_e / (1.0 - z * e_e) - e_s / (1.0 - z * e_s))
        return np.sum(logs * domega, axis=-1)

    def fval(z):
        return np.exp(completion(z))

    def dval(z):
        return np.exp(completion(z)) * dcompletion(z)

    return TestFunction(f=fval, df=dval, zero_free=True, description="outer(step)")


def _positive_modulus(vals: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(vals)) or np.min(vals) <= 0.0:
        raise PreconditionError("boundary modulus must be strictly positive and finite")
    return vals


@dataclass(frozen=True)
class KernelSpec:
    """Evaluation-kernel family member at lam, for exponent p.

    For p > 1 the kernel 1/(1 - conj(lam) z) is divided by its computed norm;
    for p <= 1 the closed form (1-|lam|^2) / (1 - conj(lam) z)^((p+1)/p) is
    used exactly as displayed, with no renormalization.
    """

    lam: complex
    p: float

    def __post_init__(self):
        if abs(self.lam) >= 1.0:
            raise PreconditionError("kernel parameter must lie in the open disk")
        _check_p(self.p)

    @property
    def regime(self) -> str:
        return "normalized" if self.p > 1.0 else "closed-form"


def kernel(spec: KernelSpec, q: CircleQuadrature | None = None) -> TestFunction:
    """Build the kernel test function described by ``spec``.

    For the normalized regime the norm is computed by :func:`norm_boundary`
    with a circle grid fine enough to resolve the boundary peak of the
    kernel (scaling like 1/(1-|lam|)).
    """
    lam = complex(spec.lam)
    p = spec.p
    lc = np.conj(lam)
    if p > 1.0:
        if q is None:
            q = CircleQuadrature(_kernel_nodes(abs(lam)))
        raw = TestFunction(
            f=lambda z: 1.0 / (1.0 - lc * z),
            df=lambda z: lc / (1.0 - lc * z) ** 2,
            zero_free=True,
            description=f"kernel(lam={lam:.6g}, p={p:g}) unnormalized",
        )
        nrm = norm_boundary(raw, p, q) ** (1.0 / p)
        return TestFunction(
            f=lambda z: (1.0 / nrm) / (1.0 - lc * z),
            df=lambda z: (lc / nrm) / (1.0 - lc * z) ** 2,
            zero_free=True,
            description=f"kernel(lam={lam:.6g}, p={p:g}) normalized",
        )
    e = (p + 1.0) / p
    amp = 1.0 - abs(lam) ** 2

    def fval(z):
        return amp * np.exp(-e * np.log(1.0 - lc * np.asarray(z, dtype=complex)))

    def dval(z):
        zz = np.asarray(z, dtype=complex)
        return amp * e * lc * np.exp(-(e + 1.0) * np.log(1.0 - lc * zz))

    return TestFunction(
        f=fval, df=dval, zero_free=True, description=f"kernel(lam={lam:.6g}, p={p:g}) closed-form"
    )


def _kernel_nodes(lam_abs: float) -> int:
    # aliasing error ~ (|lam| r)^n: keep n (1-|lam|) >= 18 within memory bounds
    need = 18.0 / max(1.0 - lam_abs, 1e-7)
    n = 4096
    while n < need and n < (1 << 17):
        n <<= 1
    return n


def peak_circle_mean(p: float, s: np.ndarray, nodes: int) -> np.ndarray:
    """mean over the circle of |1 - s e^{i t}|^(-p) for each s in [0,1).

    Rotation invariance makes this the circle p-mean of every kernel with
    |lam| r = s, shared across kernel directions; criteria sweeps use it to
    avoid recomputing norms per direction.
    """
    th = 2.0 * np.pi * (np.arange(nodes) + 0.5) / nodes
    c = np.cos(th)
    out = np.empty(len(s))
    for i, sv in enumerate(np.asarray(s, dtype=float)):
        out[i] = float(np.mean((1.0 + sv * sv - 2.0 * sv * c) ** (-0.5 * p)))
    return out


def _check_p(p: float) -> None:
    if not (np.isfinite(p) and p > 0.0):
        raise PreconditionError("the exponent p must be a positive finite number")
