"""Closed-range criteria: four independent estimators and a joint verdict.

Each criterion produces a tri-state verdict (Closed / NotClosed /
Inconclusive) from a scalar estimate against a threshold with an
order-of-magnitude inconclusive band: the underlying conditions are
existential over constants, so a numerical run can only exhibit evidence,
never certainty.  In exact arithmetic the four criteria agree for every
symbol; disagreement among confident verdicts is flagged as a numerical
fault via the consistency bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .hardy import (
    TestFunction,
    KernelSpec,
    kernel,
    norm_boundary,
    outer_step,
    peak_circle_mean,
    _kernel_nodes,
)
from .measures import (
    DensityEstimate,
    EmpiricalBoundaryMeasure,
    PseudoDisk,
    CarlesonWindow,
    measure_of_window,
    pullback_measure,
    rn_density_of_measure,
)
from .nevanlinna import TauField
from .numerics import DiskQuadrature, PreconditionError, SeededSampler, integrate_disk, log_recip_abs
from .symbols import SymbolSpec, affine, compose, finite_blaschke, identity, moebius, polynomial_map

__all__ = [
    "CLOSED",
    "NOT_CLOSED",
    "INCONCLUSIVE",
    "Verdict",
    "CriteriaConfig",
    "SymbolArtifacts",
    "ClosedRangeReport",
    "kernel_test",
    "boundary_density_test",
    "levelset_area_test",
    "window_test",
    "levelset_energy_probe",
    "LevelsetEnergyReport",
    "direct_norm_ratio_probe",
    "default_ratio_family",
    "analyze",
    "golden_corpus",
]

CLOSED = "Closed"
NOT_CLOSED = "NotClosed"
INCONCLUSIVE = "Inconclusive"

_TOP_RADIUS = 1.0 - 1e-6


@dataclass(frozen=True)
class Verdict:
    """Tri-state outcome of one criterion estimator."""

    state: str
    estimate: float
    threshold: float
    note: str = ""

    def as_dict(self) -> dict:
        return {"state": self.state, "estimate": self.estimate, "threshold": self.threshold, "note": self.note}


def _decide(estimate: float, threshold: float, band: float, note: str) -> Verdict:
    if estimate >= threshold:
        state = CLOSED
    elif estimate <= threshold / band:
        state = NOT_CLOSED
    else:
        state = INCONCLUSIVE
    return Verdict(state=state, estimate=float(estimate), threshold=float(threshold), note=note)


@dataclass(frozen=True)
class CriteriaConfig:
    """Grids, sample sizes and thresholds for the four criteria.

    Defaults are calibrated so the golden corpus separates cleanly at every
    exponent in {0.5, 1, 2, 4}.  The kernel grid is deepened for p <= 1: the
    kernel mass over a compactly supported measure decays like
    (1 - |lam|^2)^p, so small exponents need lambda much closer to the
    boundary before a vanishing estimate clears the inconclusive band.
    """

    seed: int = 20250809
    atom_count: int = 1_000_000
    kernel_directions: int = 16
    kernel_depth: int = 12
    kernel_depth_small_p: int = 19
    kernel_subsample: int = 4
    eps_kernel: float = 0.05
    eps_density: float = 0.05
    delta_levelset: float = 0.1
    eps_window: float = 0.05
    inconclusive_band: float = 10.0
    density_bins: int = 64
    circle_tol: float = 1e-9
    levelset_levels: tuple[float, ...] = (0.01, 0.0316, 0.1, 0.3162, 1.0)
    levelset_eta: tuple[float, ...] = (0.5,)
    levelset_depth: int = 10
    levelset_angles: int = 8
    levelset_samples: int = 4096
    window_angles: int = 16
    window_depth: int = 10

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SymbolArtifacts:
    """Per-symbol state shared across exponents: one pullback measure, one
    density histogram, one counting-function cache."""

    phi: SymbolSpec
    config: CriteriaConfig
    measure: EmpiricalBoundaryMeasure = field(init=False)
    density: DensityEstimate = field(init=False)
    tau_field: TauField = field(init=False)

    def __post_init__(self):
        sampler = SeededSampler(self.config.seed).spawn(1)
        self.measure = pullback_measure(self.phi, self.config.atom_count, sampler)
        self.density = rn_density_of_measure(
            self.measure, self.config.density_bins, self.config.circle_tol
        )
        self.tau_field = TauField(self.phi)


def _lambda_grid(p: float, cfg: CriteriaConfig) -> tuple[np.ndarray, np.ndarray]:
    depth = cfg.kernel_depth if p > 1.0 else cfg.kernel_depth_small_p
    ks = np.arange(0, depth + 1)
    s = 1.0 - 0.5**ks
    angles = 2.0 * np.pi * np.arange(cfg.kernel_directions) / cfg.kernel_directions
    return s, angles


def kernel_test(
    mu: EmpiricalBoundaryMeasure, p: float, cfg: CriteriaConfig
) -> tuple[Verdict, dict]:
    """Minimum over a boundary-approaching lambda grid of the kernel p-mass
    of the pullback measure."""
    s_vals, angles = _lambda_grid(p, cfg)
    stride = max(1, cfg.kernel_subsample)
    atoms = mu.atoms[::stride]
    wts = mu.weights[::stride]
    wts = wts / wts.sum()
    mod2 = np.abs(atoms) ** 2
    if p > 1.0:
        nodes = _kernel_nodes(float(s_vals.max()))
        norm_pow = peak_circle_mean(p, s_vals * _TOP_RADIUS, nodes)
        expo = -0.5 * p
    else:
        norm_pow = (1.0 - s_vals**2) ** (-p)  # divide out to apply (1-s^2)^p
        expo = -0.5 * (p + 1.0)
    values = np.empty((len(s_vals), len(angles)))
    for j, alpha in enumerate(angles):
        rot = np.exp(-1j * alpha)
        reproj = np.real(rot * atoms)
        for i, s in enumerate(s_vals):
            d2 = 1.0 + s * s * mod2 - 2.0 * s * reproj
            values[i, j] = float(np.dot(wts, d2**expo)) / norm_pow[i]
    estimate = float(values.min())
    verdict = _decide(
        estimate,
        cfg.eps_kernel,
        cfg.inconclusive_band,
        f"min kernel mass over {values.size} lambda values (depth {len(s_vals) - 1})",
    )
    curve = {
        "depths": [int(k) for k in range(len(s_vals))],
        "angles": [float(a) for a in angles],
        "min_per_depth": [float(v) for v in values.min(axis=1)],
    }
    return verdict, curve


def boundary_density_test(density: DensityEstimate, cfg: CriteriaConfig) -> tuple[Verdict, dict]:
    """Essential lower bound of the boundary pullback density (histogram min)."""
    verdict = _decide(
        density.ess_inf,
        cfg.eps_density,
        cfg.inconclusive_band,
        f"min bin density over {len(density.densities)} bins, "
        f"circle mass {density.mass_on_circle:.4f}, bin error {density.bin_error:.2e}",
    )
    curve = {
        "densities": [float(d) for d in density.densities],
        "mass_on_circle": density.mass_on_circle,
        "max_density": density.max_density,
    }
    return verdict, curve


def levelset_area_test(
    phi: SymbolSpec, tau_field: TauField, cfg: CriteriaConfig
) -> tuple[Verdict, dict]:
    """Best-over-levels worst-over-centers area fraction of the counting
    super-level set inside pseudo-hyperbolic disks."""
    base = SeededSampler(cfg.seed).spawn(2)
    centers: list[complex] = [0j]
    for k in range(1, cfg.levelset_depth + 1):
        r = 1.0 - 0.5**k
        for j in range(cfg.levelset_angles):
            centers.append(r * np.exp(2j * np.pi * j / cfg.levelset_angles))
    levels = np.asarray(cfg.levelset_levels, dtype=float)
    best_estimate = -1.0
    curves = []
    for ei, eta in enumerate(cfg.levelset_eta):
        fractions = np.empty((len(levels), len(centers)))
        for ai, a in enumerate(centers):
            disk = PseudoDisk(a, eta)
            pts = disk.uniform_samples(base.spawn(ei * 10000 + ai), cfg.levelset_samples)
            tv = tau_field.tau(pts)
            for ci, c in enumerate(levels):
                fractions[ci, ai] = float(np.mean(tv > c))
        mins = fractions.min(axis=1)
        est = float(mins.max())
        curves.append(
            {
                "eta": float(eta),
                "levels": [float(c) for c in levels],
                "min_fraction_per_level": [float(v) for v in mins],
            }
        )
        best_estimate = max(best_estimate, est)
    verdict = _decide(
        best_estimate,
        cfg.delta_levelset,
        cfg.inconclusive_band,
        f"max over {len(levels)} levels of min fraction over {len(centers)} centers",
    )
    return verdict, {"per_eta": curves}


def window_test(
    mu: EmpiricalBoundaryMeasure, cfg: CriteriaConfig
) -> tuple[Verdict, dict]:
    """Worst ratio of window mass to window depth over a boundary window grid."""
    ratios = np.empty((cfg.window_angles, cfg.window_depth))
    for j in range(cfg.window_angles):
        zeta = np.exp(2j * np.pi * j / cfg.window_angles)
        for k in range(1, cfg.window_depth + 1):
            h = 0.5**k
            ratios[j, k - 1] = measure_of_window(mu, CarlesonWindow(zeta, h)) / h
    estimate = float(ratios.min())
    verdict = _decide(
        estimate,
        cfg.eps_window,
        cfg.inconclusive_band,
        f"min mass/h over {ratios.size} windows (depth {cfg.window_depth})",
    )
    curve = {"min_per_depth": [float(v) for v in ratios.min(axis=0)]}
    return verdict, curve


@dataclass(frozen=True)
class ClosedRangeReport:
    """All four criterion verdicts for one (symbol, exponent) pair."""

    tag: str
    symbol: str
    p: float
    verdict_kernel: Verdict
    verdict_density: Verdict
    verdict_levelset: Verdict
    verdict_window: Verdict
    consistent: bool
    curves: dict
    config: dict

    def verdicts(self) -> dict[str, Verdict]:
        return {
            "kernel": self.verdict_kernel,
            "boundary_density": self.verdict_density,
            "levelset_area": self.verdict_levelset,
            "window": self.verdict_window,
        }

    def confident_states(self) -> list[str]:
        return [v.state for v in self.verdicts().values() if v.state != INCONCLUSIVE]

    def as_dict(self) -> dict:
        return {
            "schema_version": 1,
            "tag": self.tag,
            "symbol": self.symbol,
            "p": self.p,
            "verdicts": {k: v.as_dict() for k, v in self.verdicts().items()},
            "consistent": self.consistent,
            "curves": self.curves,
            "config": self.config,
        }


def analyze(
    phi: SymbolSpec,
    p: float,
    cfg: CriteriaConfig | None = None,
    artifacts: SymbolArtifacts | None = None,
    tag: str = "",
) -> ClosedRangeReport:
    """Run all four criterion estimators and assemble a consistency-checked report."""
    cfg = cfg or CriteriaConfig()
    art = artifacts if artifacts is not None else SymbolArtifacts(phi, cfg)
    vk, ck = kernel_test(art.measure, p, cfg)
    vd, cd = boundary_density_test(art.density, cfg)
    vl, cl = levelset_area_test(phi, art.tau_field, cfg)
    vw, cw = window_test(art.measure, cfg)
    states = {v.state for v in (vk, vd, vl, vw) if v.state != INCONCLUSIVE}
    return ClosedRangeReport(
        tag=tag or phi.variant,
        symbol=phi.to_record(),
        p=float(p),
        verdict_kernel=vk,
        verdict_density=vd,
        verdict_levelset=vl,
        verdict_window=vw,
        consistent=len(states) <= 1,
        curves={"kernel": ck, "boundary_density": cd, "levelset_area": cl, "window": cw},
        config=cfg.as_dict(),
    )


@dataclass(frozen=True)
class LevelsetEnergyReport:
    """Derivative-energy ratio curves for the super-level set, per center.

    I_full integrates the localized derivative weight times (1-|z|^2) over
    the disk (identically 1/2 for every center, which doubles as a quadrature
    check); I_level restricts to the super-level set; I_tau reweights by the
    counting ratio.
    """

    level: float
    centers: tuple[complex, ...]
    i_full: tuple[float, ...]
    i_level: tuple[float, ...]
    i_tau: tuple[float, ...]

    @property
    def level_ratios(self) -> tuple[float, ...]:
        return tuple(l / f for l, f in zip(self.i_level, self.i_full))

    @property
    def tau_ratios(self) -> tuple[float, ...]:
        return tuple(t / f for t, f in zip(self.i_tau, self.i_full))


def levelset_energy_probe(
    phi: SymbolSpec,
    c: float,
    a_values: Sequence[complex],
    q: DiskQuadrature | None = None,
    tau_field: TauField | None = None,
) -> LevelsetEnergyReport:
    """Energy comparison integrals for the localized derivative family.

    Requires phi(0) = 0 so the counting ratio is bounded (classical
    sub-mean envelope); the probe substitutes the disk automorphism sending 0
    to the center a, which turns the localized weight into the flat
    (1-|v|^2) and keeps deep centers fully resolved by the quadrature.
    """
    if abs(phi.value_at_zero()) > 1e-12:
        raise PreconditionError("levelset_energy_probe requires phi(0) = 0")
    if c <= 0:
        raise PreconditionError("level c must be positive")
    q = q or DiskQuadrature()
    tf = tau_field or TauField(phi)
    v, wts = q.nodes, q.weights
    flat = 1.0 - np.abs(v) ** 2
    i_full, i_level, i_tau = [], [], []
    for a in a_values:
        a = complex(a)
        if abs(a) >= 1:
            raise PreconditionError("probe centers must lie in the open disk")
        z = (v + a) / (1.0 + np.conj(a) * v)
        tv = tf.tau(z)
        mod2 = np.abs(z) ** 2
        ratio = np.where(mod2 < 1.0, log_recip_abs(z) / np.maximum(1.0 - mod2, 1e-300), 0.5)
        i_full.append(float(np.dot(wts, flat)))
        i_level.append(float(np.dot(wts, flat * (tv > c))))
        i_tau.append(float(np.dot(wts, flat * tv * ratio)))
    return LevelsetEnergyReport(
        level=float(c),
        centers=tuple(complex(a) for a in a_values),
        i_full=tuple(i_full),
        i_level=tuple(i_level),
        i_tau=tuple(i_tau),
    )


def default_ratio_family(p: float) -> list[TestFunction]:
    """Vanishing-at-zero test family: monomials, kernel multiples, an outer step.

    Everything vanishes at 0, matching the normalization under which the
    ratio bound witnesses a failure of closed range.
    """
    fams: list[TestFunction] = []
    for k in (1, 2, 4, 8, 16):
        fams.append(_monomial(k))
    for lam in (0.5, 0.7 * np.exp(1j * np.pi / 3), 0.9):
        base = kernel(KernelSpec(lam, p))
        fams.append(_times_z(base, f"z*kernel({lam:.3g})"))
    step = outer_step([0.0, 0.5 * np.pi], [1.0, 0.25])
    fams.append(_times_z(step, "z*outer(step)"))
    return fams


def _monomial(k: int) -> TestFunction:
    return TestFunction(
        f=lambda z, k=k: np.asarray(z, dtype=complex) ** k,
        df=lambda z, k=k: k * np.asarray(z, dtype=complex) ** (k - 1),
        zero_free=False,
        description=f"z^{k}",
    )


def _times_z(g: TestFunction, desc: str) -> TestFunction:
    return TestFunction(
        f=lambda z: np.asarray(z, dtype=complex) * g.f(z),
        df=lambda z: g.f(z) + np.asarray(z, dtype=complex) * g.df(z),
        zero_free=False,
        description=desc,
        max_radius=g.max_radius,
    )


def direct_norm_ratio_probe(
    phi: SymbolSpec,
    p: float,
    family: Sequence[TestFunction] | None = None,
) -> tuple[float, list[dict]]:
    """min over the family of the composition-to-original norm-power ratio.

    Each ratio upper-bounds the best closed-range constant; small minima
    witness failure, large minima are merely consistent with closed range.
    """
    fams = list(family) if family is not None else default_ratio_family(p)
    if not fams:
        raise PreconditionError("direct_norm_ratio_probe needs a nonempty family")
    rows = []
    best = np.inf
    for tf in fams:
        comp = TestFunction(
            f=lambda z, tf=tf: tf.f(np.asarray(phi.eval(z))),
            df=lambda z, tf=tf: tf.df(np.asarray(phi.eval(z))) * phi.deriv(z),
            zero_free=False,
            description=f"{tf.description} o phi",
            max_radius=tf.max_radius,
        )
        denom = norm_boundary(tf, p)
        if not denom > 1e-300:
            raise PreconditionError(f"degenerate norm for {tf.description}")
        ratio = norm_boundary(comp, p) / denom
        rows.append({"function": tf.description, "ratio": float(ratio)})
        best = min(best, ratio)
    return float(best), rows


def golden_corpus() -> list[tuple[str, SymbolSpec]]:
    """Reference symbols with well-understood closed-range behavior."""
    half_shift = affine(0.5, 0.5)
    square = polynomial_map((0.0, 0.0, 1.0))
    return [
        ("identity", identity()),
        ("square", square),
        ("cube", polynomial_map((0.0, 0.0, 0.0, 1.0))),
        ("automorphism", moebius(0.5)),
        ("automorphism-square", compose(moebius(0.5), square)),
        ("blaschke3", finite_blaschke([0.0, 0.3, -0.2 + 0.4j])),
        ("contraction-half", affine(0.5)),
        ("contraction-0.8", affine(0.8)),
        ("half-shift", half_shift),
        ("half-shift-square", compose(square, half_shift)),
    ]
