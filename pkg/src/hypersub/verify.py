"""Executable forms of the comparison inequalities, with fuzz harnesses.

Margins are always reported as RHS - LHS, so a nonnegative margin certifies
the inequality for that sample. Checks are deterministic given a seed; sample
streams are chunked with per-chunk seeds so reports do not depend on how many
worker threads evaluate them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import ORIGIN, POINCARE_DISK, DiskPoint, Manifold, Tangent
from .oracles import (
    SubgradientOracle,
    ball_hinge_oracle,
    busemann_gradient,
    busemann_value,
    distance_oracle,
    two_busemann_oracle,
)
from .schedules import harmonic
from .solver import SolveConfig, run

DEFAULT_RADIUS_CAP = 3.0
MIN_SIDE = 1e-3
CHUNK = 2048


class DegenerateTriangle(ValueError):
    """A triangle side collapsed below the resolvable length."""


class HypothesisUnverified(Exception):
    """A key-theorem configuration failed its hypothesis check."""


def max_workers() -> int:
    """Worker cap for fuzz evaluation, from the HS_THREADS environment
    variable (default 1)."""
    raw = os.environ.get("HS_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"HS_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


# -- sampling -----------------------------------------------------------------


def sample_point(rng: np.random.Generator, cap: float = DEFAULT_RADIUS_CAP) -> DiskPoint:
    """Point with hyperbolic-area-uniform radius in [0, cap] and uniform
    angle (Poincaré metric)."""
    u = rng.random()
    t = math.acosh(1.0 + u * (math.cosh(cap) - 1.0))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    r = math.tanh(0.5 * t)
    return DiskPoint(r * math.cos(theta), r * math.sin(theta))


@dataclass(frozen=True)
class TriangleSample:
    """Vertices with their pairwise side lengths; ``alpha`` is the angle at
    ``p``, opposite side ``a``."""

    p: DiskPoint
    q: DiskPoint
    r: DiskPoint
    a: float
    b: float
    c: float
    alpha: float

    @classmethod
    def from_points(
        cls, m: Manifold, p: DiskPoint, q: DiskPoint, r: DiskPoint
    ) -> "TriangleSample":
        a = m.distance(q, r)
        b = m.distance(p, r)
        c = m.distance(p, q)
        if min(a, b, c) < 1e-12:
            raise DegenerateTriangle(f"side lengths ({a}, {b}, {c})")
        alpha = m.angle(m.log(p, q), m.log(p, r))
        return cls(p, q, r, a, b, c, alpha)


def sample_triangle(
    rng: np.random.Generator,
    cap: float = DEFAULT_RADIUS_CAP,
    min_side: float = MIN_SIDE,
) -> TriangleSample:
    """Nondegenerate Poincaré-disk triangle with all sides >= min_side.

    The radius cap bounds cosh(b)cosh(c) and with it the floating-point noise
    floor of the margin evaluation; the default keeps that floor around 1e-11,
    comfortably inside the 1e-9 certification tolerance.
    """
    while True:
        p = sample_point(rng, cap)
        q = sample_point(rng, cap)
        r = sample_point(rng, cap)
        try:
            tri = TriangleSample.from_points(POINCARE_DISK, p, q, r)
        except DegenerateTriangle:
            continue
        if min(tri.a, tri.b, tri.c) >= min_side:
            return tri


# -- law of cosines -------------------------------------------------------------


def law_of_cosines_margin(kappa: float, tri: TriangleSample) -> float:
    """RHS - LHS of cosh(ka) <= cosh(kb)cosh(kc) - sinh(kb)sinh(kc)cos(alpha).

    Nonnegative when the triangle's manifold has curvature >= -kappa^2, and
    nonpositive when the curvature is <= -kappa^2; zero (to rounding) at the
    true constant curvature.
    """
    if not kappa > 0.0:
        raise ValueError("comparison constant must be positive")
    if min(tri.a, tri.b, tri.c) < 1e-12:
        raise DegenerateTriangle(f"side lengths ({tri.a}, {tri.b}, {tri.c})")
    kb = kappa * tri.b
    kc = kappa * tri.c
    rhs = math.cosh(kb) * math.cosh(kc) - math.sinh(kb) * math.sinh(kc) * math.cos(tri.alpha)
    return rhs - math.cosh(kappa * tri.a)


# -- key contraction inequality ---------------------------------------------------


@dataclass(frozen=True)
class KeyConfig:
    """One configuration of the contraction inequality.

    The hypotheses are that f stays strictly below f(x) on the closed ball
    B[xbar, delta] and that d(x, xbar) >= 2 delta; the step z = exp_x(lam s)
    with s the normalized negated subgradient then satisfies the cosh bound.
    """

    manifold: Manifold
    oracle: SubgradientOracle
    x: DiskPoint
    xbar: DiskPoint
    delta: float
    lam: float

    def __post_init__(self) -> None:
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")


def _ball_net(
    m: Manifold, center: DiskPoint, radius: float, n: int, rng: np.random.Generator
) -> list[DiskPoint]:
    # Area-uniform net of the closed ball, plus the center itself.
    pts = [center]
    ch = math.cosh(m.kappa * radius)
    for _ in range(n - 1):
        t = math.acosh(1.0 + rng.random() * (ch - 1.0)) / m.kappa
        theta = rng.uniform(0.0, 2.0 * math.pi)
        direction = complex(math.cos(theta), math.sin(theta))
        v = Tangent.from_complex(center, direction)
        pts.append(m.exp(center, v.scaled(t / m.norm(v))))
    return pts


def key_theorem_margin(
    cfg: KeyConfig,
    analytic_sup: float | None = None,
    net_points: int = 1000,
    net_rng: np.random.Generator | None = None,
) -> float:
    """Margin of the contraction inequality for one verified configuration.

    The ball hypothesis is certified either analytically (the caller supplies
    sup f over B[xbar, delta]) or by a finite net, which is necessary but not
    sufficient; HypothesisUnverified is raised when the check fails.
    """
    m = cfg.manifold
    fx, g = cfg.oracle.evaluate(m, cfg.x)
    d_xbar = m.distance(cfg.x, cfg.xbar)
    if d_xbar < 2.0 * cfg.delta * (1.0 - 1e-12):
        raise HypothesisUnverified(f"d(x, xbar) = {d_xbar} < 2 delta = {2 * cfg.delta}")
    if analytic_sup is not None:
        if not analytic_sup < fx:
            raise HypothesisUnverified(f"sup f on the ball = {analytic_sup} >= f(x) = {fx}")
    else:
        rng = net_rng if net_rng is not None else np.random.default_rng(0)
        for u in _ball_net(m, cfg.xbar, cfg.delta, net_points, rng):
            if not cfg.oracle.value(m, u) < fx:
                raise HypothesisUnverified(f"f({u}) >= f(x) on the sampled net")
    gn = m.norm(g)
    if gn == 0.0:
        raise HypothesisUnverified("zero subgradient: x is already optimal")
    s = g.scaled(-cfg.lam / gn)
    z = m.exp(cfg.x, s)
    k = m.kappa
    d_zx = m.distance(cfg.x, z)
    d_zxbar = m.distance(z, cfg.xbar)
    rhs = math.cosh(k * d_xbar) * math.cosh(k * d_zx) - math.sinh(k * d_zx) * math.sinh(
        0.5 * k * cfg.delta
    )
    return rhs - math.cosh(k * d_zxbar)


def per_step_margins(
    kappa: float, d_k: float, d_k1: float, lam_k: float, delta: float
) -> tuple[float, float]:
    """Margins of the two per-step forms of the contraction inequality.

    The second is the first divided by sinh(kappa * lam_k) via the half-angle
    identity, so the pair must agree up to that exact factor.
    """
    ck = math.cosh(kappa * d_k)
    sl = math.sinh(kappa * lam_k)
    shd = math.sinh(0.5 * kappa * delta)
    m1 = ck * math.cosh(kappa * lam_k) - sl * shd - math.cosh(kappa * d_k1)
    m2 = ck * math.tanh(0.5 * kappa * lam_k) - shd - (math.cosh(kappa * d_k1) - ck) / sl
    return m1, m2


@dataclass(frozen=True)
class PerStepSample:
    k: int
    d_k: float
    d_k1: float
    lam: float
    delta: float


def harvest_two_busemann_steps(
    steps: int = 2000,
    x0: DiskPoint | None = None,
    c: float = 1.0,
    min_dist: float = 1e-8,
) -> list[PerStepSample]:
    """Per-step quantities from a two-Busemann run started on the y-axis.

    With xbar at the origin and delta = d_k / 2, the ball hypothesis holds in
    closed form: sup f over B[0, delta] is log1p(sinh^2 delta), strictly below
    f(x^k) = log1p(sinh^2 d_k) whenever d_k > 0. Steps too close to the origin
    are skipped (delta would vanish).
    """
    m = POINCARE_DISK
    oracle = two_busemann_oracle()
    cfg = SolveConfig(
        manifold=m,
        oracle=oracle,
        schedule=harmonic(c),
        x0=x0 if x0 is not None else DiskPoint(0.0, 0.9),
        max_iters=steps,
    )
    trace = run(cfg)
    out: list[PerStepSample] = []
    for prev, nxt in zip(trace.records, trace.records[1:]):
        d_k = m.distance(prev.point, ORIGIN)
        if d_k <= min_dist:
            continue
        delta = 0.5 * d_k
        if not math.log1p(math.sinh(delta) ** 2) < prev.f_value:
            continue
        out.append(
            PerStepSample(
                k=prev.k,
                d_k=d_k,
                d_k1=m.distance(nxt.point, ORIGIN),
                lam=m.distance(prev.point, nxt.point),
                delta=delta,
            )
        )
    return out


# -- sublevel-set boundedness ------------------------------------------------------


@dataclass(frozen=True)
class RayWitness:
    direction: complex
    witness_radius: float | None  # None when f stayed <= a out to the cap


def sublevel_boundedness_check(
    m: Manifold,
    oracle: SubgradientOracle,
    a: float,
    center: DiskPoint | None = None,
    n_rays: int = 64,
    r_max: float = 50.0,
    step: float = 0.25,
    refine_tol: float = 1e-6,
    seed: int = 0,
) -> tuple["InequalityReport", list[RayWitness]]:
    """Certify along rays from a solution point that f eventually exceeds ``a``.

    Each ray either yields a witness radius (refined to ``refine_tol``) or is
    flagged; flagged rays count as violations and indicate an unbounded
    sublevel set, i.e. the compactness hypothesis fails in that direction.
    The report's worst_margin is the largest witness radius, an empirical
    bound on the sublevel set.
    """
    if center is None:
        sset = oracle.solution_set
        if sset.kind in ("single-point", "closed-ball"):
            center = sset.point
        elif sset.kind == "x-axis":
            center = ORIGIN
        else:
            raise ValueError("oracle has no canonical solution point; pass center")

    def f_at(direction: complex, radius: float) -> float:
        v = Tangent.from_complex(center, direction)
        return oracle.value(m, m.exp(center, v.scaled(radius / m.norm(v))))

    witnesses: list[RayWitness] = []
    for j in range(n_rays):
        theta = 2.0 * math.pi * j / n_rays
        direction = complex(math.cos(theta), math.sin(theta))
        lo = 0.0
        found = None
        r = step
        while r <= r_max + 1e-9:
            if f_at(direction, r) > a:
                found = r
                break
            lo = r
            r += step
        if found is None:
            witnesses.append(RayWitness(direction, None))
            continue
        hi = found
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if f_at(direction, mid) > a:
                hi = mid
            else:
                lo = mid
        witnesses.append(RayWitness(direction, hi))

    radii = [w.witness_radius for w in witnesses if w.witness_radius is not None]
    report = InequalityReport(
        check=f"sublevel[{oracle.name},a={a!r}]",
        n=n_rays,
        violations=sum(1 for w in witnesses if w.witness_radius is None),
        worst_margin=max(radii) if radii else math.inf,
        tolerance=refine_tol,
        seed=seed,
        hypothesis_mode="rays",
        histogram=_histogram(radii),
    )
    return report, witnesses


# -- fuzz harness --------------------------------------------------------------------


def _histogram(values: Sequence[float], bins: int = 20) -> dict:
    if not len(values):
        return {"edges": [], "counts": []}
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


@dataclass(frozen=True)
class InequalityReport:
    check: str
    n: int
    violations: int
    worst_margin: float
    tolerance: float
    seed: int
    hypothesis_mode: str | None
    histogram: dict

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "hypothesis_mode": self.hypothesis_mode,
            "histogram": self.histogram,
        }


def fuzz(
    sample_margin: Callable[[np.random.Generator], float],
    n: int,
    seed: int,
    tolerance: float,
    check: str,
    two_sided: bool = False,
    hypothesis_mode: str | None = None,
    workers: int | None = None,
) -> InequalityReport:
    """Evaluate a margin sampler n times and aggregate into a report.

    A one-sided check counts margin < -tolerance as a violation and reports
    the smallest margin; a two-sided check counts |margin| > tolerance and
    reports the largest magnitude. Chunk c of the stream draws from
    default_rng((seed, c)), so the report is identical for any worker count.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if workers is None:
        workers = max_workers()
    chunks = [(c, min(CHUNK, n - c * CHUNK)) for c in range((n + CHUNK - 1) // CHUNK)]

    def eval_chunk(spec: tuple[int, int]) -> list[float]:
        index, size = spec
        rng = np.random.default_rng((seed, index))
        return [sample_margin(rng) for _ in range(size)]

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(eval_chunk, chunks))
    else:
        parts = [eval_chunk(c) for c in chunks]
    margins = [m for part in parts for m in part]

    if two_sided:
        violations = sum(1 for m in margins if abs(m) > tolerance)
        worst = max(abs(m) for m in margins)
    else:
        violations = sum(1 for m in margins if m < -tolerance)
        worst = min(margins)
    return InequalityReport(
        check=check,
        n=n,
        violations=violations,
        worst_margin=worst,
        tolerance=tolerance,
        seed=seed,
        hypothesis_mode=hypothesis_mode,
        histogram=_histogram(margins),
    )


# -- bundled suites --------------------------------------------------------------------


def suite_law_of_cosines(
    n: int = 100_000,
    seed: int = 0,
    tol: float = 1e-9,
    cap: float = DEFAULT_RADIUS_CAP,
    workers: int | None = None,
) -> list[InequalityReport]:
    """Equality at the true curvature (kappa = 1) and the lower-bound
    direction at kappa = 2 on the same triangle distribution."""
    eq = fuzz(
        lambda rng: law_of_cosines_margin(1.0, sample_triangle(rng, cap)),
        n,
        seed,
        tol,
        "law-of-cosines-equality-k1",
        two_sided=True,
        workers=workers,
    )
    lb = fuzz(
        lambda rng: law_of_cosines_margin(2.0, sample_triangle(rng, cap)),
        n,
        seed + 1,
        1e-12,
        "law-of-cosines-lower-bound-k2",
        workers=workers,
    )
    return [eq, lb]


def _distance_key_margin(rng: np.random.Generator) -> float:
    m = POINCARE_DISK
    while True:
        anchor = sample_point(rng, 2.0)
        x = sample_point(rng, 2.5)
        d = m.distance(x, anchor)
        if d < 0.2:
            continue
        delta = 0.5 * d * rng.uniform(0.3, 1.0)
        lam = 10.0 ** rng.uniform(-3.0, 0.0)
        cfg = KeyConfig(m, distance_oracle(anchor), x, anchor, delta, lam)
        # sup of d(., anchor) over B[anchor, delta] is exactly delta.
        return key_theorem_margin(cfg, analytic_sup=delta)


def _two_busemann_key_config(rng: np.random.Generator) -> tuple[KeyConfig, float]:
    m = POINCARE_DISK
    oracle = two_busemann_oracle()
    while True:
        x = sample_point(rng, 2.5)
        t = m.distance(ORIGIN, x)
        if t < 0.1:
            continue
        sin_theta = abs(x.y) / math.hypot(x.x, x.y)
        reach = math.sinh(t) * sin_theta
        if reach <= 0.0:
            continue
        delta_max = min(math.asinh(reach), 0.5 * t)
        delta = 0.9 * delta_max * rng.uniform(0.2, 1.0)
        if delta < 1e-6:
            continue
        lam = 10.0 ** rng.uniform(-3.0, 0.0)
        cfg = KeyConfig(m, oracle, x, ORIGIN, delta, lam)
        # sup of f over B[0, delta] in closed form (polar expression).
        return cfg, math.log1p(math.sinh(delta) ** 2)


def _two_busemann_key_margin(rng: np.random.Generator) -> float:
    cfg, sup = _two_busemann_key_config(rng)
    return key_theorem_margin(cfg, analytic_sup=sup)


def _two_busemann_key_margin_net(rng: np.random.Generator) -> float:
    cfg, _ = _two_busemann_key_config(rng)
    return key_theorem_margin(cfg, net_points=300, net_rng=rng)


def suite_key_theorem(
    n: int = 10_000,
    seed: int = 0,
    tol: float = 1e-10,
    workers: int | None = None,
) -> list[InequalityReport]:
    """Contraction-inequality margins over verified configurations of the
    anchored-distance and two-Busemann objectives, plus a smaller net-checked
    batch exercising the finite-net hypothesis path."""
    half = n // 2
    rest = n - half
    net_n = max(50, min(200, n // 50))
    return [
        fuzz(
            _distance_key_margin,
            half,
            seed,
            tol,
            "key-theorem-distance",
            hypothesis_mode="analytic",
            workers=workers,
        ),
        fuzz(
            _two_busemann_key_margin,
            rest,
            seed + 1,
            tol,
            "key-theorem-two-busemann",
            hypothesis_mode="analytic",
            workers=workers,
        ),
        fuzz(
            _two_busemann_key_margin_net,
            net_n,
            seed + 2,
            tol,
            "key-theorem-two-busemann-net",
            hypothesis_mode="net-checked",
            workers=workers,
        ),
    ]


def suite_per_step(
    steps: int = 2000, seed: int = 0, tol: float = 1e-10
) -> list[InequalityReport]:
    """Per-step margins harvested from a two-Busemann run, plus the exact
    division consistency between the two forms."""
    samples = harvest_two_busemann_steps(steps=steps)
    if not samples:
        raise RuntimeError("harvest produced no hypothesis-verified steps")
    m1s, m2s, consistency = [], [], []
    for s in samples:
        m1, m2 = per_step_margins(1.0, s.d_k, s.d_k1, s.lam, s.delta)
        m1s.append(m1)
        m2s.append(m2)
        consistency.append(m2 - m1 / math.sinh(s.lam))

    def report(name: str, margins: list[float], two_sided: bool, tolerance: float, mode: str):
        if two_sided:
            violations = sum(1 for v in margins if abs(v) > tolerance)
            worst = max(abs(v) for v in margins)
        else:
            violations = sum(1 for v in margins if v < -tolerance)
            worst = min(margins)
        return InequalityReport(
            check=name,
            n=len(margins),
            violations=violations,
            worst_margin=worst,
            tolerance=tolerance,
            seed=seed,
            hypothesis_mode=mode,
            histogram=_histogram(margins),
        )

    return [
        report("per-step-cdelta", m1s, False, tol, "analytic"),
        report("per-step-cdelta-divided", m2s, False, tol, "analytic"),
        report("per-step-consistency", consistency, True, 1e-10, "analytic"),
    ]


def suite_sublevel(seed: int = 0, n_rays: int = 64) -> list[InequalityReport]:
    """Witness radii for the coercive bundled oracles (compact solution
    sets); both must certify on every ray."""
    m = POINCARE_DISK
    r1, _ = sublevel_boundedness_check(m, distance_oracle(ORIGIN), 1.0, n_rays=n_rays, seed=seed)
    r2, _ = sublevel_boundedness_check(
        m, ball_hinge_oracle(ORIGIN, 0.3), 1.0, n_rays=n_rays, seed=seed
    )
    return [r1, r2]


def _gradcheck_norm_margin(rng: np.random.Generator) -> float:
    p = sample_point(rng, 2.5)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    eta = complex(math.cos(theta), math.sin(theta))
    return POINCARE_DISK.norm(busemann_gradient(eta, p)) - 1.0


def _gradcheck_fd_margin(rng: np.random.Generator) -> float:
    m = POINCARE_DISK
    h = 1e-5
    p = sample_point(rng, 2.0)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    eta = complex(math.cos(theta), math.sin(theta))
    phi = rng.uniform(0.0, 2.0 * math.pi)
    s = Tangent.from_complex(p, complex(math.cos(phi), math.sin(phi)))
    s = s.scaled(1.0 / m.norm(s))
    fd = (busemann_value(eta, m.exp(p, s.scaled(h))) - busemann_value(eta, p)) / h
    return fd - m.inner(busemann_gradient(eta, p), s)


def suite_gradcheck(
    n: int = 1000,
    seed: int = 0,
    tol_norm: float = 1e-10,
    tol_fd: float = 1e-4,
    workers: int | None = None,
) -> list[InequalityReport]:
    """Unit gradient norm and geodesic finite-difference agreement for
    Busemann functions."""
    return [
        fuzz(
            _gradcheck_norm_margin,
            n,
            seed,
            tol_norm,
            "busemann-unit-gradient-norm",
            two_sided=True,
            workers=workers,
        ),
        fuzz(
            _gradcheck_fd_margin,
            n,
            seed + 1,
            tol_fd,
            "busemann-finite-difference",
            two_sided=True,
            workers=workers,
        ),
    ]


SUITES: dict[str, Callable[..., list[InequalityReport]]] = {
    "law-of-cosines": lambda n, seed, tol, workers: suite_law_of_cosines(
        n=n or 100_000, seed=seed, tol=tol or 1e-9, workers=workers
    ),
    "key-theorem": lambda n, seed, tol, workers: suite_key_theorem(
        n=n or 10_000, seed=seed, tol=tol or 1e-10, workers=workers
    ),
    "per-step": lambda n, seed, tol, workers: suite_per_step(
        steps=n or 2000, seed=seed, tol=tol or 1e-10
    ),
    "sublevel": lambda n, seed, tol, workers: suite_sublevel(seed=seed, n_rays=n or 64),
    "gradcheck": lambda n, seed, tol, workers: suite_gradcheck(
        n=n or 1000, seed=seed, workers=workers
    ),
}


def run_suite(
    name: str,
    n: int | None = None,
    seed: int = 0,
    tol: float | None = None,
    workers: int | None = None,
) -> list[InequalityReport]:
    """Run one named suite, or all of them."""
    if name == "all":
        reports: list[InequalityReport] = []
        for key in ("law-of-cosines", "key-theorem", "per-step", "sublevel", "gradcheck"):
            reports.extend(SUITES[key](n, seed, tol, workers))
        return reports
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](n, seed, tol, workers)
