"""Step-size sequences with declared analytic class.

The convergence statements need diminishing, non-summable steps; some also
need square-summability. Each built-in family carries the true flags of its
closed form, checked at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence


@dataclass(frozen=True)
class StepSchedule:
    """Rule k -> lambda_k > 0 plus its analytic class.

    ``spec`` is the canonical config string ("harmonic:c=1.0", ...), used to
    echo and rebuild schedules from run traces.
    """

    spec: str
    fn: Callable[[int], float]
    diminishing: bool
    nonsummable: bool
    square_summable: bool

    def step(self, k: int) -> float:
        if k < 0:
            raise ValueError("step index must be >= 0")
        lam = self.fn(k)
        if not lam > 0.0:
            raise ValueError(f"schedule produced nonpositive step {lam} at k={k}")
        return lam


def harmonic(c: float) -> StepSchedule:
    """lambda_k = c/(k+1): diminishing, non-summable, square-summable."""
    _check_scale(c)
    return StepSchedule(f"harmonic:c={c!r}", lambda k: c / (k + 1), True, True, True)


def power_law(c: float, alpha: float) -> StepSchedule:
    """lambda_k = c/(k+1)^alpha with alpha in (1/2, 1]: all three flags hold
    (square-summability needs exactly alpha > 1/2)."""
    _check_scale(c)
    if not 0.5 < alpha <= 1.0:
        raise ValueError(f"power-law exponent must lie in (0.5, 1], got {alpha}")
    return StepSchedule(
        f"powerlaw:c={c!r},alpha={alpha!r}",
        lambda k: c / (k + 1) ** alpha,
        True,
        True,
        True,
    )


def sqrt_harmonic(c: float) -> StepSchedule:
    """lambda_k = c/sqrt(k+1): diminishing and non-summable but not
    square-summable."""
    _check_scale(c)
    return StepSchedule(f"sqrt:c={c!r}", lambda k: c / math.sqrt(k + 1), True, True, False)


def log_inverse(c: float) -> StepSchedule:
    """lambda_k = c/log(k+2): diminishing, non-summable, not square-summable."""
    _check_scale(c)
    return StepSchedule(f"loginv:c={c!r}", lambda k: c / math.log(k + 2), True, True, False)


def table(values: Sequence[float]) -> StepSchedule:
    """Explicit step table; indices past the end repeat the last entry, so the
    tail is constant (non-summable, not diminishing)."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("step table must be nonempty")
    if any(not (v > 0.0 and math.isfinite(v)) for v in vals):
        raise ValueError("step table entries must be positive and finite")
    spec = "table:" + ",".join(repr(v) for v in vals)
    return StepSchedule(spec, lambda k: vals[min(k, len(vals) - 1)], False, True, False)


def _check_scale(c: float) -> None:
    if not (c > 0.0 and math.isfinite(c)):
        raise ValueError(f"schedule scale must be positive and finite, got {c}")


def parse_schedule(spec: str) -> StepSchedule:
    """Build a schedule from its config string.

    Syntax: ``harmonic:c=1.0``, ``powerlaw:c=1.0,alpha=0.75``, ``sqrt:c=0.5``,
    ``loginv:c=1.0``, ``table:0.5,0.4,0.3``.
    """
    name, _, body = spec.partition(":")
    name = name.strip()
    if name == "table":
        try:
            return table([float(v) for v in body.split(",") if v.strip()])
        except ValueError as exc:
            raise ValueError(f"bad step table {spec!r}: {exc}") from None
    params: dict[str, float] = {}
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise ValueError(f"malformed schedule parameter {item!r} in {spec!r}")
            key, value = item.split("=", 1)
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise ValueError(f"bad schedule parameter {item!r} in {spec!r}") from None
    builders: dict[str, Callable[[], StepSchedule]] = {
        "harmonic": lambda: harmonic(params.pop("c", 1.0)),
        "powerlaw": lambda: power_law(params.pop("c", 1.0), params.pop("alpha", 0.75)),
        "sqrt": lambda: sqrt_harmonic(params.pop("c", 1.0)),
        "loginv": lambda: log_inverse(params.pop("c", 1.0)),
    }
    if name not in builders:
        raise ValueError(f"unknown schedule family {name!r}")
    schedule = builders[name]()
    if params:
        raise ValueError(f"unexpected schedule parameters {sorted(params)} in {spec!r}")
    return schedule


def partial_sums(s: StepSchedule, n: int) -> tuple[float, float]:
    """Kahan-compensated (sum of lambda_k, sum of lambda_k^2) for k = 0..n."""
    if n < 0:
        raise ValueError("partial sum index must be >= 0")
    s1 = c1 = 0.0
    s2 = c2 = 0.0
    fn = s.fn
    for k in range(n + 1):
        lam = fn(k)
        y = lam - c1
        t = s1 + y
        c1 = (t - s1) - y
        s1 = t
        y = lam * lam - c2
        t = s2 + y
        c2 = (t - s2) - y
        s2 = t
    return s1, s2


def infer_flags(s: StepSchedule, n: int = 10**6, probe: int = 10**4) -> dict[str, bool]:
    """Advisory empirical classification from finite partial sums.

    Non-summability is undecidable from finitely many terms; the heuristics
    below are scale-aware (relative to lambda_0) and separate the built-in
    families at moderate parameters (power-law exponents >= 0.6). Near the
    alpha = 1/2 boundary no finite probe can tell the classes apart.

    * diminishing: lambda_n < 1e-3 * lambda_0;
    * non-summable: the tail sum over (probe, n] still exceeds lambda_0;
    * square-summable: the tail of the squares over (probe, n] is below
      lambda_0^2.
    """
    if n <= probe:
        raise ValueError("need n > probe")
    lam0 = s.step(0)
    head1, head2 = partial_sums(s, probe)
    full1, full2 = partial_sums(s, n)
    return {
        "diminishing": s.step(n) < 1e-3 * lam0,
        "nonsummable": (full1 - head1) > lam0,
        "square_summable": (full2 - head2) < lam0 * lam0,
    }
