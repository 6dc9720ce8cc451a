"""Finite-size scaling of GGM sequences.

The model is ``g(n) = g_c + s * k * n**(-x)`` with ``k > 0``, ``x > 0`` and a
direction ``s`` fixed from the data: ``+1`` when the sequence ends below where
it starts (approach from above), ``-1`` otherwise.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateFit, InputError, InsufficientSamples

__all__ = [
    "LatticeFamily",
    "SearchMode",
    "ScalingSample",
    "ScalingFit",
    "GRADIENT_TOL",
    "MAX_ITERATIONS",
    "model",
    "fit_scaling",
    "extrapolate",
    "read_samples_csv",
    "write_samples_csv",
    "curve_points",
]

GRADIENT_TOL = 1e-12
MAX_ITERATIONS = 500
MIN_SAMPLES = 4


class LatticeFamily(str, Enum):
    PERFECT = "perfect"
    IMPERFECT = "imperfect"

    @classmethod
    def parse(cls, value: "LatticeFamily | str") -> "LatticeFamily":
        try:
            return cls(str(getattr(value, "value", value)).strip().lower())
        except ValueError:
            raise InputError(f"unknown lattice family {value!r}") from None


class SearchMode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    RESTRICTED = "restricted"

    @classmethod
    def parse(cls, value: "SearchMode | str") -> "SearchMode":
        try:
            return cls(str(getattr(value, "value", value)).strip().lower())
        except ValueError:
            raise InputError(f"unknown search mode {value!r}") from None


@dataclass(frozen=True)
class ScalingSample:
    """One point of a GGM sequence: total spin count and value."""

    n_total: int
    g: float
    family: LatticeFamily = LatticeFamily.PERFECT
    search: SearchMode = SearchMode.EXHAUSTIVE

    def __post_init__(self) -> None:
        if self.n_total <= 0 or self.n_total % 2:
            raise InputError(f"n_total must be positive and even, got {self.n_total}")
        if not (0.0 <= self.g < 1.0) or not math.isfinite(self.g):
            raise InputError(f"GGM value must lie in [0, 1), got {self.g}")
        object.__setattr__(self, "family", LatticeFamily.parse(self.family))
        object.__setattr__(self, "search", SearchMode.parse(self.search))


@dataclass(frozen=True)
class ScalingFit:
    g_c: float
    k: float
    x: float
    sign: int
    residual_rms: float
    covariance: np.ndarray = field(repr=False)
    residuals: tuple[float, ...] = ()
    n_values: tuple[int, ...] = ()
    iterations: int = 0
    gradient_norm: float = 0.0

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_dict(self) -> dict:
        return {
            "g_c": self.g_c,
            "k": self.k,
            "x": self.x,
            "sign": self.sign,
            "residual_rms": self.residual_rms,
            "covariance": self.covariance.tolist(),
            "stderr": self.stderr.tolist(),
            "n_total": list(self.n_values),
            "residuals": list(self.residuals),
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
        }


def model(n, g_c: float, k: float, x: float, sign: int):
    """Evaluate ``g_c + sign * k * n**(-x)``; ``n = inf`` gives ``g_c``."""
    n = np.asarray(n, dtype=float)
    return g_c + sign * k * np.power(n, -x)


def _jacobian(params: np.ndarray, n: np.ndarray, sign: int) -> np.ndarray:
    _, k, x = params
    p = np.power(n, -x)
    return np.column_stack([np.ones_like(n), sign * p, -sign * k * p * np.log(n)])


def _initial_guess(n: np.ndarray, g: np.ndarray, sign: int) -> np.ndarray:
    # asymptote from the two largest sizes, amplitude and exponent from a log-log line
    g_c = float(np.mean(g[-2:]))
    dev = sign * (g - g_c)
    ok = dev > 0
    if np.count_nonzero(ok) >= 2:
        slope, intercept = np.polyfit(np.log(n[ok]), np.log(dev[ok]), 1)
        x, k = -slope, math.exp(intercept)
    else:
        x, k = 1.0, abs(g[0] - g_c) * n[0]
    if not (x > 0 and math.isfinite(x)):
        x = 1.0
    return np.array([g_c, max(k, 1e-12), x])


def fit_scaling(samples: Sequence[ScalingSample], family: LatticeFamily | str | None = None) -> ScalingFit:
    """Least-squares fit of the power-law approach to an asymptote.

    Parameters
    ----------
    samples : sequence of ScalingSample
        At least four samples with distinct ``n_total``.
    family : optional
        Fit only this lattice family; by default all samples are fitted jointly.

    Raises
    ------
    InsufficientSamples
        Fewer than four usable samples or repeated sizes.
    DegenerateFit
        Constant data, a non-decaying exponent, a non-positive amplitude or no
        convergence within the iteration budget. ``partial`` carries what is
        known (for constant data ``g_c`` and ``k = 0``).
    """
    if family is not None:
        fam = LatticeFamily.parse(family)
        samples = [s for s in samples if s.family is fam]
    if len(samples) < MIN_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_SAMPLES} samples, got {len(samples)}")
    ordered = sorted(samples, key=lambda s: s.n_total)
    n = np.array([s.n_total for s in ordered], dtype=float)
    g = np.array([s.g for s in ordered], dtype=float)
    if np.unique(n).size != n.size:
        raise InsufficientSamples("sample sizes n_total must be distinct")
    if np.ptp(g) == 0.0:
        raise DegenerateFit("constant data has no finite-size correction",
                            partial={"g_c": float(g[0]), "k": 0.0, "x": None})
    sign = 1 if g[-1] < g[0] else -1

    def resid(p):
        return model(n, *p, sign) - g

    start = _initial_guess(n, g, sign)
    sol = least_squares(resid, start, jac=lambda p: _jacobian(p, n, sign), method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=MAX_ITERATIONS)
    params, iterations = sol.x, int(sol.nfev)
    # Gauss-Newton polish; MINPACK stops on relative criteria, the gradient target is absolute
    for _ in range(50):
        jac = _jacobian(params, n, sign)
        grad = jac.T @ resid(params)
        if np.linalg.norm(grad) < GRADIENT_TOL or iterations >= MAX_ITERATIONS:
            break
        step = np.linalg.lstsq(jac, -resid(params), rcond=None)[0]
        params = params + step
        iterations += 1
    jac = _jacobian(params, n, sign)
    r = resid(params)
    grad_norm = float(np.linalg.norm(jac.T @ r))
    g_c, k, x = (float(v) for v in params)
    partial = {"g_c": g_c, "k": k, "x": x, "sign": sign}
    if not np.all(np.isfinite(params)):
        raise DegenerateFit("fit diverged", partial=partial)
    if x <= 0 or k <= 0:
        raise DegenerateFit(f"fit has no decaying correction (k={k:.4g}, x={x:.4g})", partial=partial)
    if grad_norm >= GRADIENT_TOL:
        raise DegenerateFit(f"no convergence in {MAX_ITERATIONS} iterations (gradient {grad_norm:.3g})",
                            partial=partial)
    dof = max(n.size - 3, 1)
    sigma2 = float(r @ r) / dof
    cov = sigma2 * np.linalg.pinv(jac.T @ jac)
    return ScalingFit(
        g_c=g_c, k=k, x=x, sign=sign,
        residual_rms=float(np.sqrt(np.mean(r**2))),
        covariance=cov,
        residuals=tuple(float(v) for v in r),
        n_values=tuple(int(v) for v in n),
        iterations=iterations,
        gradient_norm=grad_norm,
    )


def extrapolate(fit: ScalingFit, n: float) -> float:
    """Fitted GGM at size ``n``; ``math.inf`` returns the asymptote."""
    if math.isinf(n):
        return fit.g_c
    return float(model(n, fit.g_c, fit.k, fit.x, fit.sign))


def curve_points(fit: ScalingFit, n_min: float, n_max: float, count: int = 64) -> list[tuple[float, float]]:
    """Fitted curve on a logarithmic grid, for plotting."""
    grid = np.geomspace(n_min, n_max, count)
    return [(float(v), extrapolate(fit, v)) for v in grid]


_VALUE_COLUMNS = ("g", "G")


def read_samples_csv(text: str) -> list[ScalingSample]:
    """Parse ``n_total,g,family,search`` rows (sweep output is accepted too).

    Lines starting with ``#`` are metadata and skipped. ``search`` is optional
    and defaults to exhaustive; rows whose value is ``NA`` are skipped.
    """
    body = "\n".join(line for line in text.splitlines() if line.strip() and not line.startswith("#"))
    reader = csv.DictReader(io.StringIO(body))
    if reader.fieldnames is None:
        raise InputError("CSV has no header")
    column = next((c for c in _VALUE_COLUMNS if c in reader.fieldnames), None)
    if "n_total" not in reader.fieldnames or column is None or "family" not in reader.fieldnames:
        raise InputError(f"CSV header must contain n_total, g and family; got {reader.fieldnames}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if row[column] in ("", "NA"):
            continue
        try:
            out.append(ScalingSample(
                n_total=int(row["n_total"]),
                g=float(row[column]),
                family=row["family"],
                search=row.get("search") or SearchMode.EXHAUSTIVE,
            ))
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed CSV row {lineno}: {exc}") from None
    return out


def write_samples_csv(samples: Iterable[ScalingSample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_total", "g", "family", "search"])
    for s in samples:
        writer.writerow([s.n_total, repr(float(s.g)), s.family.value, s.search.value])
    return buf.getvalue()
