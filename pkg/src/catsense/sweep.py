"""Parameter grids, figure presets, optimum search and oracle validation."""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import minimize_scalar

from catsense import __version__
from catsense.analytic import (
    ProtocolConfig,
    bias_point,
    pg_approx_damped,
    ramsey_pg_damped,
    ramsey_pg_ideal,
    snr,
)
from catsense.errors import NoInteriorMaximum
from catsense.oracle import run_damped_sequence, run_ideal_sequence

QUANTITIES = ("pg_exact", "pg_approx", "pg_paper_literal", "pg_oracle", "snr")
ORACLE_MAX_D_ENV = "CATSENSE_ORACLE_MAX_D"
DEFAULT_ORACLE_MAX_D = 100.0
VALIDATION_TOL = 1e-6


def oracle_max_d() -> float:
    return float(os.environ.get(ORACLE_MAX_D_ENV, DEFAULT_ORACLE_MAX_D))


@dataclass(frozen=True)
class Axis:
    """``count`` linearly spaced values on [lo, hi]."""

    lo: float
    hi: float
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("axis must have at least one point")
        if self.count == 1 and self.lo != self.hi:
            raise ValueError("single-point axis needs lo == hi")
        if self.hi < self.lo:
            raise ValueError(f"axis upper bound {self.hi} below lower bound {self.lo}")

    @classmethod
    def fixed(cls, value: float) -> "Axis":
        return cls(float(value), float(value), 1)

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``"min:max:count"`` or a single number."""
        parts = text.split(":")
        if len(parts) == 1:
            return cls.fixed(float(parts[0]))
        if len(parts) != 3:
            raise ValueError(f"range must be min:max:count, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]))

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    d_axis: Axis
    theta_axis: Axis = Axis.fixed(0.0)
    kappaT_axis: Axis = Axis.fixed(0.0)
    quantities: tuple[str, ...] = ("pg_exact",)
    bias_mode: bool = False
    title: str = ""

    def __post_init__(self):
        q = tuple(self.quantities)
        unknown = set(q) - set(QUANTITIES)
        if unknown:
            raise ValueError(f"unknown quantities: {sorted(unknown)}")
        object.__setattr__(self, "quantities", tuple(x for x in QUANTITIES if x in q))
        if self.d_axis.lo < 0:
            raise ValueError("D must be >= 0")
        if self.bias_mode and self.d_axis.lo <= 0:
            raise ValueError("bias mode needs D > 0")
        if self.kappaT_axis.lo < 0:
            raise ValueError("kappaT must be >= 0")
        if "pg_oracle" in q and self.d_axis.hi > oracle_max_d():
            raise ValueError(
                f"pg_oracle limited to D <= {oracle_max_d():g} (set {ORACLE_MAX_D_ENV} to raise)"
            )

    def varying_axes(self) -> tuple[str, ...]:
        axes = [("D", self.d_axis)]
        if not self.bias_mode:
            axes.append(("theta", self.theta_axis))
        axes.append(("kappaT", self.kappaT_axis))
        return tuple(name for name, ax in axes if ax.count > 1)

    def shape(self) -> tuple[int, ...]:
        counts = [self.d_axis.count]
        if not self.bias_mode:
            counts.append(self.theta_axis.count)
        counts.append(self.kappaT_axis.count)
        return tuple(counts)

    def points(self) -> list[tuple[float, float, float]]:
        """Grid points in row-major (D, theta, kappaT) order."""
        ds, ks = self.d_axis.values(), self.kappaT_axis.values()
        if self.bias_mode:
            return [(float(d), bias_point(d), float(k)) for d, k in product(ds, ks)]
        ths = self.theta_axis.values()
        return [(float(d), float(t), float(k)) for d, t, k in product(ds, ths, ks)]

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SweepRecord:
    D: float
    theta: float
    kappaT: float
    values: dict

    def get(self, name: str):
        return self.values.get(name)


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    records: tuple[SweepRecord, ...]
    metadata: dict = field(compare=False, default_factory=dict)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.spec.shape()

    def column(self, name: str) -> np.ndarray:
        if name in ("D", "theta", "kappaT"):
            return np.array([getattr(r, name) for r in self.records])
        return np.array([np.nan if r.get(name) is None else r.get(name) for r in self.records])


def evaluate_point(point: tuple[float, float, float], quantities: tuple[str, ...]) -> dict:
    D, theta, kappaT = point
    cfg = ProtocolConfig.from_angles(D=D, theta=theta, kappaT=kappaT)
    out = {}
    for q in quantities:
        if q == "pg_exact":
            out[q] = ramsey_pg_damped(cfg)
        elif q == "pg_approx":
            out[q] = pg_approx_damped(D, theta, kappaT)
        elif q == "pg_paper_literal":
            out[q] = ramsey_pg_ideal(cfg.alpha0, theta, mode="paper_literal") if kappaT == 0 else None
        elif q == "pg_oracle":
            out[q] = run_ideal_sequence(cfg.alpha0, theta) if kappaT == 0 else run_damped_sequence(cfg)
        elif q == "snr":
            out[q] = snr(cfg)
    for q, v in out.items():
        if q.startswith("pg") and v is not None and not -1e-12 <= v <= 1 + 1e-12:
            raise ValueError(f"{q} = {v!r} outside [0, 1] at D={D}, theta={theta}, kappaT={kappaT}")
    return out


def _evaluate_chunk(args):
    points, quantities = args
    return [evaluate_point(p, quantities) for p in points]


def sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every requested quantity on the grid.

    With ``workers > 1`` the grid is split into contiguous chunks evaluated in
    worker processes; results are reassembled in grid order.
    """
    points = spec.points()
    if workers > 1 and len(points) > 1:
        size = math.ceil(len(points) / workers)
        chunks = [(points[i : i + size], spec.quantities) for i in range(0, len(points), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = [v for chunk in pool.map(_evaluate_chunk, chunks) for v in chunk]
    else:
        values = [evaluate_point(p, spec.quantities) for p in points]
    records = tuple(SweepRecord(*p, v) for p, v in zip(points, values))
    meta = {
        "version": __version__,
        "spec_hash": spec.digest(),
        "validation_tol": VALIDATION_TOL,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    return SweepResult(spec, records, meta)


def snr_curve(d_axis: Axis, kappaT: float, workers: int = 1) -> SweepResult:
    spec = SweepSpec(d_axis, kappaT_axis=Axis.fixed(kappaT), quantities=("pg_exact", "snr"), bias_mode=True)
    return sweep(spec, workers)


# -- figure presets -----------------------------------------------------------
# Axis bounds are reconstructions of the figure domains; the figures carry no numbers.

FIGURE_PRESETS: dict[str, SweepSpec] = {
    "fig1a": SweepSpec(
        Axis(1.0, 100.0, 100), Axis(0.0, 0.2, 81), quantities=("pg_exact", "pg_approx"),
        title="Fig. 1a: P_g vs D and theta (kappaT = 0)",
    ),
    "fig1b": SweepSpec(
        Axis.fixed(50.0), Axis(0.0, 0.35, 351), quantities=("pg_exact", "pg_approx", "pg_paper_literal"),
        title="Fig. 1b: P_g vs theta, D = 50",
    ),
    "fig1c": SweepSpec(
        Axis(10.0, 200.0, 96), quantities=("pg_exact", "snr"), bias_mode=True,
        title="Fig. 1c: R vs D at theta0 = pi/(2D)",
    ),
    "fig2a": SweepSpec(
        Axis.fixed(50.0), Axis(0.0, 0.15, 76), Axis(0.0, 0.2, 41), quantities=("pg_exact", "pg_approx"),
        title="Fig. 2a: P_g vs theta and kappaT, D = 50",
    ),
    "fig2b": SweepSpec(
        Axis(10.0, 300.0, 59), kappaT_axis=Axis(0.0, 0.2, 41), quantities=("pg_exact", "snr"), bias_mode=True,
        title="Fig. 2b: R vs D and kappaT at theta0",
    ),
    "fig2c": SweepSpec(
        Axis(10.0, 300.0, 291), kappaT_axis=Axis.fixed(0.02), quantities=("pg_exact", "snr"), bias_mode=True,
        title="Fig. 2c: R vs D, kappaT = 0.02",
    ),
}

FIGURE_GROUPS = {
    "fig1": ("fig1a", "fig1b", "fig1c"),
    "fig2": ("fig2a", "fig2b", "fig2c"),
}


# -- optimum ------------------------------------------------------------------


@dataclass(frozen=True)
class OptimumReport:
    kappaT: float
    d_star: float
    r_star: float
    bracket: tuple[float, float]
    tolerance: float
    coarse_argmax: float


def _r_bias(D: float, kappaT: float) -> float:
    return snr(ProtocolConfig.from_angles(D=D, theta=bias_point(D), kappaT=kappaT))


def find_optimal_D(kappaT: float, d_range: Axis = Axis(20.0, 300.0, 281), xtol: float = 0.01) -> OptimumReport:
    """Maximize R(D) at the bias point: coarse grid, then bounded refinement."""
    ds = d_range.values()
    if ds.size < 3:
        raise ValueError("need at least three coarse grid points")
    rs = np.array([_r_bias(d, kappaT) for d in ds])
    i = int(np.argmax(rs))
    if i == 0 or i == ds.size - 1:
        raise NoInteriorMaximum(f"R(D) peaks at the edge D={ds[i]:g} of [{ds[0]:g}, {ds[-1]:g}]")
    lo, hi = float(ds[i - 1]), float(ds[i + 1])
    res = minimize_scalar(lambda d: -_r_bias(d, kappaT), bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    d_star = float(res.x)
    return OptimumReport(
        kappaT=kappaT,
        d_star=d_star,
        r_star=_r_bias(d_star, kappaT),
        bracket=(lo, hi),
        tolerance=xtol,
        coarse_argmax=float(ds[i]),
    )


# -- validation ---------------------------------------------------------------

CRITERION_GRID_D = (4.0, 10.0, 16.0, 25.0, 30.0)
CRITERION_GRID_KT = (0.0, 0.02, 0.1)


def criterion_thetas(D: float) -> tuple[float, ...]:
    return (0.0, 0.2 / D, math.pi / (2 * D), math.pi / D)


@dataclass(frozen=True)
class ValidationEntry:
    D: float
    theta: float
    kappaT: float
    analytic: float
    oracle: float

    @property
    def deviation(self) -> float:
        return abs(self.analytic - self.oracle)


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[ValidationEntry, ...]
    erratum: tuple[tuple[float, float, float, float], ...]  # D, theta, exact, paper_literal
    optimum: OptimumReport | None
    tolerance: float = VALIDATION_TOL

    @property
    def max_deviation(self) -> float:
        return max(e.deviation for e in self.entries)

    @property
    def mean_deviation(self) -> float:
        return sum(e.deviation for e in self.entries) / len(self.entries)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def render(self) -> str:
        lines = [
            f"catsense {__version__} oracle validation",
            f"{'D':>6} {'theta':>12} {'kappaT':>7} {'analytic':>20} {'oracle':>20} {'|diff|':>10}",
        ]
        for e in self.entries:
            lines.append(
                f"{e.D:6g} {e.theta:12.6g} {e.kappaT:7g} {e.analytic:20.15f} {e.oracle:20.15f} {e.deviation:10.2e}"
            )
        lines.append(
            f"max |diff| = {self.max_deviation:.3e}, mean = {self.mean_deviation:.3e}, "
            f"tolerance {self.tolerance:g}: {'PASS' if self.passed else 'FAIL'}"
        )
        lines.append("")
        lines.append("phase-form gap (loss-free): exact D sin(theta)/2 vs small-angle D theta/2")
        lines.append(f"{'D':>6} {'theta':>12} {'exact':>20} {'small-angle':>20} {'gap':>10}")
        for D, th, ex, lit in self.erratum:
            lines.append(f"{D:6g} {th:12.6g} {ex:20.15f} {lit:20.15f} {abs(ex - lit):10.2e}")
        if self.optimum is not None:
            o = self.optimum
            lines.append("")
            lines.append(
                f"optimum at kappaT={o.kappaT:g}: D* = {o.d_star:.4f}, R* = {o.r_star:.6f} "
                f"(exact closed form; quoted value 36.25 at D = 100; approximate model gives 100/e = {100 / math.e:.4f})"
            )
        return "\n".join(lines)


def validation_report(
    d_list=CRITERION_GRID_D,
    theta_list=None,
    kappaT_list=CRITERION_GRID_KT,
    include_optimum: bool = True,
    workers: int = 1,
) -> ValidationReport:
    """Compare closed-form P_g with the Fock oracle on a grid.

    ``theta_list=None`` uses the per-D angles (0, 0.2/D, pi/(2D), pi/D).
    """
    d_list, kappaT_list = list(d_list), list(kappaT_list)
    if not d_list or not kappaT_list or (theta_list is not None and not list(theta_list)):
        raise ValueError("validation grids must be nonempty")
    if max(d_list) > oracle_max_d():
        raise ValueError(f"oracle limited to D <= {oracle_max_d():g}")
    points = []
    for D in d_list:
        thetas = criterion_thetas(D) if theta_list is None else tuple(theta_list)
        points += [(float(D), float(t), float(k)) for t in thetas for k in kappaT_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_validate_point, points))
    else:
        results = [_validate_point(p) for p in points]
    entries = tuple(ValidationEntry(*p, a, o) for p, (a, o) in zip(points, results))
    erratum = []
    for D in d_list:
        thetas = criterion_thetas(D) if theta_list is None else tuple(theta_list)
        for t in thetas:
            a0 = math.sqrt(D)
            erratum.append((float(D), float(t), ramsey_pg_ideal(a0, t), ramsey_pg_ideal(a0, t, mode="paper_literal")))
    optimum = find_optimal_D(0.02) if include_optimum else None
    return ValidationReport(entries, tuple(erratum), optimum)


def _validate_point(point):
    cfg = ProtocolConfig.from_angles(D=point[0], theta=point[1], kappaT=point[2])
    return ramsey_pg_damped(cfg), run_damped_sequence(cfg)
