"""Searching for large |S|: along the explicit family and over general scenarios."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import kernel
from .bound import check_bound, verify_identities
from .construction import FamilyParams, build_paper_scenario, family_S
from .engine import (
    GENDER_LABELS,
    RESULT_LABELS,
    TREATMENT_LABELS,
    MeasurementScenario,
    TwoOutcomeMeasurement,
    conditional_rates,
    simpson_statistics,
)
from .errors import InvalidEpsilon, InvariantViolation, UndefinedRate
from .linalg import Projector, StateVector

# engine S and closed-form S must agree to this on the family
CROSS_CHECK_TOL = 1e-10
# engine S vs kernel S on decoded scenarios (different rounding paths;
# conditioning events can be as small as 1e-9)
KERNEL_ENGINE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ScenarioParameterization:
    """A point in the general search space; see ``_pykernel`` for the layout."""

    dim: int
    ranks: tuple[int, int, int]
    angles: np.ndarray
    state_params: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        n = self.dim
        if not 2 <= n <= kernel.MAX_DIM:
            raise ValueError(f"dim must be in [2, {kernel.MAX_DIM}], got {n}")
        if any(not 0 <= r <= n for r in self.ranks) or len(self.ranks) != 3:
            raise ValueError(f"ranks must be three integers in [0, {n}], got {self.ranks}")
        angles = np.array(self.angles, dtype=np.float64)
        state = np.array(self.state_params, dtype=np.float64)
        if angles.shape != (kernel.n_params(n, self.ranks) - 2 * (n - 1),) or state.shape != (2 * (n - 1),):
            raise ValueError("parameter arrays have the wrong length")
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(state))):
            raise ValueError("parameters must be finite")
        angles.setflags(write=False)
        state.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "state_params", state)

    @classmethod
    def from_vector(cls, dim: int, ranks, x) -> ScenarioParameterization:
        x = np.asarray(x, dtype=np.float64)
        cut = x.shape[0] - 2 * (dim - 1)
        return cls(dim, tuple(ranks), x[:cut], x[cut:])

    @classmethod
    def random(cls, dim: int, ranks, rng: np.random.Generator) -> ScenarioParameterization:
        return cls.from_vector(dim, ranks, rng.uniform(0.0, 2 * math.pi, kernel.n_params(dim, ranks)))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.angles, self.state_params])

    def decode(self) -> MeasurementScenario:
        frames, psi = kernel.decode(self.vector, self.dim, self.ranks)
        labels = (GENDER_LABELS, TREATMENT_LABELS, RESULT_LABELS)
        ms = [
            TwoOutcomeMeasurement.from_projector(lab, Projector(q @ q.conj().T))
            for lab, q in zip(labels, frames)
        ]
        return MeasurementScenario(StateVector(psi), *ms)


def default_ranks(dim: int) -> tuple[int, int, int]:
    half = max(1, dim // 2)
    return (half, 1, half)


@dataclass
class OptimizationReport:
    best_s: float
    best_params: Union[FamilyParams, ScenarioParameterization, None]
    evaluations: int
    seed: Optional[int]
    trace: list = field(default_factory=list)
    mode: str = "general"
    restarts: int = 1
    max_abs_s_seen: float = 0.0
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.best_s < 2.0 or not self.max_abs_s_seen < 2.0:
            raise InvariantViolation(
                f"optimizer reached |S| >= 2 (best {self.best_s!r}, max seen {self.max_abs_s_seen!r})"
            )


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    s: float
    reference: float  # 2 - 2 epsilon
    margin: float  # 2 - S


def curve_params(curve: str, epsilon: float) -> FamilyParams:
    curve = curve.lower()
    if curve == "q1":
        return FamilyParams.q1(epsilon)
    if curve == "q2":
        return FamilyParams.q2(epsilon)
    raise ValueError(f"unknown curve {curve!r}; expected q1 or q2")


def engine_S(scenario: MeasurementScenario) -> float:
    return simpson_statistics(conditional_rates(scenario)).s


def sweep_family(eps_values: Sequence[float], curve: str = "q2") -> list[SweepRow]:
    """S along the Q1 (p=1, q=eps) or Q2 (p=eps, q=eps^2) curve, cross-checked against the closed form."""
    rows = []
    for eps in eps_values:
        eps = float(eps)
        if not 0.0 < eps <= 1.0:
            raise InvalidEpsilon(f"epsilon must lie in (0, 1], got {eps!r}")
        params = curve_params(curve, eps)
        s = engine_S(build_paper_scenario(params))
        closed = family_S(params)
        if abs(s - closed) > CROSS_CHECK_TOL:
            raise InvariantViolation(f"engine S {s!r} != closed form {closed!r} at epsilon={eps!r}")
        rows.append(SweepRow(eps, s, 2.0 - 2.0 * eps, 2.0 - s))
    return rows


def _compass(f, x0, lo, hi, step, min_step, max_evals):
    """Maximize f on the box [lo, hi] by compass search; returns (x, fx, evals)."""
    x = np.array(x0, dtype=float)
    fx = f(x)
    evals = 1
    while step >= min_step and evals < max_evals:
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                y = x.copy()
                y[i] = min(hi[i], max(lo[i], y[i] + sign * step))
                if np.array_equal(y, x):
                    continue
                fy = f(y)
                evals += 1
                if fy > fx:
                    x, fx, improved = y, fy, True
        if not improved:
            step /= 2.0
    return x, fx, evals


def optimize_family(
    floor: float = 1e-6,
    curve: Optional[str] = "q2",
    grid: int = 100,
    method: str = "grid",
) -> OptimizationReport:
    """Maximize S over the family on [floor, 1]^2 (or along q = p^2 when ``curve="q2"``).

    ``method="grid"`` evaluates a geometric grid; ``"descent"`` adds a compass
    search in log coordinates started from the best grid point.
    """
    if not 0.0 < floor <= 1.0:
        raise ValueError(f"floor must lie in (0, 1], got {floor!r}")
    if method not in ("grid", "descent"):
        raise ValueError(f"unknown method {method!r}")
    axis = np.geomspace(floor, 1.0, grid) if grid > 1 else np.array([floor])
    on_curve = curve is not None and curve.lower() == "q2"
    if curve is not None and not on_curve:
        raise ValueError(f"unsupported curve {curve!r}; use 'q2' or None")

    def params_of(z):
        if on_curve:
            p = float(z[0])
            return FamilyParams(p, p * p)
        return FamilyParams(float(z[0]), float(z[1]))

    candidates = [(p,) for p in axis] if on_curve else [(p, q) for p in axis for q in axis]
    best_z, best = None, -math.inf
    trace = []
    for i, z in enumerate(candidates):
        s = family_S(params_of(z))
        if s > best:
            best, best_z = s, z
            trace.append((i + 1, best))
    evals = len(candidates)

    if method == "descent":
        lo = np.full(len(best_z), math.log(floor))
        hi = np.zeros(len(best_z))
        z, s, extra = _compass(
            lambda lz: family_S(params_of(np.exp(lz))),
            np.log(best_z), lo, hi, step=0.5, min_step=1e-6, max_evals=10_000,
        )
        evals += extra
        if s > best:
            best, best_z = s, tuple(np.exp(z))
            trace.append((evals, best))

    params = params_of(best_z)
    s_engine = engine_S(build_paper_scenario(params))
    if abs(s_engine - best) > CROSS_CHECK_TOL:
        raise InvariantViolation(f"engine S {s_engine!r} != closed form {best!r} at {params}")
    return OptimizationReport(
        best_s=best,
        best_params=params,
        evaluations=evals,
        seed=None,
        trace=trace,
        mode="family",
        max_abs_s_seen=abs(best),
        config={"floor": floor, "curve": curve, "grid": grid, "method": method},
    )


def _validate(param: ScenarioParameterization, s_kernel: float) -> None:
    """Decode-then-validate: invariants, engine agreement, bound and proof identities."""
    sc = param.decode()
    try:
        verdict = check_bound(sc)
    except UndefinedRate:
        return
    if abs(verdict.s - s_kernel) > KERNEL_ENGINE_TOL:
        raise InvariantViolation(f"kernel S {s_kernel!r} disagrees with engine S {verdict.s!r}")
    if not verdict.holds:
        raise InvariantViolation(f"bound violated: {verdict}")
    if not verify_identities(sc).ok:
        raise InvariantViolation("proof identities failed on a decoded scenario")


def optimize_general(
    dim: int,
    ranks: Optional[Sequence[int]] = None,
    seed: int = 0,
    restarts: int = 16,
    iters: int = 2000,
    step: float = 0.5,
    workers: int = 1,
    check: str = "sampled",
    backend: Optional[str] = None,
) -> OptimizationReport:
    """Nelder-Mead from ``restarts`` seeded random starts, maximizing |S|.

    ``check="sampled"`` decodes and fully validates each restart's best point;
    ``check="all"`` validates every evaluated point (pure-Python backend,
    slow, same search path). Restarts may run on ``workers`` threads; the
    result does not depend on scheduling.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if check not in ("sampled", "all"):
        raise ValueError(f"unknown check mode {check!r}")
    ranks = tuple(ranks) if ranks is not None else default_ranks(dim)
    ScenarioParameterization.from_vector(dim, ranks, np.zeros(kernel.n_params(dim, ranks)))
    k = kernel.get("python" if check == "all" else backend)
    rng = np.random.default_rng(seed)
    starts = [rng.uniform(0.0, 2 * math.pi, kernel.n_params(dim, ranks)) for _ in range(restarts)]

    callback = None
    if check == "all":
        def callback(x, s):
            if s is not None:
                _validate(ScenarioParameterization.from_vector(dim, ranks, x), s)

    def run(x0):
        return k.search(x0, dim, ranks, iters, step=step, callback=callback)

    if workers > 1 and check != "all":
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(x0) for x0 in starts]

    best_i, best_abs, evals, max_seen = None, -math.inf, 0, 0.0
    trace = []
    for i, (x, s, n_eval, _, seen) in enumerate(results):
        evals += n_eval
        max_seen = max(max_seen, seen)
        if not math.isnan(s):
            _validate(ScenarioParameterization.from_vector(dim, ranks, x), s)
            if abs(s) > best_abs:
                best_i, best_abs = i, abs(s)
        trace.append((evals, best_abs if best_i is not None else math.nan))

    best_params = None
    if best_i is not None:
        best_params = ScenarioParameterization.from_vector(dim, ranks, results[best_i][0])
    else:
        best_abs = math.nan
    return OptimizationReport(
        best_s=best_abs,
        best_params=best_params,
        evaluations=evals,
        seed=seed,
        trace=trace,
        mode="general",
        restarts=restarts,
        max_abs_s_seen=max_seen,
        config={
            "dim": dim, "ranks": ranks, "restarts": restarts, "iters": iters,
            "step": step, "backend": k.BACKEND, "check": check,
        },
    )
