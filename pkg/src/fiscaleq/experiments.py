"""Parameter sweeps and policy-path comparisons."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .closed_form import employment_coefficients, solve_equilibrium
from .errors import EmptyGrid, FiscalEqError, InadmissibleDose, InternalInconsistency, TargetBelowBaseline
from .model import ScenarioConfig, ValidatedScenario, validate, violations
from .statics import OUTPUTS, POLICIES, analytic_jacobian, certify_theorems

AXES = ("g", "tau", "Lg", "w", "N", "m", "F", "alpha")
OUTPUT_CHOICES = ("p", "q", "L", "Pi", "welfare", "jacobian", "theorems")
JACOBIAN_COLUMNS = tuple(f"d{o}_d{p}" for o in OUTPUTS for p in POLICIES)
TARGET_RTOL = 1e-10


def fmt(x) -> str:
    """Text form used in every CSV cell: 17 significant digits for floats."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    axis: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...] = ("p", "q", "L", "Pi")

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        bad = [o for o in self.outputs if o not in OUTPUT_CHOICES]
        if bad:
            raise ValueError(f"unknown outputs {bad}; choose from {OUTPUT_CHOICES}")
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def inadmissible_points(self) -> list[tuple[int, list[str]]]:
        """``(index, violations)`` for every grid point that fails validation."""
        out = []
        for i, v in enumerate(self.grid):
            problems = violations(self.base.with_values(**{self.axis: v}))
            if problems:
                out.append((i, problems))
        return out

    def columns(self) -> list[str]:
        cols = [self.axis, "status"]
        for o in self.outputs:
            if o == "jacobian":
                cols.extend(JACOBIAN_COLUMNS)
            elif o == "theorems":
                cols.extend(("theorems_pass", "theorems_failed"))
            else:
                cols.append(o)
        return cols

    def as_dict(self) -> dict:
        return {"axis": self.axis, "grid": list(self.grid), "outputs": list(self.outputs)}


@dataclass
class SweepRow:
    index: int
    value: float
    status: str
    values: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def column(self, name: str) -> list:
        return [r.values.get(name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.spec.columns()
        writer.writerow(cols)
        for r in self.rows:
            cells = [fmt(r.value), r.status] + [fmt(r.values.get(c)) for c in cols[2:]]
            writer.writerow(cells)
        return buf.getvalue()

    def manifest(self) -> dict:
        return {
            "tool": "fiscaleq",
            "version": __version__,
            "scenario": self.spec.base.to_flat(),
            "spec": self.spec.as_dict(),
            "rows": [{"index": r.index, "value": r.value, "status": r.status} for r in self.rows],
        }

    def write(self, csv_path: str | Path, manifest_path: str | Path | None = None) -> Path:
        """Write the CSV and its JSON manifest; returns the manifest path."""
        csv_path = Path(csv_path)
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        manifest_path = Path(manifest_path) if manifest_path else csv_path.with_suffix(".manifest.json")
        manifest_path.write_text(json.dumps(self.manifest(), indent=2) + "\n", encoding="utf-8")
        return manifest_path


def _evaluate_point(spec: SweepSpec, index: int, value: float) -> SweepRow:
    try:
        s = validate(spec.base.with_values(**{spec.axis: value}))
        eq = solve_equilibrium(s)
        values = {}
        for o in spec.outputs:
            if o == "jacobian":
                values.update(analytic_jacobian(s).as_dict())
            elif o == "theorems":
                report = certify_theorems(s)
                values["theorems_pass"] = report.passed
                values["theorems_failed"] = len(report.failures)
            else:
                values[o] = getattr(eq, o)
        return SweepRow(index, value, "ok", values)
    except FiscalEqError as exc:
        return SweepRow(index, value, f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every grid point; failures are recorded per row.

    Rows come back in grid order whatever ``workers`` is.

    Raises:
        EmptyGrid: if the grid has no points.
    """
    if not spec.grid:
        raise EmptyGrid("sweep grid is empty")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda iv: _evaluate_point(spec, *iv), enumerate(spec.grid)))
    else:
        rows = [_evaluate_point(spec, i, v) for i, v in enumerate(spec.grid)]
    return SweepResult(spec, rows)


# ---------------------------------------------------------------------------
# Policy comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathOutcome:
    g: float
    Lg: float
    L: float
    p: float
    q: float
    Pi: float
    welfare: float


@dataclass(frozen=True)
class PolicyComparison:
    target_L: float
    baseline_L: float
    g_required: float
    Lg_required: float
    g_path: PathOutcome
    Lg_path: PathOutcome

    def as_dict(self) -> dict:
        return {
            "target_L": self.target_L,
            "baseline_L": self.baseline_L,
            "g_required": self.g_required,
            "Lg_required": self.Lg_required,
            "g_path": self.g_path.__dict__,
            "Lg_path": self.Lg_path.__dict__,
        }


def _outcome_at(base: ScenarioConfig, g: float, Lg: float, target_L: float) -> PathOutcome:
    try:
        s = validate(base.with_values(g=g, Lg=Lg))
    except FiscalEqError as exc:
        raise InadmissibleDose(f"dose g={g!r}, Lg={Lg!r} is inadmissible: {exc}") from exc
    eq = solve_equilibrium(s)
    S = eq.L + Lg
    if not S - s.alpha * g > 0:
        raise InadmissibleDose(f"L + Lg - alpha*g <= 0 at g={g!r}")
    if abs(eq.L - target_L) > TARGET_RTOL * max(abs(target_L), abs(eq.L)):
        raise InternalInconsistency(f"re-solved L={eq.L!r} misses target {target_L!r}")
    return PathOutcome(g=g, Lg=Lg, L=eq.L, p=eq.p, q=eq.q, Pi=eq.Pi, welfare=eq.welfare)


def compare_policies(base: ScenarioConfig | ValidatedScenario, target_L: float) -> PolicyComparison:
    """Doses of purchase alone and of public employment alone reaching ``target_L``.

    Private employment is affine in g and in Lg, so both doses are exact
    inversions; each is then re-solved and checked against the target.

    Raises:
        TargetBelowBaseline: if ``target_L`` is below employment at g = Lg = 0.
        InadmissibleDose: if a dose leads to an inadmissible scenario.
    """
    s = validate(base)
    config = s.config
    intercept, slope_g, slope_Lg = employment_coefficients(s)
    if target_L < intercept:
        raise TargetBelowBaseline(
            f"target L={target_L!r} is below the no-policy employment {intercept!r}")
    gap = target_L - intercept
    g_req = gap / slope_g
    Lg_req = gap / slope_Lg
    return PolicyComparison(
        target_L=target_L,
        baseline_L=intercept,
        g_required=g_req,
        Lg_required=Lg_req,
        g_path=_outcome_at(config, g_req, 0.0, target_L),
        Lg_path=_outcome_at(config, 0.0, Lg_req, target_L),
    )
