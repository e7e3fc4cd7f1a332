"""
Single-point evaluation and parameter sweeps with deterministic CSV output.
"""

import csv
import io
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import COLUMNS
from .errors import MultistabilityWarning, OptoCoherenceError, StabilityError
from .gaussian import coherence_difference
from .model import solve_steady_state, stability_routh_hurwitz
from .steady import steady_covariance

COHERENCE_COLUMNS = ("nu1", "nu2", "c_mec", "c_opt", "c_tot", "delta_c", "mutual_info")


@dataclass(frozen=True, eq=False)
class PointResult:
    """Everything computed for one parameter set.

    ``verdict`` is ``"stable"``, ``"unstable"``, ``"marginal"`` or
    ``"error"``; ``report`` is None unless the point is stable.
    """

    params: object
    verdict: str
    steady: object = None
    stability: object = None
    solution: object = None
    report: object = None
    error: str = None

    def row(self):
        p = self.params
        row = dict(drive_e=p.drive_e, g0=p.g0, kappa=p.kappa, gamma_m=p.gamma_m, delta0=p.delta0, n_th=p.n_th)
        if self.steady is not None:
            s = self.steady
            row.update(q_s=s.q_s, alpha_s=s.alpha_s, delta_eff=s.delta_eff, g_eff=s.g_eff)
        row["stable"] = self.verdict if self.error is None else f"error: {self.error}"
        if self.report is not None:
            for col in COHERENCE_COLUMNS:
                row[col] = getattr(self.report, col)
        return row


def evaluate_point(params):
    """Working point, stability and coherence for one parameter set.

    Never raises for model failures: unstable or marginal points and
    numerical errors come back as a :class:`PointResult` verdict.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MultistabilityWarning)
        try:
            steady = solve_steady_state(params)
        except OptoCoherenceError as exc:
            return PointResult(params, "error", error=f"{type(exc).__name__}: {exc}")
        rh = stability_routh_hurwitz(params, steady)
        if rh.verdict != "stable":
            return PointResult(params, rh.verdict, steady, rh)
        try:
            _, sol = steady_covariance(params)
            report = coherence_difference(sol.gaussian_state())
        except StabilityError as exc:
            return PointResult(params, "unstable", steady, rh, error=f"{type(exc).__name__}: {exc}")
        except (OptoCoherenceError, ArithmeticError, ValueError) as exc:
            return PointResult(params, "error", steady, rh, error=f"{type(exc).__name__}: {exc}")
    return PointResult(params, "stable", steady, rh, sol, report)


def format_value(value):
    """12 significant digits, shortest form; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    text = format(float(value), ".12g")
    return "0" if text == "-0" else text


def rows_to_csv(rows, columns=COLUMNS):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in columns])
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class SweepResult:
    spec: object
    points: tuple

    def rows(self):
        return [p.row() for p in self.points]

    def to_csv(self):
        return rows_to_csv(self.rows(), self.spec.outputs)

    def counts(self):
        out = {}
        for p in self.points:
            out[p.verdict] = out.get(p.verdict, 0) + 1
        return out


def run_sweep(spec, jobs=1):
    """Evaluate every grid point of ``spec``.

    With ``jobs > 1`` points are spread over a process pool; results are
    collected in grid order, so the CSV does not depend on the schedule.
    """
    grid = spec.points()
    if jobs is None or jobs <= 1:
        results = [evaluate_point(p) for p in grid]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate_point, grid, chunksize=max(1, len(grid) // (4 * jobs))))
    return SweepResult(spec, tuple(results))
