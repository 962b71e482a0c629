"""Tree functions with a prescribed decreasing rearrangement whose maximal
integrals approach the Hardy integrals of the profile.

Construction ("spine"): the profile is cell-averaged onto the leaves and the
resulting values are placed by :func:`maxbell.kernels.spine_order`. Each cell
keeps the lowest ``band`` fraction of its values as its own band and hands
the rest, evenly thinned, to pure child cells that are scaled copies of the
top of the profile. A cell with profile mass ``(0, t]`` then averages the
Hardy value at ``t``, so the maximal function follows the Hardy average on
the grid ``t, (1-band) t, (1-band)^2 t, ...``. With ``band = (m-1)/m`` every
cell keeps all but its first child, which is the plain nested placement
along the leftmost chain.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .bellman import bellman_value, omega_p, solve_beta
from .hardy import PowerLaw
from .maximal import maximal_values
from .tree import Rearranged, StepFunction, TreeConfig, exact_sum, integrate, power_integral
from .verify import ineq_18_report, ineq_41_report

DEFAULT_BAND = 0.25
DEFAULT_LADDER = ((2, 4), (2, 6), (2, 8), (2, 10))

# Calibrated by scripts in benchmarks/calibrate_spine.py (p=2, beta=0.5 power law).
CALIBRATED_SANDWICH = {"arity": 2, "depth": 24, "band": 0.25, "threshold": 0.9}
CALIBRATED_LADDER = tuple((2, d) for d in (10, 12, 14, 16, 18, 20, 22))
CONTROL_BETA = 0.05
CONTROL_STABILITY_FLOOR = 0.2

EXPERIMENT_COLUMNS = (
    "step",
    "arity",
    "depth",
    "f",
    "F_measured",
    "maximal_p_integral",
    "bellman_target",
    "gap18",
    "gap41",
    "stability",
    "A_q",
    "q_measured",
    "q_predicted",
)


@dataclass(frozen=True)
class SpineSpec:
    profile: object
    arity: int
    depth: int
    band: float = DEFAULT_BAND

    def __post_init__(self):
        if not isinstance(self.profile, (Rearranged, PowerLaw)):
            raise TypeError("profile must be a Rearranged step profile or a PowerLaw")
        if self.depth < 1:
            raise ValueError(f"spine depth must be at least 1, got {self.depth}")
        if not 0 < self.band <= 1:
            raise ValueError(f"band fraction must lie in (0, 1], got {self.band}")
        TreeConfig(self.arity, self.depth)


def sampled_profile(spec: SpineSpec) -> np.ndarray:
    """Leaf-cell averages of the profile, nonincreasing.

    Cells straddling a profile breakpoint are integrated, which can round a
    hair above their left neighbour; such last-bit rises are flattened.
    """
    vals = spec.profile.cell_averages(spec.arity**spec.depth)
    rise = np.diff(vals)
    if np.any(rise > 1e-12 * np.maximum(1.0, vals[1:])):
        raise ValueError("profile is not nonincreasing")
    return np.minimum.accumulate(vals)


def spine_construct(spec: SpineSpec) -> StepFunction:
    cfg = TreeConfig(spec.arity, spec.depth)
    vals = sampled_profile(spec)
    order = kernels.spine_order(spec.arity, spec.depth, float(spec.band))
    return StepFunction(cfg, vals[order])


def extremal_sequence(
    f: float, F: float, p: float, refinements=DEFAULT_LADDER, band: float = DEFAULT_BAND
) -> list[StepFunction]:
    """Spine functions of the matched power law for the pair ``(f, F)``."""
    beta = solve_beta(f, F, p)
    g = PowerLaw.from_beta(f, beta)
    return [spine_construct(SpineSpec(g, m, d, band)) for m, d in refinements]


def stability_metric(phi: StepFunction, beta: float, p: float) -> float:
    """``int |Mphi - (beta+1) phi|^p``."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    M = maximal_values(phi)
    return exact_sum(np.abs(M - (beta + 1) * phi.values) ** p) / phi.config.n_leaves


class QTrack(NamedTuple):
    A: float
    measured: float
    predicted: float
    omega: float
    omega_drift: float


def q_integral_track(phis, q: float, beta: float) -> list[QTrack]:
    """Per function: ``A = int phi^q``, ``int (Mphi)^q`` and the Bellman
    prediction ``omega_q(f^q/A)^q A``; ``omega_drift = omega_q(f^q/A) - (beta+1)``."""
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q}")
    rows = []
    for phi in phis:
        n = phi.config.n_leaves
        A = power_integral(phi, q)
        f = integrate(phi)
        measured = exact_sum(maximal_values(phi) ** q) / n
        w = omega_p(min(1.0, f**q / A), q)
        rows.append(QTrack(A, measured, w**q * A, w, w - (beta + 1)))
    return rows


def extremal_experiment(
    f: float, F: float, p: float, q: float, refinements=DEFAULT_LADDER, band: float = DEFAULT_BAND
) -> list[dict]:
    """One row per refinement, columns as in ``EXPERIMENT_COLUMNS``."""
    beta = solve_beta(f, F, p)
    target = bellman_value(f, F, p)
    rows = []
    for step, ((m, d), phi) in enumerate(
        zip(refinements, extremal_sequence(f, F, p, refinements, band))
    ):
        r18 = ineq_18_report(phi, p, q, beta)
        r41 = ineq_41_report(phi, p, q, beta)
        (track,) = q_integral_track([phi], q, beta)
        rows.append(
            {
                "step": step,
                "arity": m,
                "depth": d,
                "f": r18.components["f"],
                "F_measured": r18.components["F"],
                "maximal_p_integral": r18.components["maximal_p"],
                "bellman_target": target,
                "gap18": r18.gap,
                "gap41": r41.gap,
                "stability": stability_metric(phi, beta, p),
                "A_q": track.A,
                "q_measured": track.measured,
                "q_predicted": track.predicted,
            }
        )
    return rows


def experiment_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=EXPERIMENT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
