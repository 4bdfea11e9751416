"""RMS metrics, approximation errors and the developed-vs-baseline report."""

import csv
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DimensionError

# name -> (table heading, unit)
METRICS = {
    "f_tilde": ("||f~||", "N.m"),
    "err_M": ("||M-PhiM||", "kg.m^2"),
    "err_C": ("||C-PhiC||", "kg.m^2/s"),
    "err_F": ("||F-PhiF||", "N.m"),
    "E_tilde": ("||E~||", "kg.m^2/s"),
    "e": ("||e||", "rad"),
    "tau": ("||tau||", "N.m"),
}


def rms(series):
    """Root mean square of the Euclidean norm over the leading (time) axis."""
    a = np.asarray(series, dtype=float)
    if a.ndim == 0 or a.shape[0] == 0:
        raise ValueError("rms of an empty series")
    sq = a.reshape(a.shape[0], -1) ** 2
    return float(np.sqrt(np.mean(np.sum(sq, axis=1))))


def percent_improvement(baseline, developed):
    if not baseline > 0:
        return float("nan")
    return 100.0 * (baseline - developed) / baseline


@njit(cache=True)
def f_tilde(M, C, F, phi_M, phi_C, phi_F, q_ddot, q_dot):
    """``(M - M_hat) q_ddot + (C - C_hat) q_dot + (F - F_hat)``."""
    n = q_dot.size
    M_hat = phi_M.reshape((n, n)).T
    C_hat = phi_C.reshape((n, n)).T
    return (M - M_hat) @ q_ddot + (C - C_hat) @ q_dot + (F - phi_F)


@njit(cache=True)
def frobenius_gap(true, estimate_vec):
    n = true.shape[0]
    return np.sqrt(np.sum((true - estimate_vec.reshape((n, n)).T) ** 2))


def matrix_error(true, estimate_vec):
    """Frobenius norm of ``true - unvec(estimate)``; Euclidean norm for vectors."""
    true = np.asarray(true, dtype=float)
    est = np.ascontiguousarray(estimate_vec, dtype=float).reshape(-1)
    if est.size != true.size:
        raise DimensionError(f"estimate of size {est.size} does not match {true.shape}")
    if true.ndim == 1:
        return float(np.linalg.norm(true - est))
    if true.ndim != 2 or true.shape[0] != true.shape[1]:
        raise DimensionError("matrix_error expects a square matrix or a vector")
    return float(frobenius_gap(np.ascontiguousarray(true), est))


def summarize(trace):
    """RMS of every reported quantity over a trace."""
    out = {
        "f_tilde": rms(trace.f_tilde),
        "err_M": rms(trace.err_M),
        "err_C": rms(trace.err_C),
        "err_F": rms(trace.err_F),
        "e": rms(trace.e),
        "tau": rms(trace.tau),
    }
    out["E_tilde"] = rms(trace.E_tilde) if trace.mode == "developed" else float("nan")
    return out


@dataclass
class ComparisonReport:
    seeds: list
    developed: dict = field(default_factory=dict)   # seed -> metrics dict
    baseline: dict = field(default_factory=dict)
    aborted: list = field(default_factory=list)     # (seed, arm, reason)
    max_theta_norms: dict = field(default_factory=dict)  # (seed, arm) -> per-network max ||theta||
    config_hash: str = ""

    def _complete_seeds(self):
        return [s for s in self.seeds if s in self.developed and s in self.baseline]

    def values(self, arm, metric):
        runs = self.developed if arm == "developed" else self.baseline
        return np.array([runs[s][metric] for s in self._complete_seeds()])

    def median(self, arm, metric):
        v = self.values(arm, metric)
        return float(np.median(v)) if v.size else float("nan")

    def improvement(self, metric):
        return percent_improvement(self.median("baseline", metric), self.median("developed", metric))

    def per_seed_improvement(self, metric):
        return np.array([percent_improvement(self.baseline[s][metric], self.developed[s][metric])
                         for s in self._complete_seeds()])

    def median_improvement(self, metric):
        v = self.per_seed_improvement(metric)
        return float(np.median(v)) if v.size else float("nan")

    def wins(self, metric):
        """Number of seeds where the developed arm is no worse than the baseline."""
        return int(np.sum(self.values("developed", metric) <= self.values("baseline", metric)))

    def to_table(self):
        names = list(METRICS)
        head = ["RMS values (median)"] + [f"{METRICS[m][0]} [{METRICS[m][1]}]" for m in names]
        rows = [head]
        for arm, label in (("baseline", "Baseline method"), ("developed", "Developed method")):
            rows.append([label] + [_fmt(self.median(arm, m)) for m in names])
        rows.append(["Improvement [%]"] + [_fmt(self.improvement(m), 2) for m in names])
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.append(f"seeds: {len(self._complete_seeds())}/{len(self.seeds)} complete"
                     f"  config: {self.config_hash[:12]}")
        for seed, arm, reason in self.aborted:
            lines.append(f"aborted: seed {seed} {arm}: {reason}")
        return "\n".join(lines)

    def to_csv(self, path):
        names = list(METRICS)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "arm"] + names)
            for s in self._complete_seeds():
                for arm, runs in (("baseline", self.baseline), ("developed", self.developed)):
                    writer.writerow([s, arm] + [repr(runs[s][m]) for m in names])
            for arm in ("baseline", "developed"):
                writer.writerow(["median", arm] + [repr(self.median(arm, m)) for m in names])
            writer.writerow(["improvement_pct", ""] + [repr(self.improvement(m)) for m in names])


def _fmt(x, digits=4):
    if not np.isfinite(x):
        return "-"
    return f"{x:.{digits}f}"
