"""Post-run metrics and theoretical settling-time bounds.

Pure post-processing over trajectory logs, plus direct evaluation of the
printed fixed-time bound formulas so simulated settling times can be checked
against what the gains alone promise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .controllers import GainSet


@dataclass(frozen=True)
class BoundReport:
    """Theoretical settling-time bounds for one gain set (N axes).

    t_s1 / t_s2: error convergence on the singular / nonsingular surface.
    t_r1 / t_r2: reaching time of the corresponding integral surface.
    t_n: the nominal backstepping cascade.  total_thm2 omits an existence
    constant for the region where the nonsingular surface factor is small;
    that term has no printed closed form and is flagged unquantified.
    """

    t_s1: float
    t_r1: float
    t_s2: float
    t_r2: float
    t_n: float
    n_axes: int = 2

    @property
    def total_thm1(self) -> float:
        return self.t_s1 + self.t_r1 + self.t_n

    @property
    def total_thm2(self) -> float:
        return self.t_s2 + self.t_r2 + self.t_n

    epsilon_tau_note: str = "plus eps(tau), unquantified"


def _surface_bound(k_lo, k_hi, a_lo, a_hi) -> float:
    return 1.0 / (k_lo * (1.0 - a_lo)) + 1.0 / (k_hi * (a_hi - 1.0))


def _reaching_bound(k3, k4, p, q, n) -> float:
    # Lemma-3 bound applied to Vdot <= -k3 2^((p+1)/2) V^((p+1)/2)
    #                                 -k4 2^((q+1)/2) N^((1-q)/2) V^((q+1)/2)
    lo = 2.0 ** ((p + 1.0) / 2.0) * k3
    hi = 2.0 ** ((q + 1.0) / 2.0) * k4 * n ** ((1.0 - q) / 2.0)
    return 1.0 / (lo * (1.0 - (p + 1.0) / 2.0)) + 1.0 / (hi * ((q + 1.0) / 2.0 - 1.0))


def _cascade_bound(l2, l3, a, b) -> float:
    return (2.0 / (l2 * 2.0 ** ((a + 1.0) / 2.0) * (1.0 - a))
            + 2.0 / (l3 * 2.0 ** ((b + 1.0) / 2.0) * (b - 1.0)))


def theoretical_bounds(gains: GainSet = GainSet(), n_axes: int = 2) -> BoundReport:
    """Evaluate every printed bound formula for the given gain set."""
    if n_axes < 1:
        raise ValueError("n_axes must be >= 1")
    return BoundReport(
        t_s1=_surface_bound(gains.ft.k1, gains.ft.k2, gains.ft.alpha, gains.ft.beta),
        t_r1=_reaching_bound(gains.comp.k3, gains.comp.k4,
                             gains.comp.p_exp, gains.comp.q_exp, n_axes),
        t_s2=_surface_bound(gains.ns.k5, gains.ns.k6, gains.ns.m, gains.ns.n),
        t_r2=_reaching_bound(gains.comp.k3, gains.comp.k4,
                             gains.comp.p_exp, gains.comp.q_exp, n_axes),
        t_n=_cascade_bound(gains.bsp.lambda2, gains.bsp.lambda3,
                           gains.bsp.alpha, gains.bsp.beta),
        n_axes=n_axes,
    )


def rmse(err: np.ndarray) -> np.ndarray:
    """Per-column root mean square of an (n, k) error array."""
    err = np.asarray(err, dtype=float)
    if err.ndim == 1:
        err = err[:, None]
    if err.shape[0] == 0:
        raise ValueError("rmse of an empty log")
    return np.sqrt(np.mean(err * err, axis=0))


def empirical_settling_time(t, err, threshold: float):
    """First time after which max|err| stays below threshold to the end.

    A later re-crossing resets the clock, so the result is measured from the
    final excursion.  Returns None when the error never settles.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    t = np.asarray(t, dtype=float)
    err = np.asarray(err, dtype=float)
    if err.ndim == 1:
        err = err[:, None]
    above = np.max(np.abs(err), axis=1) >= threshold
    if not above.any():
        return 0.0
    last = int(np.nonzero(above)[0][-1])
    if last == len(t) - 1:
        return None
    return float(t[last + 1])


def lyapunov_traces(result, gains: GainSet | None = None) -> dict:
    """Lyapunov candidate series along a logged run.

    V1/V2 are the quadratic forms of the integral surface (they share the
    definition; which surface sigma holds depends on the controller).  V3 is
    the quadratic form of the position-level backstepping error, V4 of the
    velocity-level one, Vn their sum.  V4 needs the reference velocity, which
    is reconstructed from the logged xr by central differences.
    """
    from .controllers import bsp_stabilizing
    from .admittance import Reference

    gains = gains or result.config.gains
    sig = np.column_stack([result.col("sigma1"), result.col("sigma2")])
    v_sigma = 0.5 * np.sum(sig * sig, axis=1)
    e = np.column_stack([result.col("e1"), result.col("e2")])
    v3 = 0.5 * np.sum(e * e, axis=1)

    t = result.col("t")
    xr = np.column_stack([result.col("xr1"), result.col("xr2")])
    xdot = np.column_stack([result.col("xdot1"), result.col("xdot2")])
    xrd = np.gradient(xr, t, axis=0)
    s2 = np.empty_like(e)
    for i in range(len(t)):
        ref = Reference(xr=xr[i], xrd=xrd[i], xrdd=np.zeros(2))
        s2[i] = xdot[i] - bsp_stabilizing(e[i], ref, gains.bsp)
    v4 = 0.5 * np.sum(s2 * s2, axis=1)

    return {"t": t, "V1": v_sigma, "V2": v_sigma.copy(),
            "V3": v3, "V4": v4, "Vn": v3 + v4}


def monotone_outside_band(t, v, sigma_inf, band: float = 1e-6,
                          slack: float = 0.0) -> bool:
    """True when v never increases (beyond slack) while |sigma| >= band."""
    v = np.asarray(v, dtype=float)
    active = np.asarray(sigma_inf, dtype=float) >= band
    dv = np.diff(v)
    mask = active[:-1] & active[1:]
    return bool(np.all(dv[mask] <= slack))


def comparison_table(summaries: dict, path) -> None:
    """Write the benchmark comparison CSV: controllers as columns, axes as rows."""
    names = list(summaries)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis"] + names)
        for axis in (0, 1):
            row = [f"rmse_{axis + 1}"]
            for name in names:
                s = summaries[name]
                row.append("failed" if s.get("status") != "ok"
                           else format(s["rmse"][axis], ".17g"))
            w.writerow(row)


def bound_report_text(report: BoundReport) -> str:
    """Human-readable bound report."""
    lines = [
        "fixed-time settling bounds (from gains alone, N = %d axes)" % report.n_axes,
        "  T_s1 (singular surface)     = %.6f s" % report.t_s1,
        "  T_r1 (sigma1 reaching)      = %.6f s" % report.t_r1,
        "  T_s2 (nonsingular surface)  = %.6f s" % report.t_s2,
        "  T_r2 (sigma2 reaching)      = %.6f s" % report.t_r2,
        "  T_n  (nominal cascade)      = %.6f s" % report.t_n,
        "  total (theorem 1)           = %.6f s" % report.total_thm1,
        "  total (theorem 2)           = %.6f s  (%s)" % (report.total_thm2,
                                                          report.epsilon_tau_note),
    ]
    return "\n".join(lines) + "\n"
