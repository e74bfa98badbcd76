"""Trajectory records, decay-rate fits, bootstrap ledgers, blow-up monitor.

A Trajectory stores scalar diagnostic series measured on the fly:

    l2_fluct  L2 norm of the part outside the x-average (the "nonzero modes")
    h2_fluct  L2 norm of its Laplacian
    l2_psi    L2_y norm of d_y of the x-average
    h2_psi    L2_y norm of d_y^2 of that derivative profile
    linf      max |f| on the grid
    mass      mean of f
    h1_fluct  L2 norm of the gradient of the nonzero-mode part
    l2_zero   L2_y norm of (x-average minus global mean)

The ledgers replay trajectory inequalities of the form
value(t) <= C * exp(-rate*(t-s)/4) * value(s) (and time-integrated
variants) for a supplied decay rate, recording satisfied fractions and
worst margins.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, MissingSeriesError

CORE_SERIES = ("l2_fluct", "h2_fluct", "l2_psi", "h2_psi", "linf", "mass")
EXTRA_SERIES = ("h1_fluct", "l2_zero")


def measure_state(geometry, ghat):
    """All scalar diagnostics of a spectral state in one pass."""
    V = geometry.volume
    L3 = geometry.L3
    ksq = geometry.ksq
    absg2 = np.abs(ghat) ** 2

    col = ghat[0, 0, :]
    abscol2 = np.abs(col) ** 2
    m3 = geometry.wavenumbers(2)  # 2 pi m / L3
    m3sq = m3**2

    sum_all = float(np.sum(absg2))
    sum_h1 = float(np.sum(ksq * absg2))
    sum_h2 = float(np.sum(ksq**2 * absg2))
    col_all = float(np.sum(abscol2))
    col_h1 = float(np.sum(m3sq * abscol2))
    col_h2 = float(np.sum(m3sq**2 * abscol2))

    psi_hat = 1j * m3 * col
    psi_hat[geometry.N3 // 2] = 0.0
    abspsi2 = np.abs(psi_hat) ** 2

    phys = np.fft.ifftn(ghat, norm="forward")

    def root(x):
        return float(np.sqrt(max(x, 0.0)))

    return {
        "l2_fluct": root(V * (sum_all - col_all)),
        "h2_fluct": root(V * (sum_h2 - col_h2)),
        "l2_psi": root(L3 * np.sum(abspsi2)),
        "h2_psi": root(L3 * np.sum(m3sq**2 * abspsi2)),
        "linf": float(np.max(np.abs(phys))),
        "mass": float(ghat[0, 0, 0].real),
        "h1_fluct": root(V * (sum_h1 - col_h1)),
        "l2_zero": root(L3 * (col_all - abscol2[0])),
    }


@dataclass
class Trajectory:
    """Time series of diagnostic norms, with optional field snapshots."""

    times: np.ndarray
    series: dict
    snapshots: list = field(default_factory=list)
    termination: dict = field(default_factory=lambda: {"status": "completed"})
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ContractViolation("trajectory times must be strictly increasing")
        for name, values in self.series.items():
            values = np.asarray(values, dtype=np.float64)
            if values.shape != self.times.shape:
                raise ContractViolation(f"series {name!r} length mismatch")
            self.series[name] = values

    def column(self, name):
        if name not in self.series:
            raise MissingSeriesError(name)
        return self.series[name]


@dataclass
class DecayFit:
    lambda_fit: float
    window: tuple
    r2: float


@dataclass
class LedgerItem:
    name: str
    constant: float
    satisfied_fraction: float
    worst_margin: float
    worst_time: float

    def as_dict(self):
        return {
            "name": self.name,
            "constant": self.constant,
            "satisfied_fraction": self.satisfied_fraction,
            "worst_margin": self.worst_margin,
            "worst_time": self.worst_time,
        }


@dataclass
class BootstrapLedger:
    kind: str
    lambda_nu_used: float
    items: list
    notes: dict = field(default_factory=dict)

    def item(self, name):
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def as_dict(self):
        return {
            "kind": self.kind,
            "lambda_nu_used": self.lambda_nu_used,
            "items": [it.as_dict() for it in self.items],
            "notes": self.notes,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.as_dict(), **kwargs)


def fit_decay_rate(times, values, window=None):
    """Least-squares exponential rate: slope of log(values) against time,
    negated. Requires strictly positive values and >= 10 samples in the
    window."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    t0, t1 = float(window[0]), float(window[1])
    sel = (times >= t0) & (times <= t1)
    t = times[sel]
    v = values[sel]
    if t.size < 10:
        raise ContractViolation("decay fit needs at least 10 samples in the window")
    if np.any(v <= 0):
        raise ContractViolation("series not strictly positive in window")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((logv - fitted) ** 2))
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(lambda_fit=float(-slope), window=(t0, t1), r2=float(np.clip(r2, 0.0, 1.0)))


def default_s_grid(times, n=16):
    """Logarithmically spaced restart points inside the recorded span."""
    positive = times[times > 0]
    if positive.size == 0:
        return np.array([times[0]])
    lo = positive[0]
    hi = times[-1] / 2.0
    if hi <= lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def _nearest_indices(times, points):
    idx = np.searchsorted(times, points)
    idx = np.clip(idx, 0, len(times) - 1)
    left = np.clip(idx - 1, 0, len(times) - 1)
    pick_left = np.abs(times[left] - points) <= np.abs(times[idx] - points)
    return np.unique(np.where(pick_left, left, idx))


def _pairwise_item(name, constant, times, values, bounds_fn, s_indices):
    """Evaluate value(t) <= bound(s, t) over restart points and later times."""
    satisfied = 0
    total = 0
    worst_margin = np.inf
    worst_time = float(times[0])
    for si in s_indices:
        bound = bounds_fn(si)
        margin = bound - values[si:]
        total += margin.size
        ok = margin >= -1e-12 * np.maximum(np.abs(bound), 1.0)
        satisfied += int(np.count_nonzero(ok))
        j = int(np.argmin(margin))
        if margin[j] < worst_margin:
            worst_margin = float(margin[j])
            worst_time = float(times[si:][j])
    fraction = satisfied / total if total else 1.0
    return LedgerItem(
        name=name,
        constant=float(constant),
        satisfied_fraction=float(fraction),
        worst_margin=float(worst_margin),
        worst_time=worst_time,
    )


def check_bootstrap_kse(trajectory, lambda_nu, s_grid=None):
    """Ledger for the fluctuation-decay and dissipation-budget inequalities.

    For each restart point s and every later grid time t:

        H1:  ||f_neq(t)||   <= 8 exp(-lambda_nu (t-s)/4) ||f_neq(s)||
        H2:  nu * int_s^t ||lap f_neq||^2 <= 4 ||f_neq(s)||^2
        B1/B2: the same with constants 4 and 2.

    Also reports the running supremum of
    ||psi(t)||^2 + nu*int_0^t ||d_y^2 psi||^2 as the empirical C1.
    """
    if lambda_nu <= 0:
        raise ContractViolation("lambda_nu must be positive")
    times = trajectory.times
    l2 = trajectory.column("l2_fluct")
    h2 = trajectory.column("h2_fluct")
    nu = float(trajectory.meta.get("nu", 0.0))
    if nu <= 0:
        raise ContractViolation("trajectory meta must record a positive nu")
    if s_grid is None:
        s_grid = default_s_grid(times)
    s_indices = _nearest_indices(times, np.asarray(s_grid, dtype=np.float64))

    cum_h2 = _cumtrapz(times, h2**2)

    def norm_bound(C):
        def bounds(si):
            return C * np.exp(-lambda_nu * (times[si:] - times[si]) / 4.0) * l2[si]

        return bounds

    items = [
        _pairwise_item("H1", 8.0, times, l2, norm_bound(8.0), s_indices),
        _pairwise_item("B1", 4.0, times, l2, norm_bound(4.0), s_indices),
        _budget_item("H2", 4.0, times, l2, cum_h2, nu, s_indices),
        _budget_item("B2", 2.0, times, l2, cum_h2, nu, s_indices),
    ]

    h2psi = trajectory.column("h2_psi")
    l2psi = trajectory.column("l2_psi")
    quantity = l2psi**2 + nu * _cumtrapz(times, h2psi**2)
    c1_running = np.maximum.accumulate(quantity)
    notes = {
        "c1_empirical": float(c1_running[-1]),
        "c1_series": [float(v) for v in c1_running],
        "s_grid": [float(times[i]) for i in s_indices],
    }
    return BootstrapLedger(
        kind="KSE", lambda_nu_used=float(lambda_nu), items=items, notes=notes
    )


def _budget_item(name, constant, times, l2, cum_h2, nu, s_indices):
    satisfied = 0
    total = 0
    worst_margin = np.inf
    worst_time = float(times[0])
    for si in s_indices:
        integral = nu * (cum_h2[si:] - cum_h2[si])
        bound = constant * l2[si] ** 2
        margin = bound - integral
        total += margin.size
        ok = margin >= -1e-12 * max(bound, 1.0)
        satisfied += int(np.count_nonzero(ok))
        j = int(np.argmin(margin))
        if margin[j] < worst_margin:
            worst_margin = float(margin[j])
            worst_time = float(times[si:][j])
    fraction = satisfied / total if total else 1.0
    return LedgerItem(
        name=name,
        constant=float(constant),
        satisfied_fraction=float(fraction),
        worst_margin=float(worst_margin),
        worst_time=worst_time,
    )


def _cumtrapz(times, values):
    out = np.zeros_like(values)
    if len(times) > 1:
        dt = np.diff(times)
        out[1:] = np.cumsum(0.5 * dt * (values[1:] + values[:-1]))
    return out


def check_bootstrap_ks(trajectory, lambda_nu, calibration_fraction=0.1, s_grid=None):
    """Ledger for the chemotaxis run: decay items against the initial L2
    norm, plus persistence items whose reference constants are the
    empirical suprema over an initial calibration window.

        A-1: nu*int_s^t ||grad rho_neq||^2 <= 128 exp(-lambda_nu s/4) ||rho(0)||^2
        A-2: ||rho_neq(t)||^2 <= 32 exp(-lambda_nu t/4) ||rho(0)||^2
        A-3: ||<rho> - mean||_{L2_y} <= 4 C_L2
        A-4: ||d_y <rho>||_{L2_y}   <= 4 C_H1
        A-5: ||rho||_inf            <= 4 C_inf
        B-i: the same with constants 64, 16, 2C, 2C, 2C.
    """
    if lambda_nu <= 0:
        raise ContractViolation("lambda_nu must be positive")
    times = trajectory.times
    l2f = trajectory.column("l2_fluct")
    h1f = trajectory.column("h1_fluct")
    l2zero = trajectory.column("l2_zero")
    l2psi = trajectory.column("l2_psi")
    linf = trajectory.column("linf")
    mass = trajectory.column("mass")
    meta = trajectory.meta
    nu = float(meta.get("nu", 0.0))
    if nu <= 0:
        raise ContractViolation("trajectory meta must record a positive nu")
    dims = meta.get("geometry")
    if dims is None:
        raise ContractViolation("trajectory meta must record the geometry")
    L1L2 = dims["L1"] * dims["L2"]
    V = L1L2 * dims["L3"]

    # full L2 norm reconstructed from the recorded pieces
    l2_full0 = float(np.sqrt(l2f[0] ** 2 + L1L2 * l2zero[0] ** 2 + V * mass[0] ** 2))

    t_cal = times[0] + calibration_fraction * (times[-1] - times[0])
    cal = times <= t_cal
    after = ~cal
    if not np.any(after):
        after = np.ones_like(cal)

    C_L2 = float(np.max(l2zero[cal]))
    C_H1 = float(np.max(l2psi[cal]))
    C_inf = float(np.max(linf[cal]))

    if s_grid is None:
        s_grid = default_s_grid(times)
    s_indices = _nearest_indices(times, np.asarray(s_grid, dtype=np.float64))
    cum_h1 = _cumtrapz(times, h1f**2)

    def decay_budget(name, constant):
        satisfied = 0
        total = 0
        worst_margin = np.inf
        worst_time = float(times[0])
        for si in s_indices:
            integral = nu * (cum_h1[si:] - cum_h1[si])
            bound = constant * np.exp(-lambda_nu * times[si] / 4.0) * l2_full0**2
            margin = bound - integral
            total += margin.size
            ok = margin >= -1e-12 * max(bound, 1.0)
            satisfied += int(np.count_nonzero(ok))
            j = int(np.argmin(margin))
            if margin[j] < worst_margin:
                worst_margin = float(margin[j])
                worst_time = float(times[si:][j])
        return LedgerItem(
            name,
            float(constant),
            satisfied / total if total else 1.0,
            float(worst_margin),
            worst_time,
        )

    def decay_point(name, constant):
        bound = constant * np.exp(-lambda_nu * times / 4.0) * l2_full0**2
        margin = bound - l2f**2
        ok = margin >= -1e-12 * np.maximum(bound, 1.0)
        j = int(np.argmin(margin))
        return LedgerItem(
            name,
            float(constant),
            float(np.count_nonzero(ok) / margin.size),
            float(margin[j]),
            float(times[j]),
        )

    def persistence(name, factor, C, values):
        bound = factor * C
        margin = bound - values[after]
        ok = margin >= -1e-12 * max(bound, 1.0)
        if margin.size == 0:
            return LedgerItem(name, bound, 1.0, np.inf, float(times[-1]))
        j = int(np.argmin(margin))
        return LedgerItem(
            name,
            float(bound),
            float(np.count_nonzero(ok) / margin.size),
            float(margin[j]),
            float(times[after][j]),
        )

    items = [
        decay_budget("A-1", 128.0),
        decay_point("A-2", 32.0),
        persistence("A-3", 4.0, C_L2, l2zero),
        persistence("A-4", 4.0, C_H1, l2psi),
        persistence("A-5", 4.0, C_inf, linf),
        decay_budget("B-1", 64.0),
        decay_point("B-2", 16.0),
        persistence("B-3", 2.0, C_L2, l2zero),
        persistence("B-4", 2.0, C_H1, l2psi),
        persistence("B-5", 2.0, C_inf, linf),
    ]
    notes = {
        "calibration_t_end": float(t_cal),
        "C_L2": C_L2,
        "C_H1": C_H1,
        "C_inf": C_inf,
        "l2_initial": l2_full0,
        "mass_l1": float(mass[0] * V),
        "s_grid": [float(times[i]) for i in s_indices],
    }
    return BootstrapLedger(
        kind="KellerSegel", lambda_nu_used=float(lambda_nu), items=items, notes=notes
    )


@dataclass
class MonitorThresholds:
    linf: float = 1e6
    outer_shell_fraction: float = 1e-3
    overflow: float = 1e30


@dataclass
class MonitorVerdict:
    ok: bool
    reason: str | None = None
    criterion: str | None = None
    value: float | None = None

    def as_dict(self):
        return {
            "ok": self.ok,
            "reason": self.reason,
            "criterion": self.criterion,
            "value": self.value,
        }


def blowup_monitor(state, thresholds=None):
    """Heuristic blow-up detector on a spectral state.

    Fires on (a) sup-norm exceeding the threshold, (b) more than the
    allowed energy fraction in the dealias-discarded outer shell
    (resolution exhaustion), or (c) non-finite / overflowing
    coefficients.
    """
    th = thresholds or MonitorThresholds()
    g = state.data
    peak = float(np.max(np.abs(g)))
    if not np.isfinite(peak) or peak > th.overflow:
        return MonitorVerdict(False, "coefficient overflow", "overflow", peak)

    phys_max = float(np.max(np.abs(np.fft.ifftn(g, norm="forward"))))
    if phys_max > th.linf:
        return MonitorVerdict(False, "sup-norm threshold exceeded", "linf", phys_max)

    energy = np.abs(g) ** 2
    total = float(np.sum(energy))
    if total > 0:
        outer = float(np.sum(energy[~state.geometry.dealias_mask]))
        if outer / total > th.outer_shell_fraction:
            return MonitorVerdict(
                False, "outer spectral shell saturated", "resolution", outer / total
            )
    return MonitorVerdict(True)


__all__ = [
    "CORE_SERIES",
    "EXTRA_SERIES",
    "measure_state",
    "Trajectory",
    "DecayFit",
    "LedgerItem",
    "BootstrapLedger",
    "fit_decay_rate",
    "default_s_grid",
    "check_bootstrap_kse",
    "check_bootstrap_ks",
    "MonitorThresholds",
    "MonitorVerdict",
    "blowup_monitor",
]
