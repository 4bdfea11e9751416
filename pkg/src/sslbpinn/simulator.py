"""Closed-loop simulation of the two-link arm under the adaptive DNN controller.

The integrated state is ``[q, q_dot, theta_M, theta_C, theta_F, theta_G, E_hat]``
(``theta_G`` is empty when gravity is off). Each step is one classical RK4
step. Measurement noise is drawn once per step and held over the four
stages; controller and adaptation see the noisy measurements while the
recorded metrics are evaluated on the true state.

After each step any weight vector that drifted past its bound (by the
O(dt^2) tangential error RK4 makes on the sphere) is rescaled onto it.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from . import metrics
from .adaptation import theta_C_rate, theta_F_rate, theta_G_rate, theta_M_rate
from .config import config_hash
from .controller import control_law
from .dnn import DnnArch, NetSpec, evaluate_kernel, evaluate_with_rates, forward_kernel, init_weights
from .metrics import f_tilde, frobenius_gap
from .plant import TRAJECTORY_MODES, coriolis, desired_kernel, forward_dynamics, friction, gravity, inertia
from .skew_observer import FORMS, e_hat_rate_literal, e_hat_rate_simplified

log = logging.getLogger(__name__)

DEVELOPED, BASELINE, ORACLE = 0, 1, 2
MODE_CODES = {"developed": DEVELOPED, "baseline": BASELINE, "oracle_feedforward": ORACLE}
LITERAL = FORMS["literal"]
NET_NAMES = ("M", "C", "F", "G")
N = 2


class Nets(NamedTuple):
    M: NetSpec
    C: NetSpec
    F: NetSpec
    G: NetSpec


class Layout(NamedTuple):
    """Start offsets of each block in the state vector."""

    M0: int
    C0: int
    F0: int
    G0: int
    G1: int
    E: int


def noise_std(snr_db, signal_rms):
    """Gaussian noise level giving ``snr_db`` against a signal of RMS ``signal_rms``.

    ``snr_db=None`` means noise is disabled.
    """
    if snr_db is None:
        return np.zeros_like(np.asarray(signal_rms, dtype=float)) + 0.0
    return np.asarray(signal_rms, dtype=float) * 10.0 ** (-snr_db / 20.0)


def rk4_step(f, t, y, dt):
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# jitted closed loop


@njit(cache=True)
def _vec(A):
    n = A.shape[0]
    out = np.empty(n * n)
    for j in range(n):
        for i in range(n):
            out[j * n + i] = A[i, j]
    return out


@njit(cache=True)
def closed_loop_rhs(t, y, noise, rate_M_prev, nets, lay, plant, gains, traj, mode, form, use_G):
    q = y[:N]
    q_dot = y[N:2 * N]
    qm = q + noise[:N]
    qdm = q_dot + noise[N:]
    q_d, q_d_dot, q_d_ddot = desired_kernel(t, traj)
    alpha = gains.alpha
    e = qm - q_d
    e_dot = qdm - q_d_dot
    r = e_dot + alpha * e
    v_vel = q_d_dot - alpha * e
    v_acc = q_d_ddot - alpha * e_dot
    dy = np.zeros(y.size)

    if mode == ORACLE:
        phi_M = _vec(inertia(plant, qm))
        phi_C = _vec(coriolis(plant, qm, qdm))
        phi_F = friction(plant, qdm)
        phi_G = gravity(plant, qm)
    else:
        th_M = y[lay.M0:lay.C0]
        th_C = y[lay.C0:lay.F0]
        th_F = y[lay.F0:lay.G0]
        if mode == DEVELOPED:
            E_tilde = -y[lay.E]
            phi_M, J_M, Jx_M, Jd_M = evaluate_with_rates(nets.M, th_M, qm, qdm, rate_M_prev)
        else:
            E_tilde = 0.0
            phi_M, J_M = evaluate_kernel(nets.M, th_M, qm)
            Jx_M = np.zeros((N * N, N))
            Jd_M = np.zeros(J_M.shape)
        phi_C, J_C = evaluate_kernel(nets.C, th_C, np.concatenate((qm, qdm)))
        phi_F, J_F = evaluate_kernel(nets.F, th_F, qdm)
        phi_G = np.zeros(N)
        if use_G:
            th_G = y[lay.G0:lay.G1]
            phi_G, J_G = evaluate_kernel(nets.G, th_G, qm)
            dy[lay.G0:lay.G1] = theta_G_rate(J_G, r, gains, th_G)
        rate_M = theta_M_rate(J_M, Jd_M, r, v_acc, E_tilde, gains, th_M)
        dy[lay.M0:lay.C0] = rate_M
        dy[lay.C0:lay.F0] = theta_C_rate(J_C, r, v_vel, E_tilde, gains, th_C)
        dy[lay.F0:lay.G0] = theta_F_rate(J_F, r, gains, th_F)
        if mode == DEVELOPED:
            if form == LITERAL:
                dy[lay.E] = e_hat_rate_literal(Jx_M, J_M, rate_M, phi_C, qdm, E_tilde, gains)
            else:
                dy[lay.E] = e_hat_rate_simplified(Jx_M, phi_C, qdm, E_tilde, gains)

    tau = control_law(e, r, q_d_dot, q_d_ddot, phi_M, phi_C, phi_F, phi_G, gains)
    dy[:N] = q_dot
    dy[N:2 * N] = forward_dynamics(plant, q, q_dot, tau)
    return dy, tau


@njit(cache=True)
def _clip_ball(y, start, stop, bound):
    norm = np.sqrt(np.sum(y[start:stop] ** 2))
    if norm > bound:
        y[start:stop] *= bound / norm


@njit(cache=True)
def closed_loop_step(t, y, dt, noise, rate_M_prev, nets, lay, plant, gains, traj, mode, form, use_G):
    """One RK4 step; returns the new state, the applied torque and the committed theta_M rate."""
    args = (nets, lay, plant, gains, traj, mode, form, use_G)
    k1, tau = closed_loop_rhs(t, y, noise, rate_M_prev, *args)
    k2, _ = closed_loop_rhs(t + 0.5 * dt, y + 0.5 * dt * k1, noise, rate_M_prev, *args)
    k3, _ = closed_loop_rhs(t + 0.5 * dt, y + 0.5 * dt * k2, noise, rate_M_prev, *args)
    k4, _ = closed_loop_rhs(t + dt, y + dt * k3, noise, rate_M_prev, *args)
    y_new = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _clip_ball(y_new, lay.M0, lay.C0, gains.theta_bound_M)
    _clip_ball(y_new, lay.C0, lay.F0, gains.theta_bound_C)
    _clip_ball(y_new, lay.F0, lay.G0, gains.theta_bound_F)
    _clip_ball(y_new, lay.G0, lay.G1, gains.theta_bound_G)
    rate_M = (y_new[lay.M0:lay.C0] - y[lay.M0:lay.C0]) / dt
    return y_new, tau, rate_M


@njit(cache=True)
def record_row(t, y, tau, nets, lay, plant, traj, alpha, mode):
    """True-state errors and approximation metrics at one sample."""
    q = y[:N]
    q_dot = y[N:2 * N]
    q_d, q_d_dot, _ = desired_kernel(t, traj)
    e = q - q_d
    r = (q_dot - q_d_dot) + alpha * e
    M = inertia(plant, q)
    C = coriolis(plant, q, q_dot)
    F = friction(plant, q_dot)
    if mode == ORACLE:
        phi_M, phi_C, phi_F = _vec(M), _vec(C), F.copy()
    else:
        phi_M = forward_kernel(nets.M, y[lay.M0:lay.C0], q)
        phi_C = forward_kernel(nets.C, y[lay.C0:lay.F0], np.concatenate((q, q_dot)))
        phi_F = forward_kernel(nets.F, y[lay.F0:lay.G0], q_dot)
    q_ddot = forward_dynamics(plant, q, q_dot, tau)
    errs = np.array([frobenius_gap(M, phi_M), frobenius_gap(C, phi_C), np.sqrt(np.sum((F - phi_F) ** 2))])
    norms = np.array([np.sqrt(np.sum(y[lay.M0:lay.C0] ** 2)), np.sqrt(np.sum(y[lay.C0:lay.F0] ** 2)),
                      np.sqrt(np.sum(y[lay.F0:lay.G0] ** 2)), np.sqrt(np.sum(y[lay.G0:lay.G1] ** 2))])
    return q_d, e, r, errs, f_tilde(M, C, F, phi_M, phi_C, phi_F, q_ddot, q_dot), norms


ABORT_NONE, ABORT_ERROR, ABORT_DIVERGED = 0, 1, 2


@njit(cache=True)
def integrate(y, dt, noise, threshold, nets, lay, plant, gains, traj, mode, form, use_G,
              t_out, q_out, qd_out, q_d_out, e_out, r_out, tau_out, E_out, errs_out, ft_out, norms_out):
    """Run all steps, filling the output rows; returns ``(rows_done, abort_code, last_state)``.

    A row records the state at the start of a step together with the torque
    applied over that step.
    """
    rate_M = np.zeros(lay.C0 - lay.M0)
    steps = noise.shape[0]
    for k in range(steps):
        t = k * dt
        ok = True
        try:
            y_new, tau, rate_new = closed_loop_step(t, y, dt, noise[k], rate_M, nets, lay, plant, gains,
                                                    traj, mode, form, use_G)
            q_d, e, r, errs, ft, norms = record_row(t, y, tau, nets, lay, plant, traj, gains.alpha, mode)
        except Exception:  # noqa: BLE001 - numba cannot bind the exception
            ok = False
        if not ok:
            return k, ABORT_ERROR, y
        t_out[k] = t
        q_out[k] = y[:N]
        qd_out[k] = y[N:2 * N]
        q_d_out[k] = q_d
        e_out[k] = e
        r_out[k] = r
        tau_out[k] = tau
        E_out[k] = y[lay.E]
        errs_out[k] = errs
        ft_out[k] = ft
        norms_out[k] = norms
        if not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new)) > threshold:
            return k + 1, ABORT_DIVERGED, y
        y = y_new
        rate_M = rate_new
    return steps, ABORT_NONE, y


# ---------------------------------------------------------------------------
# driver


def network_archs(cfg):
    hidden = (cfg.width,) * cfg.hidden_layers
    return {
        "M": DnnArch(N, N * N, hidden, cfg.activation),
        "C": DnnArch(2 * N, N * N, hidden, cfg.activation),
        "F": DnnArch(N, N, hidden, cfg.activation),
        "G": DnnArch(N, N, hidden, cfg.activation),
    }


def initial_weights(cfg, archs):
    """U(-1, 1) weights per network from child streams of the run seed."""
    children = np.random.SeedSequence(cfg.seed).spawn(1 + len(NET_NAMES))[1:]
    g = cfg.gains
    bounds = dict(M=g.theta_bound_M, C=g.theta_bound_C, F=g.theta_bound_F, G=g.theta_bound_G)
    weights = {name: init_weights(archs[name], child, bounds[name]).theta
               for name, child in zip(NET_NAMES, children)}
    if not cfg.plant.gravity:
        weights["G"] = np.zeros(0)
    return weights


def desired_series(cfg, steps=None):
    steps = cfg.steps if steps is None else steps
    traj = TRAJECTORY_MODES[cfg.trajectory]
    pts = [desired_kernel(k * cfg.dt, traj) for k in range(steps)]
    return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])


def measurement_noise(cfg):
    """Noise for ``[q, q_dot]`` per step, scaled per channel from the desired trajectory RMS."""
    steps = cfg.steps
    if not cfg.noise:
        return np.zeros((steps, 2 * N))
    q_d, q_d_dot = desired_series(cfg)
    signal_rms = np.concatenate([np.sqrt(np.mean(q_d ** 2, axis=0)), np.sqrt(np.mean(q_d_dot ** 2, axis=0))])
    sigma = noise_std(cfg.snr_db, signal_rms)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    return rng.standard_normal((steps, 2 * N)) * sigma


@dataclass
class SimTrace:
    t: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    q_d: np.ndarray
    e: np.ndarray
    r: np.ndarray
    tau: np.ndarray
    E_hat: np.ndarray
    E_tilde: np.ndarray
    err_M: np.ndarray
    err_C: np.ndarray
    err_F: np.ndarray
    f_tilde: np.ndarray
    theta_norms: np.ndarray
    theta_bounds: np.ndarray
    mode: str = "developed"
    seed: int = 0
    config_hash: str = ""
    abort_reason: str = None
    max_q_norm: float = 0.0
    max_q_dot_norm: float = 0.0
    input_excursion: bool = False
    noise: np.ndarray = field(default=None, repr=False)
    initial_weights: dict = field(default_factory=dict, repr=False)
    final_weights: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return self.t.size

    @property
    def aborted(self):
        return self.abort_reason is not None

    @property
    def f_tilde_norm(self):
        return np.linalg.norm(self.f_tilde, axis=1)


def run(cfg):
    """Simulate one configuration and return its trace."""
    cfg.validate()
    archs = network_archs(cfg)
    weights = initial_weights(cfg, archs)
    nets = Nets(*(archs[name].spec() for name in NET_NAMES))
    sizes = [weights[name].size for name in NET_NAMES]
    starts = np.cumsum([2 * N] + sizes)
    lay = Layout(*(int(v) for v in starts), int(starts[-1]))

    traj = TRAJECTORY_MODES[cfg.trajectory]
    mode = MODE_CODES[cfg.mode]
    form = FORMS[cfg.skew_form]
    use_G = bool(cfg.plant.gravity)
    g = cfg.gains
    bounds = np.array([g.theta_bound_M, g.theta_bound_C, g.theta_bound_F, g.theta_bound_G])

    if cfg.start_on_trajectory:
        q0, q_dot0, _ = desired_kernel(0.0, traj)
    else:
        q0, q_dot0 = np.array(cfg.q0, float), np.array(cfg.q_dot0, float)
    y = np.concatenate([q0, q_dot0, *(weights[name] for name in NET_NAMES), [0.0]])

    steps = cfg.steps
    dt = cfg.dt
    noise = measurement_noise(cfg)
    rows = {
        "t": np.zeros(steps), "q": np.zeros((steps, N)), "q_dot": np.zeros((steps, N)),
        "q_d": np.zeros((steps, N)), "e": np.zeros((steps, N)), "r": np.zeros((steps, N)),
        "tau": np.zeros((steps, N)), "E_hat": np.zeros(steps), "errs": np.zeros((steps, 3)),
        "f_tilde": np.zeros((steps, N)), "norms": np.zeros((steps, 4)),
    }
    done, code, y = integrate(y, dt, noise, float(cfg.abort_threshold), nets, lay, cfg.plant, g,
                              traj, mode, form, use_G, rows["t"], rows["q"], rows["q_dot"], rows["q_d"],
                              rows["e"], rows["r"], rows["tau"], rows["E_hat"], rows["errs"],
                              rows["f_tilde"], rows["norms"])
    abort_reason = None
    if code == ABORT_ERROR:
        abort_reason = f"t={done * dt:.6g}: non-finite torque or singular dynamics"
    elif code == ABORT_DIVERGED:
        abort_reason = f"t={done * dt:.6g}: state diverged beyond {cfg.abort_threshold:g}"
    if abort_reason:
        log.warning("run aborted (seed %s, %s): %s", cfg.seed, cfg.mode, abort_reason)

    rows = {key: val[:done] for key, val in rows.items()}
    q_norm = np.linalg.norm(rows["q"], axis=1) if done else np.zeros(1)
    q_dot_norm = np.linalg.norm(rows["q_dot"], axis=1) if done else np.zeros(1)
    final = {name: y[a:b].copy() for name, a, b in
             zip(NET_NAMES, (lay.M0, lay.C0, lay.F0, lay.G0), (lay.C0, lay.F0, lay.G0, lay.G1))}
    return SimTrace(
        t=rows["t"], q=rows["q"], q_dot=rows["q_dot"], q_d=rows["q_d"], e=rows["e"], r=rows["r"],
        tau=rows["tau"], E_hat=rows["E_hat"], E_tilde=-rows["E_hat"],
        err_M=rows["errs"][:, 0], err_C=rows["errs"][:, 1], err_F=rows["errs"][:, 2],
        f_tilde=rows["f_tilde"], theta_norms=rows["norms"], theta_bounds=bounds,
        mode=cfg.mode, seed=cfg.seed, config_hash=config_hash(cfg), abort_reason=abort_reason,
        max_q_norm=float(q_norm.max()), max_q_dot_norm=float(q_dot_norm.max()),
        input_excursion=bool(max(q_norm.max(), q_dot_norm.max()) > cfg.input_radius),
        noise=noise, initial_weights=weights, final_weights=final,
    )


def _run_arm(cfg):
    trace = run(cfg)
    summary = None if trace.aborted else metrics.summarize(trace)
    return summary, trace


def compare(cfg, seeds, workers=1, keep_traces=False):
    """Run developed and baseline arms on each seed with shared noise and initial weights.

    Returns ``(report, traces)``; ``traces`` maps ``(seed, arm)`` to the
    trace for every seed selected by ``keep_traces`` (``True`` for all, or a
    collection of seeds) and otherwise stays empty.
    """
    from .metrics import ComparisonReport

    seeds = list(seeds)
    if not seeds:
        raise ValueError("compare needs at least one seed")
    jobs = [(s, arm, cfg.replace(seed=s, mode=arm)) for s in seeds for arm in ("developed", "baseline")]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_arm, [j[2] for j in jobs]))
    else:
        results = [_run_arm(j[2]) for j in jobs]

    report = ComparisonReport(seeds=seeds, config_hash=config_hash(cfg.replace(seed=0, mode="developed")))
    traces = {}
    for (seed, arm, _), (summary, trace) in zip(jobs, results):
        report.max_theta_norms[(seed, arm)] = trace.theta_norms.max(axis=0) if len(trace) else np.zeros(4)
        if summary is None:
            report.aborted.append((seed, arm, trace.abort_reason))
        else:
            getattr(report, arm)[seed] = summary
        if keep_traces is True or (keep_traces and seed in keep_traces):
            traces[(seed, arm)] = trace
    return report, traces
