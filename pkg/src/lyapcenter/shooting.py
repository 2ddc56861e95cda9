"""Exhibit the certified periodic orbits numerically by single shooting.

The certificate only guarantees existence of periodic solutions of
x'' = -grad U(x) near the critical orbit with period close to 2 pi / beta_j0.
This module seeds a shooting problem from the linearization, refines it by
Gauss-Newton on the closure residual, and applies honesty gates so that a
"found orbit" really is a non-stationary loop inside the neighborhood the
certificate speaks about, not a collapse back onto the critical orbit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from lyapcenter.conley import HypothesisError
from lyapcenter.critical_orbits import CriticalOrbitRecord, hypothesis_check
from lyapcenter.symmetry import BlockRotation, orbit_distance

__all__ = [
    "RefinementError",
    "DivergenceError",
    "StagnationError",
    "CollapseError",
    "TrajectoryResult",
    "ShootingState",
    "PeriodicOrbitSolution",
    "SweepResult",
    "integrate",
    "seed_from_linearization",
    "refine_orbit",
    "amplitude_sweep",
    "export_csv",
]


class RefinementError(RuntimeError):
    """Base class for honest failures of the orbit refinement."""


class DivergenceError(RefinementError):
    """The trajectory blew up or left the neighborhood the claim lives in."""


class StagnationError(RefinementError):
    """Gauss-Newton stopped making progress above the residual tolerance."""


class CollapseError(RefinementError):
    """The iteration fell back onto the critical orbit (no genuine loop)."""


@dataclass(frozen=True)
class TrajectoryResult:
    """One integrated trajectory with optional monodromy."""

    times: np.ndarray
    states: np.ndarray        # (steps+1, 2n): positions then velocities
    energies: np.ndarray
    monodromy: Optional[np.ndarray]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))


def _guard(x, bound_radius):
    if not np.all(np.isfinite(x)) or float(np.abs(x).max()) > 1e100:
        raise DivergenceError("trajectory became non-finite")
    if bound_radius is not None and float(np.linalg.norm(x)) > bound_radius:
        raise DivergenceError("trajectory left the configured domain")


def integrate(potential, x0, v0, period, steps=2048, method="verlet",
              with_monodromy=False, bound_radius=None) -> TrajectoryResult:
    """Integrate x'' = -grad U(x) over [0, period].

    "verlet" is velocity Verlet with the exact tangent map of the discrete
    update, so the monodromy is the derivative of the computed flow rather
    than a separately discretized variational equation.  "rk4" integrates the
    variational system alongside the state with the same stages.
    """
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    n = len(x)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if period <= 0:
        raise ValueError("period must be positive")
    h = period / steps

    with np.errstate(over="ignore", invalid="ignore"):
        return _integrate_loop(potential, x, v, n, h, steps, method,
                               with_monodromy, bound_radius)


def _integrate_loop(potential, x, v, n, h, steps, method, with_monodromy,
                    bound_radius) -> TrajectoryResult:
    # overflow past the 1e100 horizon is caught by _guard and reported as
    # divergence, so the float warnings carry no extra information

    states = np.empty((steps + 1, 2 * n))
    states[0, :n], states[0, n:] = x, v
    dz = np.eye(2 * n) if with_monodromy else None

    if method == "verlet":
        acc = -potential.gradient(x)
        for i in range(steps):
            if with_monodromy:
                a_mat = -potential.hessian(x)
            x_new = x + h * v + (0.5 * h * h) * acc
            _guard(x_new, bound_radius)
            acc_new = -potential.gradient(x_new)
            v = v + (0.5 * h) * (acc + acc_new)
            if with_monodromy:
                a_new = -potential.hessian(x_new)
                dx, dv = dz[:n], dz[n:]
                dx_new = dx + h * dv + (0.5 * h * h) * (a_mat @ dx)
                dv_new = dv + (0.5 * h) * (a_mat @ dx + a_new @ dx_new)
                dz = np.vstack([dx_new, dv_new])
            x, acc = x_new, acc_new
            states[i + 1, :n], states[i + 1, n:] = x, v
    elif method == "rk4":
        def rhs(xx, vv, dzz):
            ax = -potential.gradient(xx)
            if dzz is None:
                return vv, ax, None
            hm = -potential.hessian(xx)
            ddz = np.vstack([dzz[n:], hm @ dzz[:n]])
            return vv, ax, ddz

        for i in range(steps):
            k1x, k1v, k1z = rhs(x, v, dz)
            k2x, k2v, k2z = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v,
                                None if dz is None else dz + 0.5 * h * k1z)
            k3x, k3v, k3z = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v,
                                None if dz is None else dz + 0.5 * h * k2z)
            k4x, k4v, k4z = rhs(x + h * k3x, v + h * k3v,
                                None if dz is None else dz + h * k3z)
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
            if dz is not None:
                dz = dz + (h / 6.0) * (k1z + 2 * k2z + 2 * k3z + k4z)
            _guard(x, bound_radius)
            states[i + 1, :n], states[i + 1, n:] = x, v
    else:
        raise ValueError(f"unknown integrator {method!r}")

    times = np.arange(steps + 1) * h
    energies = np.array([0.5 * float(s[n:] @ s[n:]) + potential.value(s[:n])
                         for s in states])
    return TrajectoryResult(times, states, energies, dz)


@dataclass(frozen=True)
class ShootingState:
    """Initial guess for one periodic orbit, tied to its critical orbit."""

    x0: np.ndarray
    v0: np.ndarray
    period: float
    amplitude: float
    beta: float
    reference_point: np.ndarray
    direction: np.ndarray      # unit positive-eigenvalue direction
    tangent_basis: np.ndarray  # rows pin motion along the critical orbit


def seed_from_linearization(record: CriticalOrbitRecord, j0: int = 1,
                            amplitude: float = 1e-2) -> ShootingState:
    """Start on the positive-eigenvalue axis with the linearized period.

    Refuses orbits failing the hypotheses: the theorem promises nothing there,
    so handing a seed to the refiner would misreport any accidental
    convergence as a certified orbit.
    """
    report = hypothesis_check(record, j0)
    if not report.checklist.passed:
        raise HypothesisError("hypotheses fail: "
                              + "; ".join(record.checklist.failures))
    if not report.eligible:
        raise HypothesisError(
            f"resonant ratios {report.resonance.ratios}; no certified period")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    beta = record.spectral.betas[j0 - 1]
    w = record.spectral.positive_eigenvector(j0)
    q0 = record.point
    return ShootingState(
        x0=q0 + amplitude * w,
        v0=np.zeros_like(q0),
        period=2.0 * math.pi / beta,
        amplitude=amplitude,
        beta=beta,
        reference_point=q0,
        direction=w,
        tangent_basis=record.geometry.tangent_basis,
    )


@dataclass(frozen=True)
class PeriodicOrbitSolution:
    """A refined periodic orbit that passed every honesty gate."""

    x0: np.ndarray
    v0: np.ndarray
    period: float
    minimal_period: float
    period_multiplier: int
    amplitude: float
    residual_norm: float
    iterations: int
    energy: float
    energy_drift: float
    max_orbit_distance: float
    floquet: tuple
    trajectory: TrajectoryResult


def _pack(state: ShootingState) -> np.ndarray:
    return np.concatenate([state.x0, state.v0, [state.period]])


def _closure_residual(potential, u, state, n, steps, method, bound_radius,
                      with_monodromy):
    x0, v0, period = u[:n], u[n:2 * n], float(u[2 * n])
    traj = integrate(potential, x0, v0, period, steps=steps, method=method,
                     with_monodromy=with_monodromy, bound_radius=bound_radius)
    zt = traj.final_state
    q0, w = state.reference_point, state.direction
    taus = state.tangent_basis
    r = np.concatenate([
        zt[:n] - x0,
        zt[n:] - v0,
        [float(v0 @ w)],
        taus @ (x0 - q0),
        [float(w @ (x0 - q0)) - state.amplitude],
    ])
    if not with_monodromy:
        return r, None, traj
    m = traj.monodromy
    rows = len(r)
    jac = np.zeros((rows, 2 * n + 1))
    jac[:2 * n, :2 * n] = m - np.eye(2 * n)
    jac[:n, 2 * n] = zt[n:]
    jac[n:2 * n, 2 * n] = -potential.gradient(zt[:n])
    jac[2 * n, n:2 * n] = w
    for i in range(taus.shape[0]):
        jac[2 * n + 1 + i, :n] = taus[i]
    jac[-1, :n] = w
    return r, jac, traj


def _minimal_period(potential, solution_u, n, steps, method, amplitude):
    """Smallest divisor period at which the solution already closes up."""
    x0, v0, period = solution_u[:n], solution_u[n:2 * n], float(solution_u[2 * n])
    z0 = np.concatenate([x0, v0])
    thresh = max(amplitude / 20.0, 1e-7) * (1.0 + float(np.linalg.norm(z0)))
    for k in range(6, 1, -1):
        sub = integrate(potential, x0, v0, period / k,
                        steps=max(steps // k, 64), method=method)
        if float(np.linalg.norm(sub.final_state - z0)) < thresh:
            return period / k, k
    return period, 1


def refine_orbit(potential, record: CriticalOrbitRecord, action: BlockRotation,
                 state: Optional[ShootingState] = None, j0: int = 1,
                 amplitude: float = 1e-2, steps: int = 2048,
                 method: str = "verlet", max_iter: int = 40,
                 tol: float = 1e-10,
                 bound_radius: Optional[float] = None) -> PeriodicOrbitSolution:
    """Gauss-Newton refinement of the closure residual.

    Unknowns are (x0, v0, T); the overdetermined system adds a phase pin
    v0 . w = 0, pins along the critical orbit tangent, and anchors the
    amplitude (x0 - q0) . w = a, solved by least squares with backtracking.
    Raises instead of returning anything that fails the honesty gates.
    """
    if state is None:
        state = seed_from_linearization(record, j0, amplitude)
    n = len(state.x0)
    u = _pack(state)
    t_min = 0.1 * state.period
    r, jac, traj = _closure_residual(potential, u, state, n, steps, method,
                                     bound_radius, True)
    rnorm = float(np.linalg.norm(r))
    iterations = 0

    while rnorm > tol:
        if iterations >= max_iter:
            raise StagnationError(
                f"residual {rnorm:.3e} after {iterations} iterations")
        if rnorm > 1e6:
            raise DivergenceError(f"residual blew up to {rnorm:.3e}")
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        accepted = False
        alpha = 1.0
        for _ in range(8):
            u_try = u + alpha * step
            if u_try[2 * n] < t_min:
                raise CollapseError("period collapsed below a tenth of the "
                                    "linearized period")
            r_try, _, _ = _closure_residual(potential, u_try, state, n, steps,
                                            method, bound_radius, False)
            if float(np.linalg.norm(r_try)) < rnorm:
                u = u_try
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise StagnationError(
                f"no descent direction at residual {rnorm:.3e}")
        r, jac, traj = _closure_residual(potential, u, state, n, steps, method,
                                         bound_radius, True)
        rnorm = float(np.linalg.norm(r))
        iterations += 1

    a = state.amplitude
    q0 = state.reference_point
    dists = np.array([orbit_distance(action, q0, s[:n]) for s in traj.states])
    max_dist = float(dists.max())
    if max_dist < a / 10.0:
        raise CollapseError(
            f"trajectory stays within {max_dist:.2e} of the critical orbit; "
            "the loop collapsed")
    if max_dist > 10.0 * a:
        raise DivergenceError(
            f"trajectory wanders {max_dist:.2e} from the critical orbit, "
            f"outside the 10x amplitude neighborhood of the claim")
    vmax = float(np.max(np.linalg.norm(traj.states[:, n:], axis=1)))
    if vmax < a * state.beta / 2.0:
        raise CollapseError("velocities never exceed half the linearized "
                            "scale; solution is numerically stationary")

    minimal, multiplier = _minimal_period(potential, u, n, steps, method, a)
    floquet = tuple(np.linalg.eigvals(traj.monodromy))
    return PeriodicOrbitSolution(
        x0=u[:n].copy(),
        v0=u[n:2 * n].copy(),
        period=float(u[2 * n]),
        minimal_period=minimal,
        period_multiplier=multiplier,
        amplitude=a,
        residual_norm=rnorm,
        iterations=iterations,
        energy=float(traj.energies[0]),
        energy_drift=traj.energy_drift,
        max_orbit_distance=max_dist,
        floquet=floquet,
        trajectory=traj,
    )


@dataclass(frozen=True)
class SweepResult:
    solutions: tuple
    failures: tuple  # (amplitude, message)

    @property
    def periods(self) -> tuple:
        return tuple(s.period for s in self.solutions)


def amplitude_sweep(potential, record: CriticalOrbitRecord,
                    action: BlockRotation, amplitudes, j0: int = 1,
                    steps: int = 2048, method: str = "verlet",
                    max_iter: int = 40, tol: float = 1e-10,
                    bound_radius: Optional[float] = None) -> SweepResult:
    """Refine one orbit per amplitude, warm-starting the period downward."""
    solutions = []
    failures = []
    warm_period = None
    for a in amplitudes:
        st = seed_from_linearization(record, j0, a)
        if warm_period is not None:
            st = replace(st, period=warm_period)
        try:
            sol = refine_orbit(potential, record, action, state=st,
                               steps=steps, method=method, max_iter=max_iter,
                               tol=tol, bound_radius=bound_radius)
        except RefinementError as err:
            failures.append((a, f"{type(err).__name__}: {err}"))
            continue
        solutions.append(sol)
        warm_period = sol.period
    return SweepResult(tuple(solutions), tuple(failures))


def export_csv(solution: PeriodicOrbitSolution, path) -> None:
    """Write the trajectory as t,x1..xn,v1..vn,E rows."""
    traj = solution.trajectory
    n = traj.states.shape[1] // 2
    header = (["t"] + [f"x{i + 1}" for i in range(n)]
              + [f"v{i + 1}" for i in range(n)] + ["E"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, s, e in zip(traj.times, traj.states, traj.energies):
            writer.writerow([repr(float(t))] + [repr(float(c)) for c in s]
                            + [repr(float(e))])
