"""The warping-function ODE family: integration, invariants, periodic orbits.

Central equation (constant total scalar curvature R, dimension n):

    hddot + R/(n(n-1)) h = c1 h^(1-n)

with first integral

    hdot^2 + R/(n(n-1)) h^2 - Rbar/((n-1)(n-2)) = tau h^(2-n),
    tau = -2 c1 / (n-2),

and third-order form  h''' + (n-1) hdot hddot / h + R hdot/(n-1) = 0.

Integration is fixed-step classical RK4 (deterministic grids); the hdot = 0
events for the periodic-orbit search are located by bisection with RK4
sub-steps from the bracketing grid point.  Because solutions of the second-
order equation are analytic in (h, hdot), jets of h at any time follow from
the ODE by Taylor recursion, which is how numerically defined warpings
enter :class:`~warpcheck.geometry.MetricChart` without losing smoothness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, jet_space

__all__ = [
    "WarpOdeParams",
    "Trajectory",
    "PositivityLost",
    "NoPeriodicOrbit",
    "integrate_warpedvss",
    "first_integral",
    "third_order_residual",
    "scalar_from_h",
    "find_periodic_solution",
    "kernel_reduction_check",
    "equilibrium_radius",
    "rbar_from_initial",
    "c1_for_fiber_scalar",
    "OdeWarpingFunction",
    "trajectory_csv_rows",
    "H_MIN",
]

H_MIN = 1e-8


class PositivityLost(RuntimeError):
    """h reached the positivity floor; carries the last valid time."""

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"warping function lost positivity at t = {t:.6g}")


class NoPeriodicOrbit(RuntimeError):
    pass


@dataclass(frozen=True)
class WarpOdeParams:
    """Parameters of the constant-scalar warping ODE; tau is derived from c1."""

    n: int
    scalar: float
    rbar: float
    c1: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"dimension must be >= 3, got {self.n}")

    @property
    def tau(self) -> float:
        return -2.0 * self.c1 / (self.n - 2.0)

    def rhs(self, h: float) -> float:
        return self.c1 * h ** (1.0 - self.n) - self.scalar / (self.n * (self.n - 1.0)) * h

    def rhs_prime(self, h: float) -> float:
        return self.c1 * (1.0 - self.n) * h ** (-float(self.n)) - self.scalar / (self.n * (self.n - 1.0))


def equilibrium_radius(params: WarpOdeParams) -> float:
    """The constant solution h_eq = (c1 n(n-1)/R)^(1/n) (needs R, c1 > 0)."""
    if params.scalar <= 0 or params.c1 <= 0:
        raise ValueError("equilibrium requires scalar > 0 and c1 > 0")
    return (params.c1 * params.n * (params.n - 1.0) / params.scalar) ** (1.0 / params.n)


def rbar_from_initial(params: WarpOdeParams, h0: float, hdot0: float) -> float:
    """Fiber scalar that makes the first integral vanish at (h0, hdot0)."""
    n = params.n
    return (n - 1.0) * (n - 2.0) * (
        hdot0**2 + params.scalar / (n * (n - 1.0)) * h0**2 - params.tau * h0 ** (2.0 - n)
    )


def c1_for_fiber_scalar(n: int, scalar: float, rbar: float, h0: float, hdot0: float = 0.0) -> float:
    """The c1 whose first integral matches a prescribed fiber scalar at (h0, hdot0)."""
    tau = (hdot0**2 + scalar / (n * (n - 1.0)) * h0**2 - rbar / ((n - 1.0) * (n - 2.0))) * h0 ** (n - 2.0)
    return -(n - 2.0) * tau / 2.0


@dataclass
class Trajectory:
    params: WarpOdeParams
    times: np.ndarray
    h: np.ndarray
    hdot: np.ndarray
    dt: float
    events: list[float] = field(default_factory=list)  # hdot zero crossings
    method: str = "rk4"

    def state(self, index: int) -> tuple[float, float]:
        return float(self.h[index]), float(self.hdot[index])


def _rk4_step(params: WarpOdeParams, h: float, v: float, dt: float) -> tuple[float, float]:
    def f(hh, vv):
        return vv, params.rhs(hh)

    k1h, k1v = f(h, v)
    k2h, k2v = f(h + 0.5 * dt * k1h, v + 0.5 * dt * k1v)
    k3h, k3v = f(h + 0.5 * dt * k2h, v + 0.5 * dt * k2v)
    k4h, k4v = f(h + dt * k3h, v + dt * k3v)
    return (
        h + dt / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h),
        v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v),
    )


def integrate_warpedvss(
    params: WarpOdeParams, h0: float, hdot0: float, t_end: float, dt: float, t_start: float = 0.0
) -> Trajectory:
    """Classical fixed-step RK4 from (h0, hdot0); errors out if h <= H_MIN."""
    if h0 <= 0:
        raise ValueError(f"initial warping value must be positive, got {h0}")
    if dt <= 0:
        raise ValueError(f"step size must be positive, got {dt}")
    steps = max(1, int(round((t_end - t_start) / dt)))
    times = t_start + np.arange(steps + 1) * dt
    hs = np.empty(steps + 1)
    vs = np.empty(steps + 1)
    hs[0], vs[0] = h0, hdot0
    events: list[float] = []
    for i in range(steps):
        h_new, v_new = _rk4_step(params, hs[i], vs[i], dt)
        if not math.isfinite(h_new) or h_new <= H_MIN:
            raise PositivityLost(float(times[i]))
        hs[i + 1], vs[i + 1] = h_new, v_new
        if vs[i] == 0.0 or (vs[i] < 0.0) != (v_new < 0.0):
            events.append(float(times[i]))
    return Trajectory(params, times, hs, vs, dt, events)


def first_integral(params: WarpOdeParams, h, hdot):
    """lhs - tau h^(2-n); identically zero along exact solutions with matching Rbar."""
    h = np.asarray(h, dtype=float)
    hdot = np.asarray(hdot, dtype=float)
    n = params.n
    val = (
        hdot**2
        + params.scalar / (n * (n - 1.0)) * h**2
        - params.rbar / ((n - 1.0) * (n - 2.0))
        - params.tau * h ** (2.0 - n)
    )
    return val if val.shape else float(val)


def third_order_residual(params: WarpOdeParams, traj: Trajectory) -> float:
    """Max residual of the third-order form along the trajectory.

    hddot and the third derivative are obtained from the second-order
    right-hand side and its h-derivative, as the ODE dictates.
    """
    h, v = traj.h, traj.hdot
    hdd = np.array([params.rhs(x) for x in h])
    h3 = np.array([params.rhs_prime(x) for x in h]) * v
    resid = h3 + (params.n - 1.0) * v * hdd / h + params.scalar / (params.n - 1.0) * v
    return float(np.max(np.abs(resid)))


def scalar_from_h(params: WarpOdeParams, h: float, hdot: float, hddot: float) -> float:
    """Total scalar curvature from (h, hdot, hddot) and the fiber scalar."""
    n = params.n
    return (params.rbar - (n - 1.0) * (n - 2.0) * hdot**2 - 2.0 * (n - 1.0) * h * hddot) / h**2


def _propagate(params: WarpOdeParams, h: float, v: float, span: float, dt: float) -> tuple[float, float]:
    """Integrate over an arbitrary span with RK4 sub-steps of size <= dt."""
    if span == 0.0:
        return h, v
    steps = max(1, int(math.ceil(abs(span) / dt)))
    sub = span / steps
    for _ in range(steps):
        h, v = _rk4_step(params, h, v, sub)
    return h, v


def find_periodic_solution(
    params: WarpOdeParams,
    h0: float,
    dt: float = 1e-3,
    t_max: float = 200.0,
    equilibrium_tol: float = 1e-9,
) -> tuple[Trajectory, float]:
    """Locate the closed orbit through (h0, 0) in the oscillatory regime.

    Integrates until hdot returns to zero with h on the opposite side of the
    equilibrium radius (time T/2 by the time-reversal symmetry of the
    equation), refines the event time by bisection to ~1e-12, and returns a
    trajectory covering one full period.  The constant solution is reported
    with period 0.
    """
    if params.scalar <= 0 or params.c1 <= 0:
        raise NoPeriodicOrbit("oscillatory regime requires scalar > 0 and c1 > 0")
    h_eq = equilibrium_radius(params)
    if abs(h0 - h_eq) <= equilibrium_tol * max(1.0, h_eq):
        times = np.arange(2) * dt
        traj = Trajectory(params, times, np.full(2, h_eq), np.zeros(2), dt, method="equilibrium")
        return traj, 0.0

    h, v = h0, 0.0
    t = 0.0
    below = h0 < h_eq
    t_half = None
    while t < t_max:
        h_new, v_new = _rk4_step(params, h, v, dt)
        if h_new <= H_MIN:
            raise PositivityLost(t)
        crossed = (v != 0.0 and (v < 0.0) != (v_new < 0.0)) or v_new == 0.0
        opposite = (h_new > h_eq) if below else (h_new < h_eq)
        if crossed and opposite and t > 0.0:
            lo, hi = 0.0, dt
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                _, v_mid = _propagate(params, h, v, mid, dt)
                if (v < 0.0) != (v_mid < 0.0) or v_mid == 0.0:
                    hi = mid
                else:
                    lo = mid
                if hi - lo < 1e-13:
                    break
            t_half = t + 0.5 * (lo + hi)
            break
        h, v, t = h_new, v_new, t + dt
    if t_half is None:
        raise NoPeriodicOrbit(f"no return event found within t_max = {t_max}")

    period = 2.0 * t_half
    steps = max(8, int(math.ceil(period / dt)))
    traj = integrate_warpedvss(params, h0, 0.0, period, period / steps)
    return traj, period


def kernel_reduction_check(traj: Trajectory, f_of_t, hdot_floor: float = 1e-3, pre_tol: float = 1e-6):
    """Spread of f/hdot along a trajectory where hddot f - hdot fdot vanishes.

    ``f_of_t`` maps t to f(t) and must satisfy hddot f - hdot fdot = 0 along
    the trajectory (checked first; violations raise PreconditionSkip).  The
    spread is max - min of f/hdot over samples with |hdot| > hdot_floor.
    """
    from .residuals import PreconditionSkip

    params = traj.params
    fs = []
    fdots = []
    for t in traj.times:
        j = f_of_t(Jet.variable(0, float(t), 1, 1))
        if not isinstance(j, Jet):
            j = Jet.constant(float(j), 1, 1)
        fs.append(j.value)
        fdots.append(j.partial((1,)))
    fs = np.array(fs)
    fdots = np.array(fdots)
    hdd = np.array([params.rhs(x) for x in traj.h])
    numer = hdd * fs - traj.hdot * fdots
    scale = float(np.max(np.abs(hdd * fs)) + np.max(np.abs(traj.hdot * fdots)))
    if float(np.max(np.abs(numer))) > pre_tol * (1.0 + scale):
        raise PreconditionSkip(
            f"hddot f - hdot fdot is nonzero along the trajectory (max {np.max(np.abs(numer)):.3e})"
        )
    mask = np.abs(traj.hdot) > hdot_floor
    if not np.any(mask):
        raise PreconditionSkip("no samples with |hdot| above the floor")
    ratio = fs[mask] / traj.hdot[mask]
    return float(np.max(ratio) - np.min(ratio))


class OdeWarpingFunction:
    """A warping function defined by the ODE itself.

    Evaluation at a float interpolates the stored RK4 grid with sub-steps;
    evaluation at a Jet produces the exact Taylor jet of the ODE solution
    through the interpolated state, via the recursion
    (j+2)(j+1) a_{j+2} = [c1 H^(1-n) - R/(n(n-1)) H]_j.
    """

    def __init__(self, params: WarpOdeParams, traj: Trajectory, period: float | None = None):
        self.params = params
        self.traj = traj
        self.period = period

    def state_at(self, t: float) -> tuple[float, float]:
        times = self.traj.times
        t_local = float(t)
        if self.period:
            t_local = (t_local - times[0]) % self.period + times[0]
        t_local = min(max(t_local, float(times[0])), float(times[-1]))
        idx = int(np.clip(np.searchsorted(times, t_local) - 1, 0, len(times) - 2))
        h, v = self.traj.state(idx)
        return _propagate(self.params, h, v, t_local - float(times[idx]), self.traj.dt)

    def _taylor_coeffs(self, h: float, v: float, order: int) -> np.ndarray:
        n = self.params.n
        coeffs = np.zeros(order + 1)
        coeffs[0] = h
        if order >= 1:
            coeffs[1] = v
        space = jet_space(1, order)
        for j in range(order - 1):
            partial = Jet(space, np.pad(coeffs[: j + 2], (0, order - j - 1)))
            rhs = (
                partial.elem("pow_const", exponent=1.0 - n) * self.params.c1
                - partial * (self.params.scalar / (n * (n - 1.0)))
            )
            coeffs[j + 2] = rhs.coeffs[j] / ((j + 2.0) * (j + 1.0))
        return coeffs

    def __call__(self, t):
        if isinstance(t, Jet):
            t0 = t.value
            h, v = self.state_at(t0)
            coeffs = self._taylor_coeffs(h, v, t.order)
            # compose the 1-variable Taylor series with (t - t0)
            shifted = t - t0
            out = Jet.constant(float(coeffs[-1]), t.num_vars, t.order)
            for j in range(t.order - 1, -1, -1):
                out = out * shifted + float(coeffs[j])
            return out
        h, _ = self.state_at(float(t))
        return h


def trajectory_csv_rows(traj: Trajectory) -> list[str]:
    """CSV lines: t, h, hdot, first_integral_residual with 17 significant digits."""
    rows = ["t,h,hdot,first_integral_residual"]
    fi = first_integral(traj.params, traj.h, traj.hdot)
    for t, h, v, r in zip(traj.times, traj.h, traj.hdot, np.atleast_1d(fi)):
        rows.append(f"{t:.17g},{h:.17g},{v:.17g},{r:.17g}")
    return rows
