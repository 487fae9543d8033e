"""RMS-torque objective, BFGS solver and degree sweeps."""
from dataclasses import dataclass, field
import csv
import io
import math
import time

import numpy as np

from . import kernels
from .chebyshev import ChebyshevSeries, derivative_series
from .errors import DimensionError
from .plant import DEFAULT_QUADRATURE_NODES, FrictionModel, energy_decomposition, gauss_legendre
from .profile import (constraint_map, eliminate_constraints, scale_factors,
                      trapezoid13_state)

__all__ = [
    "OptimizationContext",
    "SolverResult",
    "SweepRow",
    "SweepTable",
    "rms_objective",
    "fd_gradient",
    "solve_bfgs",
    "reference_tau_rms",
    "degree_sweep",
    "SWEEP_HEADER",
]

SWEEP_HEADER = ("degree", "jerk_mode", "solver", "tau_rms_Nm", "saving_pct",
                "iterations", "wall_time_s")
FD_REL_STEP = 1e-6


def _derivative_matrix(n):
    """Matrix mapping Chebyshev coefficients (n+1) to those of the derivative."""
    D = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        e = np.zeros(n + 1)
        e[i] = 1.0
        d = derivative_series(ChebyshevSeries(e)).coeffs
        D[:d.size, i] = d
    return D


@dataclass(frozen=True, eq=False)
class OptimizationContext:
    """Everything the objective needs for one task.

    The affine maps from free coefficients to ``phi``, ``phi'`` and ``phi''``
    at the quadrature nodes are precomputed on construction.
    """

    task: object
    model: object
    friction: FrictionModel = FrictionModel()
    motor: object = None
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES
    _maps: tuple = field(init=False, repr=False)

    def __post_init__(self):
        nq = self.quadrature_nodes
        if int(nq) != nq or nq < 33 or nq % 2 == 0:
            raise ValueError("quadrature_nodes must be an odd integer >= 33")
        s = scale_factors(self.task)
        ms = self.model.scale
        if not np.allclose([s.a, s.b, s.c, s.d], [ms.a, ms.b, ms.c, ms.d], rtol=1e-12, atol=0):
            raise ValueError("property model was fitted for a different task")
        x, w = gauss_legendre(nq)
        n = self.task.degree
        V0 = np.polynomial.chebyshev.chebvander(x, n)
        D = _derivative_matrix(n)
        V1 = V0 @ D
        V2 = V1 @ D
        base, M = constraint_map(self.task)
        maps = tuple((V @ base, np.ascontiguousarray(V @ M)) for V in (V0, V1, V2))
        object.__setattr__(self, "_maps", (x, w, maps))

    @property
    def nodes(self):
        return self._maps[0]

    @property
    def weights(self):
        return self._maps[1]

    @property
    def dof(self):
        return self.task.dof

    def with_degree(self, degree, jerk_zero=None):
        return OptimizationContext(self.task.with_degree(degree, jerk_zero), self.model,
                                   self.friction, self.motor, self.quadrature_nodes)

    def with_nodes(self, quadrature_nodes):
        return OptimizationContext(self.task, self.model, self.friction, self.motor,
                                   quadrature_nodes)

    def _kernel_scalars(self):
        s = self.model.scale
        return (1.0 / (s.a * s.c), 1.0 / (s.a * s.a * s.c), 1.0 / s.e,
                self.friction.mu_v, self.model.J_m)

    def states(self, O):
        """``phi``, ``phi'``, ``phi''`` at the nodes for each row of ``O``."""
        O = np.atleast_2d(np.asarray(O, dtype=np.float64))
        if O.shape[1] != self.dof:
            raise DimensionError(f"expected {self.dof} free coefficients, got {O.shape[1]}")
        return tuple(a[None, :] + O @ B.T for a, B in self._maps[2])

    def torque(self, o):
        """Motor torque at the quadrature nodes for free coefficients ``o``."""
        o = np.asarray(o, dtype=np.float64).ravel()
        phi, dphi, ddphi = (s[0] for s in self.states(o.reshape(1, -1)))
        return kernels.motor_torque(phi, dphi, ddphi, *self.model.kernel_args(),
                                    *self._kernel_scalars())

    def rms_batch(self, O):
        """RMS torque for every row of the 2-D array ``O``."""
        O = np.asarray(O, dtype=np.float64)
        if O.ndim == 1:
            O = O.reshape(1, -1)
        phi, dphi, ddphi = self.states(O)
        return kernels.rms_batch(phi, dphi, ddphi, self.weights, *self.model.kernel_args(),
                                 *self._kernel_scalars())


def rms_objective(free_coeffs, ctx):
    """RMS motor torque [N m] over the move for free coefficients ``o``."""
    o = np.asarray(free_coeffs, dtype=np.float64).ravel()
    if o.size != ctx.dof:
        raise DimensionError(f"expected {ctx.dof} free coefficients, got {o.size}")
    return float(ctx.rms_batch(o.reshape(1, -1))[0])


def fd_gradient(ctx, o, rel_step=FD_REL_STEP):
    """Central finite-difference gradient of :func:`rms_objective`.

    All ``2 * dof`` perturbed points are evaluated in one batch.
    """
    o = np.asarray(o, dtype=np.float64).ravel()
    h = rel_step * np.maximum(1.0, np.abs(o))
    E = np.diag(h)
    vals = ctx.rms_batch(np.vstack([o + E, o - E]))
    k = o.size
    return (vals[:k] - vals[k:]) / (2.0 * h)


@dataclass(frozen=True, eq=False)
class SolverResult:
    free_coeffs: np.ndarray
    profile: object
    tau_rms: float
    iterations: int
    objective_evals: int
    wall_time: float
    solver: str
    converged: bool
    message: str = ""

    def summary(self):
        return {
            "solver": self.solver,
            "tau_rms_Nm": self.tau_rms,
            "iterations": self.iterations,
            "objective_evals": self.objective_evals,
            "wall_time_s": self.wall_time,
            "converged": self.converged,
            "message": self.message,
        }


def make_result(ctx, o, solver, iterations, evals, started, converged, message=""):
    o = np.asarray(o, dtype=np.float64).ravel()
    profile = eliminate_constraints(o, ctx.task)
    return SolverResult(o.copy(), profile, rms_objective(o, ctx), iterations, evals,
                        time.perf_counter() - started, solver, converged, message)


class _CountingObjective:
    def __init__(self, ctx):
        self.ctx = ctx
        self.evals = 0

    def f(self, o):
        self.evals += 1
        return rms_objective(o, self.ctx)

    def grad(self, o):
        self.evals += 2 * np.size(o)
        return fd_gradient(self.ctx, o)


@dataclass
class LineSearchResult:
    alpha: float
    f: float
    g: np.ndarray
    wolfe: bool


def strong_wolfe(f, grad, x, p, f0, g0, alpha=1.0, c1=1e-4, c2=0.9, max_iter=60):
    """Step length along ``p`` satisfying the strong Wolfe conditions.

    Bracketing phase followed by a zoom with safeguarded quadratic
    interpolation. Returns None when no step with sufficient decrease was
    found; if the zoom runs out of iterations the best sufficient-decrease
    step is returned with ``wolfe=False``.
    """
    d0 = float(g0 @ p)
    if d0 >= 0:
        return None

    def phi(a):
        v = f(x + a * p)
        return v if np.isfinite(v) else math.inf

    def dphi(a):
        g = grad(x + a * p)
        return float(g @ p), g

    def zoom(lo, hi, f_lo, f_hi, d_lo, g_lo):
        for _ in range(max_iter):
            width = hi - lo
            denom = 2.0 * (f_hi - f_lo - d_lo * width)
            a = lo - d_lo * width * width / denom if denom != 0 and np.isfinite(denom) else lo + 0.5 * width
            # keep the trial well inside the interval
            if not (min(lo, hi) + 0.1 * abs(width) <= a <= max(lo, hi) - 0.1 * abs(width)):
                a = lo + 0.5 * width
            fa = phi(a)
            if fa > f0 + c1 * a * d0 or fa >= f_lo:
                hi, f_hi = a, fa
            else:
                da, ga = dphi(a)
                if abs(da) <= -c2 * d0:
                    return LineSearchResult(a, fa, ga, True)
                if da * (hi - lo) >= 0:
                    hi, f_hi = lo, f_lo
                lo, f_lo, d_lo, g_lo = a, fa, da, ga
            if abs(hi - lo) <= 1e-16 * max(abs(lo), abs(hi)):
                break
        if lo > 0:
            return LineSearchResult(lo, f_lo, g_lo, False)
        return None

    a_prev, f_prev, d_prev, g_prev = 0.0, f0, d0, g0
    a = alpha
    for i in range(max_iter):
        fa = phi(a)
        if fa > f0 + c1 * a * d0 or (i > 0 and fa >= f_prev):
            return zoom(a_prev, a, f_prev, fa, d_prev, g_prev)
        da, ga = dphi(a)
        if abs(da) <= -c2 * d0:
            return LineSearchResult(a, fa, ga, True)
        if da >= 0:
            return zoom(a, a_prev, fa, f_prev, da, ga)
        a_prev, f_prev, d_prev, g_prev = a, fa, da, ga
        a = 2.0 * a
    return LineSearchResult(a_prev, f_prev, g_prev, False) if a_prev > 0 else None


def solve_bfgs(ctx, x0=None, max_iter=500, gtol=1e-8, ftol=1e-12, stall_iters=3,
               first_step=0.1):
    """Minimise the RMS torque with BFGS from ``o = 0``.

    Strong-Wolfe line search (``c1 = 1e-4``, ``c2 = 0.9``), central-difference
    gradients. Stops when ``max|g| < gtol * max(1, |f|)``, when the relative
    objective decrease stays below ``ftol`` for ``stall_iters`` consecutive
    iterations, or after ``max_iter`` iterations. If the line search finds no
    decrease even along the steepest-descent direction, the current point is
    returned with ``converged=False``. The initial inverse Hessian is scaled
    so the first step changes no coefficient by more than ``first_step``.
    """
    started = time.perf_counter()
    n = ctx.dof
    if n == 0:
        return make_result(ctx, [], "bfgs", 0, 1, started, True, "no free coefficients")
    obj = _CountingObjective(ctx)
    o = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    f = obj.f(o)
    g = obj.grad(o)

    def initial_inverse_hessian(g):
        return np.eye(n) * min(1.0, first_step / max(np.max(np.abs(g)), 1e-300))

    H = initial_inverse_hessian(g)
    fresh = True
    small = 0
    converged, message = False, "maximum iterations reached"
    it = 0
    while it < max_iter:
        if np.max(np.abs(g)) < gtol * max(1.0, abs(f)):
            converged, message = True, "gradient tolerance met"
            break
        p = -H @ g
        if g @ p >= 0:
            H, fresh = initial_inverse_hessian(g), True
            p = -H @ g
        ls = strong_wolfe(obj.f, obj.grad, o, p, f, g)
        if ls is None:
            if not fresh:
                # retry once along the scaled steepest-descent direction
                H, fresh = initial_inverse_hessian(g), True
                continue
            message = "line search failed"
            break
        it += 1
        s = ls.alpha * p
        y = ls.g - g
        ys = float(y @ s)
        if ys > 1e-14 * np.linalg.norm(y) * np.linalg.norm(s):
            if fresh:
                H = np.eye(n) * (ys / float(y @ y))
            rho = 1.0 / ys
            V = np.eye(n) - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
            fresh = False
        rel = (f - ls.f) / max(abs(f), 1e-300)
        small = small + 1 if rel < ftol else 0
        f, o, g = ls.f, o + s, ls.g
        if small >= stall_iters:
            converged, message = True, "relative decrease below tolerance"
            break
    return make_result(ctx, o, "bfgs", it, obj.evals, started, converged, message)


def reference_tau_rms(ctx, kind):
    """RMS torque of a reference law (``poly5``, ``poly7J0`` or ``trapezoid13``)."""
    if kind == "poly5":
        return rms_objective([], ctx.with_degree(5, jerk_zero=False))
    if kind == "poly7J0":
        return rms_objective([], ctx.with_degree(7, jerk_zero=True))
    if kind == "trapezoid13":
        # integrate each constant-acceleration phase separately (exact pieces)
        xg, wg = gauss_legendre(ctx.quadrature_nodes)
        total = 0.0
        edges = (-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            x = half * xg + 0.5 * (hi + lo)
            phi, dphi, ddphi = trapezoid13_state(x)
            tau = kernels.motor_torque(phi, dphi, ddphi, *ctx.model.kernel_args(),
                                       *ctx._kernel_scalars())
            total += half * float(wg @ (tau * tau))
        return math.sqrt(0.5 * total)
    raise ValueError(f"unknown reference profile {kind!r}")


@dataclass(frozen=True)
class SweepRow:
    degree: object
    jerk_mode: str
    solver: str
    tau_rms: float
    saving_pct: float
    iterations: object = ""
    wall_time: object = ""
    result: object = field(default=None, compare=False, repr=False)


@dataclass
class SweepTable:
    rows: list
    reference_tau_rms: float

    def results(self, solver=None):
        return [r for r in self.rows
                if r.result is not None and (solver is None or r.solver == solver)]

    def to_csv(self, fh=None, timing=True):
        """Write the table as CSV; returns the text when ``fh`` is None.

        ``timing=False`` leaves the wall-time column empty so repeated runs
        are byte-identical.
        """
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in self.rows:
            wall = r.wall_time if timing else ""
            w.writerow([r.degree, r.jerk_mode, r.solver, repr(float(r.tau_rms)),
                        repr(float(r.saving_pct)), r.iterations,
                        "" if wall == "" else repr(float(wall))])
        return out.getvalue() if fh is None else None


def degree_sweep(ctx, degrees, solver="bfgs", jerk_zero=None, seed=0, ga_options=None,
                 include_trapezoid=None):
    """Optimise every degree in ``degrees`` with the chosen solver(s).

    The first row is the reference law (poly5 or poly7J0); for jerk-free
    sweeps the 1/3 trapezoid is listed too unless ``include_trapezoid`` is
    False. ``saving_pct`` is ``100 * (ref - tau_rms) / ref``.
    """
    from .genetic import solve_ga

    if jerk_zero is None:
        jerk_zero = ctx.task.jerk_zero
    if solver not in ("bfgs", "ga", "both"):
        raise ValueError("solver must be 'bfgs', 'ga' or 'both'")
    solvers = ("bfgs", "ga") if solver == "both" else (solver,)
    mode = "J0" if jerk_zero else "JF"
    ref_kind = "poly7J0" if jerk_zero else "poly5"
    ref = reference_tau_rms(ctx, ref_kind)

    def saving(v):
        return 100.0 * (ref - v) / ref

    rows = [SweepRow(7 if jerk_zero else 5, mode, ref_kind, ref, saving(ref))]
    if include_trapezoid is None:
        include_trapezoid = not jerk_zero
    if include_trapezoid:
        trap = reference_tau_rms(ctx, "trapezoid13")
        rows.append(SweepRow("", mode, "trapezoid13", trap, saving(trap)))
    for n in degrees:
        sub = ctx.with_degree(int(n), jerk_zero)
        for name in solvers:
            if name == "bfgs":
                res = solve_bfgs(sub)
            else:
                res = solve_ga(sub, seed=seed, **(ga_options or {}))
            rows.append(SweepRow(int(n), mode, name, res.tau_rms, saving(res.tau_rms),
                                 res.iterations, res.wall_time, res))
    return SweepTable(rows, ref)


def energy_report(result, ctx):
    """Energy breakdown of a solver result (requires ``ctx.motor``)."""
    if ctx.motor is None:
        raise ValueError("context has no motor parameters")
    return energy_decomposition(result.profile, ctx.model, ctx.motor, ctx.friction,
                                ctx.quadrature_nodes)
