"""Scalar and multidimensional root finding used by boundary and junction solvers."""

from __future__ import annotations

import math
from typing import Callable, List, Optional, Sequence

import numpy as np


class ConvergenceError(RuntimeError):
    """A nonlinear solve did not reach its tolerance."""

    def __init__(self, message: str, history: Sequence[float] = ()):
        super().__init__(message)
        self.history = list(history)


def _fd_slope(f, x, fx, h):
    fp = f(x + h)
    fm = f(x - h)
    if np.isfinite(fp) and np.isfinite(fm):
        return (fp - fm) / (2 * h)
    if np.isfinite(fp):
        return (fp - fx) / h
    if np.isfinite(fm):
        return (fx - fm) / h
    return float("nan")


def safeguarded_newton(f: Callable[[float], float], lo: float, hi: float,
                       df: Optional[Callable[[float], float]] = None,
                       tol: float = 1e-12, maxiter: int = 100) -> float:
    """Root of ``f`` in the bracket ``[lo, hi]`` (sign change required).

    Newton steps are taken while they stay inside the current bracket and
    shrink the residual; otherwise the bracket is bisected. Iteration stops
    once the step falls below machine resolution or ``|f| <= tol * scale``
    where ``scale`` is the larger bracket-end residual.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})")
    scale = max(abs(flo), abs(fhi))
    x = lo - flo * (hi - lo) / (fhi - flo)
    fx = f(x)
    history = []
    for _ in range(maxiter):
        history.append(abs(fx))
        if fx == 0:
            return x
        if fx * flo < 0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
        h = 1e-7 * max(abs(x), 1e-300)
        slope = df(x) if df is not None else _fd_slope(f, x, fx, h)
        xn = x - fx / slope if slope and np.isfinite(slope) else float("nan")
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        dx = abs(xn - x)
        if dx <= 4 * np.finfo(float).eps * abs(x) or (
                abs(fx) <= tol * scale and dx <= 1e-14 * abs(x)):
            return xn
        fxn = f(xn)
        if not np.isfinite(fxn):
            xn = 0.5 * (lo + hi)
            fxn = f(xn)
        x, fx = xn, fxn
    if abs(fx) <= tol * scale:
        return x
    raise ConvergenceError(f"scalar solve did not converge on [{lo}, {hi}]", history)


def bracketed_roots(f: Callable[[float], float], lo: float, hi: float,
                    samples: int = 64, geometric: bool = True,
                    f_many: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                    splits: Sequence[float] = ()) -> List[float]:
    """All roots of ``f`` on ``[lo, hi]`` detectable by sign changes on a grid.

    ``f`` may return nan where it is undefined; those samples are skipped.
    ``f_many`` evaluates the samples in one vectorised call. Points in
    ``splits`` are added to the grid, which keeps a known pole or branch
    point from being mistaken for a sign change when ``f`` is nan there.
    """
    if geometric and lo > 0:
        xs = np.geomspace(lo, hi, samples)
    else:
        xs = np.linspace(lo, hi, samples)
    extra = [x for x in splits if lo < x < hi]
    if extra:
        xs = np.unique(np.concatenate([xs, extra]))
    fs = np.asarray(f_many(xs), float) if f_many is not None else np.array([f(x) for x in xs])
    roots = []
    for k in range(xs.size - 1):
        a, b = fs[k], fs[k + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            roots.append(float(xs[k]))
        elif a * b < 0:
            roots.append(safeguarded_newton(f, float(xs[k]), float(xs[k + 1])))
    if np.isfinite(fs[-1]) and fs[-1] == 0:
        roots.append(float(xs[-1]))
    return roots


def damped_newton(residual: Callable[[np.ndarray], np.ndarray], x0,
                  jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                  tol: float = 1e-12, maxiter: int = 50, admissible=None,
                  fd_step: float = 1e-7) -> np.ndarray:
    """Newton-Raphson with residual-halving damping.

    ``residual`` should already be scaled to be dimensionless; convergence is
    declared when its infinity norm drops below ``tol`` or the iteration
    stalls at rounding level. ``admissible(x)`` may reject trial points (for
    instance nonpositive areas), which triggers further damping.
    """
    x = np.array(x0, dtype=float)
    r = residual(x)
    history = [float(np.max(np.abs(r)))]
    for _ in range(maxiter):
        if history[-1] <= tol:
            break
        J = jacobian(x) if jacobian is not None else _fd_jacobian(residual, x, r, fd_step)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian: {exc}", history) from exc
        theta = 1.0
        while True:
            xt = x + theta * step
            ok = admissible is None or admissible(xt)
            if ok:
                rt = residual(xt)
                nt = float(np.max(np.abs(rt)))
                if np.isfinite(nt) and nt < history[-1]:
                    break
            theta *= 0.5
            if theta < 1e-10:
                xt = None
                break
        if xt is None:
            # no decrease possible; accept if already at rounding level
            if history[-1] <= max(tol, 1e-13) * 1e3:
                break
            raise ConvergenceError("damped Newton stalled", history)
        x, r = xt, rt
        history.append(nt)
    if history[-1] > tol:
        raise ConvergenceError(f"damped Newton reached residual {history[-1]:.3e}", history)
    # polish to rounding level with a couple of undamped steps
    for _ in range(3):
        J = jacobian(x) if jacobian is not None else _fd_jacobian(residual, x, r, fd_step)
        try:
            xt = x + np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        if admissible is not None and not admissible(xt):
            break
        rt = residual(xt)
        if not np.max(np.abs(rt)) < np.max(np.abs(r)):
            break
        x, r = xt, rt
    return x


def _fd_jacobian(residual, x, r, step):
    n = x.size
    J = np.empty((r.size, n))
    for k in range(n):
        h = step * max(abs(x[k]), 1.0)
        xp = x.copy()
        xp[k] += h
        xm = x.copy()
        xm[k] -= h
        J[:, k] = (residual(xp) - residual(xm)) / (2 * h)
    return J


def quadratic_roots(a: float, b: float, c: float):
    """Roots of a q^2 + b q + c in cancellation-free form.

    Returns ``(regular, other)`` where ``regular`` stays finite as ``a -> 0``
    (it tends to ``-c/b``) and ``other`` is None when ``a == 0``. Both are nan
    for a negative discriminant.
    """
    if a == 0:
        return (-c / b if b != 0 else float("nan")), None
    disc = b * b - 4 * a * c
    if disc < 0:
        return float("nan"), float("nan")
    t = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if t == 0:
        return 0.0, 0.0
    return c / t, t / a
