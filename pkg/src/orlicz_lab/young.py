"""Young functions, Legendre conjugates and growth indices.

A Young function is stored through two vectorised callables: ``func`` (the
value, on signed input) and ``deriv`` (the left derivative, on ``x >= 0``).
Closed-form families register their conjugates so that ``conjugate`` can
short-circuit; every family can also be conjugated numerically on a grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, GridResolutionError, InvariantViolation, NotApplicableError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

__all__ = [
    "YoungFunction",
    "Delta2Report",
    "TruncatedPsi",
    "power",
    "quadratic",
    "entropic",
    "xlogx",
    "exp_minus_one",
    "exp_minus_one_dual",
    "piecewise",
    "from_config",
    "check_young",
    "default_grid",
    "conjugate",
    "delta2_index",
    "doubling_oracle",
    "make_truncated_psi",
]


def _out(x, values):
    return float(values) if np.ndim(x) == 0 else values


@dataclass(frozen=True)
class YoungFunction:
    """Even convex function with ``Phi(0) = 0``.

    ``deriv_inverse(t)``, when given, must return ``sup{x >= 0: Phi'(x) <= t}``;
    otherwise it is found by bisection on ``deriv``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    kind: str
    params: Mapping = field(default_factory=dict)
    x_max: float = 50.0
    deriv_inverse: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, x):
        a = np.asarray(x, dtype=float)
        return _out(x, np.asarray(self.func(a), dtype=float))

    def derivative(self, x):
        """Left derivative, extended as an odd function."""
        a = np.asarray(x, dtype=float)
        return _out(x, np.sign(a) * np.asarray(self.deriv(np.abs(a)), dtype=float))

    def inverse_derivative(self, t):
        """Upper generalised inverse of ``Phi'`` on ``t >= 0``."""
        t = np.asarray(t, dtype=float)
        if self.deriv_inverse is not None:
            return _out(t, np.asarray(self.deriv_inverse(t), dtype=float))
        hi = np.full(t.shape, max(self.x_max, 1.0))
        for _ in range(200):
            grow = self.deriv(hi) <= t
            if not grow.any():
                break
            hi = np.where(grow, hi * 2.0, hi)
        lo = np.zeros_like(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            ok = self.deriv(mid) <= t
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
            if np.all(hi - lo <= 1e-15 * (1.0 + hi)):
                break
        return _out(t, lo)

    def conjugate(self, **kwargs) -> "YoungFunction":
        return conjugate(self, **kwargs)

    def describe(self) -> dict:
        params = {k: v for k, v in self.params.items() if not callable(v) and not isinstance(v, YoungFunction)}
        return {"kind": self.kind, "parameters": params, "x_max": self.x_max}

    def __repr__(self) -> str:
        return f"YoungFunction(kind={self.kind!r}, params={dict(self.describe()['parameters'])!r})"


# ----------------------------------------------------------------------------
# closed-form families


def power(p: float, scale: float = 1.0, x_max: float = 50.0) -> YoungFunction:
    """``scale * |x|**p`` for ``p > 1``."""
    if p <= 1.0 or scale <= 0.0:
        raise InvariantViolation(f"power family needs p > 1 and scale > 0, got p={p}, scale={scale}")
    c = float(scale)
    return YoungFunction(
        func=lambda x: c * np.abs(x) ** p,
        deriv=lambda x: c * p * np.asarray(x, dtype=float) ** (p - 1.0),
        deriv_inverse=lambda t: (np.maximum(t, 0.0) / (c * p)) ** (1.0 / (p - 1.0)),
        kind="power",
        params={"p": float(p), "scale": c},
        x_max=x_max,
    )


def quadratic(x_max: float = 50.0) -> YoungFunction:
    """``x**2 / 2``, its own conjugate."""
    return YoungFunction(
        func=lambda x: 0.5 * np.square(x),
        deriv=lambda x: np.asarray(x, dtype=float),
        deriv_inverse=lambda t: np.maximum(t, 0.0),
        kind="quadratic",
        x_max=x_max,
    )


def entropic(x_max: float = 25.0) -> YoungFunction:
    """``exp(|x|) - |x| - 1``; conjugate of :func:`xlogx`."""
    return YoungFunction(
        func=lambda x: np.expm1(np.abs(x)) - np.abs(x),
        deriv=lambda x: np.expm1(x),
        deriv_inverse=lambda t: np.log1p(np.maximum(t, 0.0)),
        kind="entropic",
        x_max=x_max,
    )


def xlogx(x_max: float = 50.0) -> YoungFunction:
    """``(1 + |x|) log(1 + |x|) - |x|``."""
    return YoungFunction(
        func=lambda x: (1.0 + np.abs(x)) * np.log1p(np.abs(x)) - np.abs(x),
        deriv=lambda x: np.log1p(x),
        deriv_inverse=lambda t: np.expm1(np.maximum(t, 0.0)),
        kind="xlogx",
        x_max=x_max,
    )


def exp_minus_one(x_max: float = 25.0) -> YoungFunction:
    """``exp(|x|) - 1``; fails the doubling condition."""

    def deriv(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, np.exp(x), 0.0)

    def inv(t):
        with np.errstate(divide="ignore"):
            return np.where(t > 1.0, np.log(np.maximum(t, 1.0)), 0.0)

    return YoungFunction(
        func=lambda x: np.expm1(np.abs(x)),
        deriv=deriv,
        deriv_inverse=inv,
        kind="exp_minus_one",
        x_max=x_max,
    )


def exp_minus_one_dual(x_max: float = 1e6) -> YoungFunction:
    """``(|y| log|y| - |y| + 1)`` on ``|y| >= 1``, zero below."""

    def func(x):
        a = np.abs(x)
        s = np.maximum(a, 1.0)
        return np.where(a > 1.0, s * np.log(s) - s + 1.0, 0.0)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 1.0, np.log(np.maximum(x, 1.0)), 0.0)

    return YoungFunction(
        func=func,
        deriv=deriv,
        deriv_inverse=lambda t: np.exp(np.maximum(t, 0.0)),
        kind="exp_minus_one_dual",
        x_max=x_max,
    )


def piecewise(breakpoints: Sequence[Sequence[float]], tail: float = 1.0, x_max: float | None = None) -> YoungFunction:
    """Piecewise-linear Young function through ``(x, Phi(x))`` breakpoints.

    Beyond the last breakpoint the last slope continues with an added
    quadratic term of curvature ``tail`` so that the function stays coercive.
    At kinks the derivative is the left limit.
    """
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise InvariantViolation("breakpoints must be a list of at least two (x, value) pairs")
    xs, vs = pts[:, 0], pts[:, 1]
    if xs[0] != 0.0 or vs[0] != 0.0:
        raise InvariantViolation("first breakpoint must be (0, 0)")
    if np.any(np.diff(xs) <= 0):
        raise InvariantViolation("breakpoint abscissae must be strictly increasing")
    slopes = np.diff(vs) / np.diff(xs)
    if np.any(slopes < 0) or np.any(np.diff(slopes) < -1e-12):
        raise InvariantViolation("breakpoint slopes must be nonnegative and nondecreasing")
    if tail <= 0:
        raise InvariantViolation("tail curvature must be positive")
    x_last, s_last = xs[-1], slopes[-1]

    def func(x):
        a = np.abs(np.asarray(x, dtype=float))
        inner = np.interp(np.minimum(a, x_last), xs, vs)
        d = np.maximum(a - x_last, 0.0)
        return inner + s_last * d + 0.5 * tail * d * d

    def deriv(x):
        a = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(xs, a, side="left") - 1, 0, len(slopes) - 1)
        inner = np.where(a > 0.0, slopes[idx], 0.0)
        return np.where(a > x_last, s_last + tail * (a - x_last), inner)

    def inv(t):
        t = np.asarray(t, dtype=float)
        # sup{x : Phi'(x) <= t}: the right end of the last segment whose slope is <= t
        k = np.searchsorted(slopes, t, side="right")
        inner = np.where(k > 0, xs[np.minimum(k, len(xs) - 1)], 0.0)
        return np.where(t >= s_last, x_last + (t - s_last) / tail, inner)

    return YoungFunction(
        func=func,
        deriv=deriv,
        deriv_inverse=inv,
        kind="piecewise",
        params={"breakpoints": pts.tolist(), "tail": float(tail)},
        x_max=float(x_max) if x_max is not None else max(4.0 * x_last, 10.0),
    )


def from_config(entry: Mapping) -> YoungFunction:
    """Build a Young function from ``{kind, parameters, x_max}``."""
    if "kind" not in entry:
        raise InvariantViolation("young config needs a 'kind'")
    kind = entry["kind"]
    params = dict(entry.get("parameters", {}))
    kw = {"x_max": float(entry["x_max"])} if "x_max" in entry else {}
    builders = {
        "power": lambda: power(params["p"], params.get("scale", 1.0), **kw),
        "quadratic": lambda: quadratic(**kw),
        "entropic": lambda: entropic(**kw),
        "xlogx": lambda: xlogx(**kw),
        "exp_minus_one": lambda: exp_minus_one(**kw),
        "exp_minus_one_dual": lambda: exp_minus_one_dual(**kw),
        "piecewise": lambda: piecewise(params["breakpoints"], params.get("tail", 1.0), entry.get("x_max")),
    }
    if kind not in builders:
        raise InvariantViolation(f"unknown young kind {kind!r}")
    try:
        return builders[kind]()
    except KeyError as exc:
        raise InvariantViolation(f"young kind {kind!r} is missing parameter {exc}") from None


# ----------------------------------------------------------------------------
# invariants and grids


def _clean_grid(points) -> np.ndarray:
    """Sorted absolute values with near-duplicates removed."""
    g = np.unique(np.abs(np.asarray(points, dtype=float)))
    if len(g) < 2:
        return g
    keep = np.concatenate([[True], np.diff(g) > 1e-12 * np.maximum(g[1:], 1e-300)])
    return g[keep]


def default_grid(x_max: float, n: int = 2001) -> np.ndarray:
    lin = np.linspace(0.0, x_max, n)
    geo = np.geomspace(x_max * 1e-9, x_max, max(n // 4, 2))
    return _clean_grid(np.concatenate([lin, geo]))


def validation_grid(x_max: float) -> np.ndarray:
    """Moderately spaced grid for invariant checks (finite differences stay well conditioned)."""
    return _clean_grid(np.concatenate([np.linspace(0.0, x_max, 401), np.geomspace(x_max * 1e-4, x_max, 100)]))


def check_young(phi: YoungFunction, grid=None, tol: float = 1e-9, quadrature: bool = True) -> None:
    """Raise :class:`InvariantViolation` if ``phi`` is not a Young function on ``grid``."""
    grid = validation_grid(phi.x_max) if grid is None else _clean_grid(grid)
    if len(grid) < 3:
        raise GridResolutionError("need at least three grid points to certify convexity")
    with np.errstate(over="ignore", invalid="ignore"):
        v = phi(grid)
        if abs(float(phi(0.0))) > tol:
            raise InvariantViolation(f"Phi(0) = {float(phi(0.0))} != 0")
        vneg = phi(-grid)
    scale = 1.0 + np.abs(v)
    fin = np.isfinite(v) & np.isfinite(vneg)
    if np.any(np.abs(v - vneg)[fin] > tol * scale[fin]):
        raise InvariantViolation("Phi is not even on the grid")
    if np.any(v < -tol):
        raise InvariantViolation("Phi takes negative values")
    h = np.diff(grid)
    slopes = np.diff(v) / h
    # rounding in Phi is amplified by 1/h on finely spaced grids
    noise = 8.0 * np.finfo(float).eps * (np.abs(v[1:]) + np.abs(v[:-1]) + 1.0) / h
    ok = np.isfinite(slopes)
    s, e = slopes[ok], noise[ok]
    if np.any(np.diff(s) < -tol * (1.0 + np.abs(s[:-1])) - e[:-1] - e[1:]):
        raise InvariantViolation("Phi is not convex on the grid")
    fin = np.isfinite(v)
    g, vv = grid[fin], v[fin]
    ratio = vv[1:] / g[1:] if g[0] == 0.0 else vv / g
    if np.any(np.diff(ratio) < -tol * (1.0 + np.abs(ratio[:-1]))):
        raise InvariantViolation("Phi(x)/x is not nondecreasing on the grid")
    if quadrature:
        d = np.asarray(phi.deriv(g), dtype=float)
        if np.any(np.diff(d) < -tol * (1.0 + np.abs(d[:-1]))):
            raise InvariantViolation("Phi' is not nondecreasing on the grid")
        hh = np.diff(g)
        integral = vv[0] + np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * hh)])
        # trapezoid error plus half a jump per cell for kinks between grid points
        slack = 1e-3 * (1.0 + np.abs(vv)) + np.concatenate([[0.0], np.cumsum(0.5 * hh * np.abs(np.diff(d)))])
        if np.any(np.abs(integral - vv) > slack):
            raise InvariantViolation("Phi differs from the integral of its derivative")


# ----------------------------------------------------------------------------
# conjugation


def _golden_max(f, lo, hi, iters):
    a, b = lo.copy(), hi.copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = f(c), f(d)
    take_c = fc >= fd
    return np.where(take_c, c, d), np.where(take_c, fc, fd)


class _GridLegendre:
    """Evaluates ``sup_x (x y - Phi(x))`` on a grid, then refines by golden section."""

    def __init__(self, phi: YoungFunction, grid: np.ndarray, rounds: int, iters_per_round: int = 30):
        self.phi = phi
        self.grid = grid
        with np.errstate(over="ignore"):
            self.vals = phi(grid)
        self.iters = rounds * iters_per_round
        self.edge_slope = float(phi.deriv(np.asarray(grid[-1])))

    def solve(self, y):
        y = np.abs(np.asarray(y, dtype=float)).ravel()
        vals = np.empty_like(y)
        args = np.empty_like(y)
        G = len(self.grid)
        step = max(1, (1 << 21) // G)
        for s in range(0, len(y), step):
            yy = y[s : s + step]
            with np.errstate(over="ignore", invalid="ignore"):
                M = yy[:, None] * self.grid[None, :] - self.vals[None, :]
            M = np.where(np.isnan(M), -np.inf, M)
            i = np.argmax(M, axis=1)
            if np.any((i == G - 1) & (yy > self.edge_slope * (1.0 + 1e-12))):
                bad = float(yy[(i == G - 1)].max())
                raise GridResolutionError(
                    f"conjugate argmax at grid edge for y={bad:g}; extend the grid beyond x={self.grid[-1]:g}"
                )
            best = M[np.arange(len(yy)), i]
            lo = self.grid[np.maximum(i - 1, 0)]
            hi = self.grid[np.minimum(i + 1, G - 1)]

            def obj(x, yy=yy):
                with np.errstate(over="ignore", invalid="ignore"):
                    r = yy * x - self.phi(x)
                return np.where(np.isnan(r), -np.inf, r)

            xr, vr = _golden_max(obj, lo, hi, self.iters)
            better = vr > best
            vals[s : s + step] = np.where(better, vr, best)
            args[s : s + step] = np.where(better, xr, self.grid[i])
        return vals, args

    def value(self, y):
        shape = np.shape(y)
        return self.solve(y)[0].reshape(shape)

    def argmax(self, y):
        shape = np.shape(y)
        return self.solve(y)[1].reshape(shape)


def _closed_conjugate(phi: YoungFunction) -> YoungFunction | None:
    x_max = float(phi.deriv(np.asarray(phi.x_max)))
    kind = phi.kind
    if kind == "power":
        p, c = phi.params["p"], phi.params["scale"]
        q = p / (p - 1.0)
        return power(q, c * (p - 1.0) * (c * p) ** (-q), x_max=x_max)
    if kind == "quadratic":
        return quadratic(x_max=x_max)
    pairs = {
        "entropic": xlogx,
        "xlogx": entropic,
        "exp_minus_one": exp_minus_one_dual,
        "exp_minus_one_dual": exp_minus_one,
    }
    if kind in pairs:
        return pairs[kind](x_max=x_max)
    return None


def conjugate(phi: YoungFunction, grid=None, method: str = "auto", rounds: int = 3, validate: bool = True) -> YoungFunction:
    """Legendre conjugate ``Phi*(y) = sup_x (x y - Phi(x))``.

    ``method="auto"`` uses the closed-form registry when the family is known
    and falls back to the grid transform otherwise; ``"numeric"`` always uses
    the grid (maximise over ``grid``, then ``rounds`` rounds of golden-section
    refinement inside the bracketing cell).  The returned function's derivative
    is the maximiser, and its ``x_max`` is the slope of ``phi`` at the grid end,
    beyond which the grid cannot resolve the supremum.
    """
    if method not in ("auto", "numeric", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "closed"):
        closed = _closed_conjugate(phi)
        if closed is not None:
            return closed
        if method == "closed":
            raise NotApplicableError(f"no closed-form conjugate for kind {phi.kind!r}")
    grid = default_grid(phi.x_max) if grid is None else _clean_grid(grid)
    if grid[0] != 0.0:
        grid = np.concatenate([[0.0], grid])
    if len(grid) < 3:
        raise GridResolutionError("conjugate grid needs at least three points")
    if validate:
        check_young(phi, validation_grid(grid[-1]))
    engine = _GridLegendre(phi, grid, rounds)

    def inv(t):
        # the conjugate's derivative inverse is phi's derivative
        return phi.deriv(np.asarray(t, dtype=float))

    return YoungFunction(
        func=engine.value,
        deriv=engine.argmax,
        deriv_inverse=inv,
        kind="numeric_conjugate",
        params={"base": phi.describe(), "grid_points": int(len(grid)), "rounds": rounds},
        x_max=engine.edge_slope,
    )


# ----------------------------------------------------------------------------
# growth indices


@dataclass(frozen=True)
class Delta2Report:
    x_grid: np.ndarray
    p_phi_of_x: np.ndarray
    p_phi: float
    q_phi: float
    is_delta2: bool
    scan_grid: str
    scan_start: float
    cutoff_trace: tuple[tuple[float, float], ...]

    @property
    def diverging(self) -> bool:
        ps = [p for _, p in self.cutoff_trace]
        return all(b > a for a, b in zip(ps, ps[1:]))


def _zero_set_end(phi: YoungFunction, hi: float) -> float:
    """Largest ``y`` with ``Phi(y) == 0`` (0 for strictly positive Phi)."""
    if float(phi(1e-12)) > 0.0:
        return 0.0
    if float(phi(hi)) == 0.0:
        raise DomainError(f"Phi vanishes on the whole scan range [0, {hi:g}]")
    lo = 1e-12
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(phi(mid)) > 0.0:
            hi = mid
        else:
            lo = mid
    return lo


def _elasticity(phi: YoungFunction, y: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = phi(y)
        if np.any(v == 0.0):
            bad = float(y[v == 0.0][0])
            raise DomainError(f"Phi(y) = 0 at scanned y = {bad:g}; start the scan above the zero set")
        r = y * phi.deriv(y) / v
    return np.where(np.isfinite(r), r, np.inf)


def delta2_index(phi: YoungFunction, x_grid=None, y_cutoff: float = 100.0, n_y: int = 4000, tol: float = 1e-4) -> Delta2Report:
    """Scan ``p_Phi(x) = sup_{y > x} y Phi'(y) / Phi(y)`` on a logarithmic grid.

    The scan is repeated with the cutoff doubled twice; the function is
    classified as doubling (Delta2) when both doublings move the index by less
    than ``tol``.
    """
    start = _zero_set_end(phi, y_cutoff)
    if x_grid is None:
        lo = max(start * (1.0 + 1e-6), 1e-3) if start > 0 else 1e-3
        x_grid = np.geomspace(lo, y_cutoff / 4.0, 100)
    x_grid = np.sort(np.asarray(x_grid, dtype=float))
    if x_grid[-1] >= y_cutoff:
        raise GridResolutionError("x grid must stay below the y cutoff")
    trace = []
    p_of_x = None
    for cutoff in (y_cutoff, 2.0 * y_cutoff, 4.0 * y_cutoff):
        ys = np.geomspace(max(x_grid[0], 1e-12), cutoff, n_y)[1:]
        r = _elasticity(phi, ys)
        tail_max = np.maximum.accumulate(r[::-1])[::-1]
        idx = np.searchsorted(ys, x_grid, side="right")
        p_of_x = np.where(idx < len(ys), tail_max[np.minimum(idx, len(ys) - 1)], -np.inf)
        trace.append((cutoff, float(np.min(p_of_x))))
    ps = [p for _, p in trace]
    stable = all(np.isfinite(ps)) and abs(ps[1] - ps[0]) < tol and abs(ps[2] - ps[1]) < tol
    p_phi = ps[-1] if stable else math.inf
    if not math.isfinite(p_phi):
        q_phi = 1.0
    elif p_phi <= 1.0:
        q_phi = math.inf
    else:
        q_phi = p_phi / (p_phi - 1.0)
    return Delta2Report(
        x_grid=x_grid,
        p_phi_of_x=p_of_x,
        p_phi=p_phi,
        q_phi=q_phi,
        is_delta2=bool(stable),
        scan_grid=f"geometric, {n_y} points on ({x_grid[0]:g}, cutoff], cutoffs {[c for c, _ in trace]}",
        scan_start=start,
        cutoff_trace=tuple(trace),
    )


def doubling_oracle(phi: YoungFunction, cutoff: float = 100.0, n: int = 2000, tol: float = 1e-4) -> tuple[bool, tuple[float, ...]]:
    """Classical test: is ``max Phi(2x)/Phi(x)`` over ``[X/2, X]`` bounded as ``X`` doubles?"""
    trace = []
    for X in (cutoff, 2.0 * cutoff, 4.0 * cutoff):
        xs = np.linspace(X / 2.0, X, n)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            r = phi(2.0 * xs) / phi(xs)
        r = np.where(np.isfinite(r), r, np.inf)
        trace.append(float(np.max(r)))
    ok = all(math.isfinite(t) for t in trace) and all(b <= a * (1.0 + tol) for a, b in zip(trace, trace[1:]))
    return ok, tuple(trace)


# ----------------------------------------------------------------------------
# truncation


@dataclass(frozen=True)
class TruncatedPsi:
    """``Psi(x) = (Phi(x0)/x0) |x|`` on ``[0, x0]`` and ``Phi(x)`` beyond."""

    base: YoungFunction
    x0: float
    p: float
    young: YoungFunction

    def __call__(self, x):
        return self.young(x)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def growth_slack(self, xs, lambdas) -> float:
        """``min (lambda^p Psi(x) - Psi(lambda x))`` over the grid, relative to scale."""
        xs = np.asarray(xs, dtype=float)[:, None]
        lam = np.asarray(lambdas, dtype=float)[None, :]
        if np.any(lam < 1.0) or np.any(xs <= 0):
            raise DomainError("growth bound is stated for x > 0 and lambda >= 1")
        rhs = lam**self.p * self.young(xs)
        lhs = self.young(lam * xs)
        return float(np.min((rhs - lhs) / np.maximum(1.0, np.abs(rhs))))


def make_truncated_psi(phi: YoungFunction, x0: float, p: float | None = None, margin: float = 0.5, y_cutoff: float | None = None) -> TruncatedPsi:
    """Linearise ``phi`` on ``[0, x0]``; ``p`` defaults to ``p_Phi(x0) + margin``."""
    if x0 <= 0:
        raise DomainError("x0 must be positive")
    cutoff = y_cutoff if y_cutoff is not None else max(100.0, 8.0 * x0)
    rep = delta2_index(phi, x_grid=[x0], y_cutoff=cutoff)
    if not rep.is_delta2:
        raise NotApplicableError(f"p_Phi({x0:g}) is infinite; no growth exponent exists")
    p_at = max(float(rep.p_phi_of_x[0]), 1.0)
    if p is None:
        p = p_at + margin
    elif p <= p_at:
        raise DomainError(f"p = {p} must exceed p_Phi(x0) = {p_at}")
    slope = float(phi(x0)) / x0
    if slope <= 0:
        raise NotApplicableError("Phi(x0) must be positive")

    def func(x):
        a = np.abs(np.asarray(x, dtype=float))
        return np.where(a <= x0, slope * a, phi(a))

    def deriv(x):
        a = np.asarray(x, dtype=float)
        return np.where(a <= x0, np.where(a > 0, slope, 0.0), phi.deriv(a))

    def inv(t):
        t = np.asarray(t, dtype=float)
        return np.where(t < slope, 0.0, np.maximum(x0, phi.inverse_derivative(t)))

    young = YoungFunction(
        func=func,
        deriv=deriv,
        deriv_inverse=inv,
        kind="truncated",
        params={"x0": float(x0), "p": float(p), "base": phi.describe()},
        x_max=phi.x_max,
    )
    return TruncatedPsi(base=phi, x0=float(x0), p=float(p), young=young)
