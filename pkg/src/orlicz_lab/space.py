"""Finite dyadic probability spaces and random variables on them.

The space at resolution ``k`` has the ``2**k`` atoms ``[i/2^k, (i+1)/2^k)``.
Expectations are summed with ``math.fsum`` so that refining a variable leaves
every expectation bit-for-bit unchanged.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, InvariantViolation, SpaceMismatchError

__all__ = [
    "DyadicSpace",
    "RandomVariable",
    "OrderInterval",
    "constant",
    "indicator",
    "interval_indicator",
    "dyadic_block",
    "sup",
    "l0_metric",
    "ui_modulus",
    "ui_profile",
    "refine",
    "common_refinement",
    "convex_combination",
    "rv_from_config",
]


class DyadicSpace:
    """Probability space on the ``2**k`` dyadic atoms of ``[0, 1)``."""

    __slots__ = ("k", "weights", "_exact", "_uniform")

    def __init__(self, k: int, weights: Sequence | None = None):
        if int(k) != k or k < 0:
            raise DomainError(f"resolution must be a nonnegative integer, got {k}")
        k = int(k)
        n = 1 << k
        if weights is None:
            exact = None
            w = np.full(n, 2.0**-k)
            uniform = True
        else:
            if len(weights) != n:
                raise InvariantViolation(f"resolution {k} needs {n} weights, got {len(weights)}")
            if all(isinstance(x, (Fraction, int)) for x in weights):
                exact = tuple(Fraction(x) for x in weights)
                if any(x < 0 for x in exact):
                    raise InvariantViolation("weights must be nonnegative")
                if sum(exact) != 1:
                    raise InvariantViolation(f"weights sum to {sum(exact)}, not 1")
                w = np.array([float(x) for x in exact])
            else:
                exact = None
                w = np.asarray(weights, dtype=float).copy()
                if np.any(~np.isfinite(w)) or np.any(w < 0):
                    raise InvariantViolation("weights must be finite and nonnegative")
                if abs(math.fsum(w) - 1.0) > 1e-12:
                    raise InvariantViolation(f"weights sum to {math.fsum(w)!r}, not 1")
            uniform = bool(np.all(w == 2.0**-k))
        w.flags.writeable = False
        self.k = k
        self.weights = w
        self._exact = exact
        self._uniform = uniform

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def uniform(self) -> bool:
        return self._uniform

    @property
    def positive(self) -> np.ndarray:
        """Mask of atoms with positive probability."""
        return self.weights > 0

    def atom_interval(self, i: int) -> tuple[Fraction, Fraction]:
        return Fraction(i, self.size), Fraction(i + 1, self.size)

    def refine(self, levels: int = 1) -> "DyadicSpace":
        """Split every atom into ``2**levels`` equal halves."""
        if levels < 0:
            raise DomainError("levels must be nonnegative")
        if levels == 0 or self._uniform:
            return self if levels == 0 else DyadicSpace(self.k + levels)
        m = 1 << levels
        if self._exact is not None:
            return DyadicSpace(self.k + levels, [x / m for x in self._exact for _ in range(m)])
        return DyadicSpace(self.k + levels, np.repeat(self.weights / m, m))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DyadicSpace):
            return NotImplemented
        return self.k == other.k and (self is other or np.array_equal(self.weights, other.weights))

    def __hash__(self) -> int:
        return hash((self.k, self.weights.tobytes()))

    def __repr__(self) -> str:
        kind = "uniform" if self._uniform else "weighted"
        return f"DyadicSpace(k={self.k}, {kind})"


def _values_of(other, space):
    if isinstance(other, RandomVariable):
        if other.space != space:
            raise SpaceMismatchError(f"{other.space!r} vs {space!r}; refine to a common resolution first")
        return other.values
    return other


class RandomVariable:
    """Step function on a :class:`DyadicSpace`; one value per atom."""

    __slots__ = ("space", "values")
    # let numpy arrays defer to our operators
    __array_ufunc__ = None

    def __init__(self, space: DyadicSpace, values):
        v = np.array(values, dtype=float)
        if v.ndim == 0:
            v = np.full(space.size, float(v))
        if v.shape != (space.size,):
            raise SpaceMismatchError(f"expected {space.size} atom values, got shape {v.shape}")
        v.flags.writeable = False
        self.space = space
        self.values = v

    # arithmetic -------------------------------------------------------------
    def _new(self, values) -> "RandomVariable":
        return RandomVariable(self.space, values)

    def __add__(self, other):
        return self._new(self.values + _values_of(other, self.space))

    __radd__ = __add__

    def __sub__(self, other):
        return self._new(self.values - _values_of(other, self.space))

    def __rsub__(self, other):
        return self._new(_values_of(other, self.space) - self.values)

    def __mul__(self, other):
        return self._new(self.values * _values_of(other, self.space))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._new(self.values / _values_of(other, self.space))

    def __neg__(self):
        return self._new(-self.values)

    def __abs__(self):
        return self._new(np.abs(self.values))

    def maximum(self, other) -> "RandomVariable":
        return self._new(np.maximum(self.values, _values_of(other, self.space)))

    def minimum(self, other) -> "RandomVariable":
        return self._new(np.minimum(self.values, _values_of(other, self.space)))

    def positive_part(self) -> "RandomVariable":
        return self._new(np.maximum(self.values, 0.0))

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> "RandomVariable":
        return self._new(f(self.values))

    # integration ------------------------------------------------------------
    def expect(self, f: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
        """``E[f(xi)]`` summed exactly over the atoms of positive weight."""
        pos = self.space.positive
        vals = self.values[pos] if f is None else np.asarray(f(self.values[pos]), dtype=float)
        terms = self.space.weights[pos] * vals
        if np.any(np.isnan(terms)):
            return math.nan
        if np.any(np.isinf(terms)):
            return float(np.sum(terms))
        return math.fsum(terms)

    def prob(self, mask) -> float:
        """``P(mask)`` for a boolean atom mask."""
        return math.fsum(self.space.weights[np.asarray(mask, dtype=bool)])

    def support(self) -> np.ndarray:
        return (self.values != 0) & self.space.positive

    def ess_max(self) -> float:
        return float(np.max(self.values[self.space.positive]))

    def ess_min(self) -> float:
        return float(np.min(self.values[self.space.positive]))

    def refine(self, levels: int = 1) -> "RandomVariable":
        return refine(self, levels)

    def allclose(self, other, atol: float = 0.0) -> bool:
        o = _values_of(other, self.space)
        pos = self.space.positive
        return bool(np.all(np.abs(self.values - o)[pos] <= atol))

    def __le__(self, other) -> bool:
        o = _values_of(other, self.space)
        return bool(np.all((self.values <= o)[self.space.positive]))

    def __ge__(self, other) -> bool:
        o = _values_of(other, self.space)
        return bool(np.all((self.values >= o)[self.space.positive]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RandomVariable):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.space, self.values.tobytes()))

    def __repr__(self) -> str:
        if self.space.size <= 8:
            return f"RandomVariable(k={self.space.k}, values={self.values.tolist()})"
        return f"RandomVariable(k={self.space.k}, {self.space.size} atoms)"


class OrderInterval:
    """The order interval ``[-zeta, zeta]``."""

    def __init__(self, zeta: RandomVariable):
        if np.any(zeta.values[zeta.space.positive] < 0):
            raise InvariantViolation("order interval needs a nonnegative zeta")
        self.zeta = zeta

    def contains(self, xi: RandomVariable, tol: float = 0.0) -> bool:
        z = _values_of(xi, self.zeta.space)
        pos = self.zeta.space.positive
        return bool(np.all((np.abs(z) <= self.zeta.values + tol)[pos]))

    __contains__ = contains


# ----------------------------------------------------------------------------
# constructors


def constant(space: DyadicSpace, c: float) -> RandomVariable:
    return RandomVariable(space, np.full(space.size, float(c)))


def indicator(space: DyadicSpace, mask) -> RandomVariable:
    return RandomVariable(space, np.asarray(mask, dtype=bool).astype(float))


def interval_indicator(space: DyadicSpace, a, b) -> RandomVariable:
    """Indicator of ``[a, b)``; both ends must lie on the atom grid."""
    n = space.size
    lo, hi = Fraction(a) * n, Fraction(b) * n
    if lo.denominator != 1 or hi.denominator != 1 or not 0 <= lo <= hi <= n:
        raise DomainError(f"[{a}, {b}) is not a union of atoms at resolution {space.k}")
    mask = np.zeros(n, dtype=bool)
    mask[int(lo) : int(hi)] = True
    return indicator(space, mask)


def dyadic_block(space: DyadicSpace, j: int) -> np.ndarray:
    """Mask of ``[2^-j, 2^-(j-1))`` for ``1 <= j <= k``."""
    if not 1 <= j <= space.k:
        raise DomainError(f"block {j} is not resolved at level {space.k}")
    n = space.size
    mask = np.zeros(n, dtype=bool)
    mask[n >> j : n >> (j - 1)] = True
    return mask


def sup(variables: Iterable[RandomVariable]) -> RandomVariable:
    """Atomwise supremum of ``|xi|`` over finitely many variables."""
    it = iter(variables)
    first = next(it, None)
    if first is None:
        raise DomainError("sup of an empty family")
    out = np.abs(first.values)
    for x in it:
        out = np.maximum(out, np.abs(_values_of(x, first.space)))
    return RandomVariable(first.space, out)


def convex_combination(variables: Sequence[RandomVariable], weights) -> RandomVariable:
    w = np.asarray(weights, dtype=float)
    if len(w) != len(variables):
        raise DomainError("one weight per variable")
    if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
        raise InvariantViolation("weights must be nonnegative and sum to 1")
    space = variables[0].space
    stack = np.stack([_values_of(x, space) for x in variables])
    return RandomVariable(space, w @ stack)


# ----------------------------------------------------------------------------
# metrics


def l0_metric(xi: RandomVariable, eta: RandomVariable) -> float:
    """``E[|xi - eta| ^ 1]``; metrises convergence in probability."""
    if xi.space != eta.space:
        raise SpaceMismatchError(f"{xi.space!r} vs {eta.space!r}")
    return (xi - eta).expect(lambda v: np.minimum(np.abs(v), 1.0))


def ui_modulus(family: Sequence[RandomVariable], xi: RandomVariable, N: float) -> float:
    """``sup_eta E[|eta xi| 1{|eta xi| > N}]`` over the family."""
    if len(family) == 0:
        raise DomainError("uniform-integrability modulus of an empty family")
    best = 0.0
    for eta in family:
        prod = np.abs(eta.values * _values_of(xi, eta.space))
        best = max(best, RandomVariable(eta.space, np.where(prod > N, prod, 0.0)).expect())
    return best


def ui_profile(family: Sequence[RandomVariable], xi: RandomVariable, levels: Sequence[float]) -> np.ndarray:
    return np.array([ui_modulus(family, xi, N) for N in levels])


# ----------------------------------------------------------------------------
# refinement


def refine(x: RandomVariable, levels: int) -> RandomVariable:
    """Re-express ``x`` at resolution ``k + levels`` (each atom's value duplicated)."""
    if levels < 0:
        raise DomainError("levels must be nonnegative")
    if levels == 0:
        return x
    return RandomVariable(x.space.refine(levels), np.repeat(x.values, 1 << levels))


def common_refinement(*variables: RandomVariable) -> list[RandomVariable]:
    """Lift uniform-space variables to the finest resolution among them."""
    top = max(v.space.k for v in variables)
    out = []
    for v in variables:
        if not v.space.uniform and v.space.k != top:
            raise SpaceMismatchError("only uniform spaces refine to a common resolution automatically")
        out.append(refine(v, top - v.space.k))
    return out


# ----------------------------------------------------------------------------
# config


def _space_from_config(entry: Mapping) -> DyadicSpace:
    weights = entry.get("weights")
    if weights is not None:
        weights = [Fraction(w) if isinstance(w, str) else w for w in weights]
    return DyadicSpace(int(entry.get("k", 0)), weights)


def rv_from_config(entry: Mapping) -> RandomVariable:
    """Parse ``{space: {k, weights?}, values | generator: {name, params}}``."""
    if "space" not in entry:
        raise InvariantViolation("random variable config needs a 'space'")
    space = _space_from_config(entry["space"])
    if "values" in entry:
        return RandomVariable(space, entry["values"])
    gen = entry.get("generator")
    if gen is None:
        raise InvariantViolation("random variable config needs 'values' or 'generator'")
    name, params = gen["name"], dict(gen.get("params", {}))
    if name == "constant":
        return constant(space, params.get("c", 0.0))
    if name == "interval":
        return float(params.get("height", 1.0)) * interval_indicator(space, Fraction(params["a"]), Fraction(params["b"]))
    if name == "spike":
        mask = dyadic_block(space, int(params["j"]))
        p = math.fsum(space.weights[mask])
        return indicator(space, mask) * (p ** -float(params.get("power", 0.5)))
    if name == "normal":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        return RandomVariable(space, rng.normal(params.get("mean", 0.0), params.get("std", 1.0), space.size))
    raise InvariantViolation(f"unknown random-variable generator {name!r}")
