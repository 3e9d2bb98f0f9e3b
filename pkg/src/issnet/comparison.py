"""Comparison functions: scalar gain/decay curves and two-argument decay surfaces.

The stability estimates in this package are phrased through classes of scalar
curves.  A curve of class K is continuous, strictly increasing, and vanishes
at 0; class Kinf additionally grows without bound; class L is nonincreasing
with values tending to a floor (0 unless stated); "mono" is a nonnegative
nondecreasing envelope with no strictness claim.  A KL surface is class K-like
in the radius argument and class L in the time argument.

Curves are either parametric (linear a*r, power a*r**p, saturating a*r/(1+r),
exponential decay c*exp(-lam*t)) or piecewise linear on explicit breakpoints.
Piecewise-linear curves extrapolate beyond the last breakpoint by the final
segment slope; L curves additionally clamp at their floor.  Class membership
is a *claim* checked on sampled grids, not a symbolic proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ScalarCurve",
    "KLSurface",
    "ClassReport",
    "linear",
    "power",
    "saturating",
    "expdecay",
    "pwl",
    "zero_curve",
    "identity",
    "compose",
    "scale",
    "curve_sum",
    "curve_max",
    "fit_monotone_envelope",
    "make_strictly_increasing",
    "kl_from_decay_table",
    "max_surface",
    "check_class",
    "default_grid",
    "curve_from_json",
    "curve_to_json",
    "surface_from_json",
    "surface_to_json",
]

_KINDS = ("linear", "power", "sat", "expdec", "pwl", "compose")
_CLASSES = ("K", "Kinf", "L", "mono")

# Grid used whenever a parametric curve has to be compared or sampled and the
# caller gave no grid: 256 points per decade over [1e-3, 1e3], plus 0.
GRID_POINTS_PER_DECADE = 256
GRID_RANGE = (1e-3, 1e3)


def default_grid(lo: float = GRID_RANGE[0], hi: float = GRID_RANGE[1],
                 points_per_decade: int = GRID_POINTS_PER_DECADE) -> np.ndarray:
    if not (0 < lo < hi):
        raise ValueError("grid range must satisfy 0 < lo < hi")
    n = max(2, int(round(points_per_decade * math.log10(hi / lo))))
    return np.concatenate([[0.0], np.logspace(math.log10(lo), math.log10(hi), n)])


@dataclass(frozen=True, eq=False)
class ScalarCurve:
    """One scalar comparison function.

    Not constructed directly in user code; use the factory helpers
    (:func:`linear`, :func:`power`, :func:`saturating`, :func:`expdecay`,
    :func:`pwl`) or the algebra (:func:`compose`, :func:`curve_max`, ...).
    """

    kind: str
    claimed_class: str
    params: tuple = ()            # ((name, value), ...) for parametric kinds
    breaks: np.ndarray | None = None
    vals: np.ndarray | None = None
    floor: float = 0.0            # L curves clamp here beyond the data
    parts: tuple = ()             # composition chain, outermost first

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.claimed_class not in _CLASSES:
            raise ValueError(f"unknown curve class {self.claimed_class!r}")
        if self.kind == "pwl":
            b = np.asarray(self.breaks, dtype=float)
            v = np.asarray(self.vals, dtype=float)
            if b.ndim != 1 or b.shape != v.shape or b.size < 1:
                raise ValueError("pwl curve needs matching 1-d breaks and values")
            if np.any(~np.isfinite(b)) or np.any(~np.isfinite(v)):
                raise ValueError("pwl data must be finite")
            if b.size > 1 and np.any(np.diff(b) < 0):
                raise ValueError("pwl breakpoints must be nondecreasing")
            if np.any(b < 0):
                raise ValueError("pwl breakpoints must be nonnegative")
            if np.any(v < 0):
                raise ValueError("pwl values must be nonnegative")
            if self.claimed_class in ("K", "Kinf"):
                if b[0] != 0.0 or v[0] != 0.0:
                    raise ValueError("class-K pwl curves must start at (0, 0)")
                if np.any(np.diff(v) < 0):
                    raise ValueError("class-K pwl values must be nondecreasing")
            if self.claimed_class == "L" and np.any(np.diff(v) > 0):
                raise ValueError("class-L pwl values must be nonincreasing")
            if self.claimed_class == "mono" and np.any(np.diff(v) < 0):
                raise ValueError("monotone pwl values must be nondecreasing")
            object.__setattr__(self, "breaks", b)
            object.__setattr__(self, "vals", v)

    def _pdict(self) -> dict:
        return dict(self.params)

    # Evaluation ---------------------------------------------------------

    def __call__(self, r):
        arr = np.asarray(r, dtype=float)
        scalar = arr.ndim == 0
        x = np.atleast_1d(arr)
        if np.any(x < 0):
            raise ValueError("comparison functions are defined on r >= 0")
        y = self._eval(x)
        return float(y[0]) if scalar else y

    def _eval(self, x: np.ndarray) -> np.ndarray:
        p = self._pdict()
        if self.kind == "linear":
            return p["a"] * x
        if self.kind == "power":
            return p["a"] * np.power(x, p["p"])
        if self.kind == "sat":
            return p["a"] * x / (1.0 + x)
        if self.kind == "expdec":
            return p["c"] * np.exp(-p["lam"] * x)
        if self.kind == "compose":
            y = x
            for part in reversed(self.parts):
                y = part._eval(y)
            return y
        # pwl: interpolate inside, extrapolate by the final slope outside
        b, v = self.breaks, self.vals
        if b.size == 1:
            return np.full_like(x, v[0])
        y = np.interp(x, b, v)
        over = x > b[-1]
        if np.any(over):
            y = np.where(over, v[-1] + self.final_slope() * (x - b[-1]), y)
            if self.claimed_class == "L":
                y = np.maximum(y, self.floor)
        return y

    def final_slope(self) -> float:
        """Growth rate past the represented range."""
        p = self._pdict()
        if self.kind == "linear":
            return p["a"]
        if self.kind == "power":
            # slope at the right end of the default range
            hi = GRID_RANGE[1]
            return p["a"] * p["p"] * hi ** (p["p"] - 1.0)
        if self.kind == "sat":
            return 0.0
        if self.kind == "expdec":
            return 0.0
        if self.kind == "compose":
            s = 1.0
            for part in self.parts:
                s *= part.final_slope()
            return s
        b, v = self.breaks, self.vals
        if b.size < 2:
            return 0.0
        db = b[-1] - b[-2]
        if db <= 0:
            return 0.0
        return (v[-1] - v[-2]) / db

    def is_zero(self) -> bool:
        if self.kind == "linear":
            return self._pdict()["a"] == 0.0
        if self.kind in ("power", "sat"):
            return self._pdict()["a"] == 0.0
        if self.kind == "expdec":
            return self._pdict()["c"] == 0.0
        if self.kind == "pwl":
            return bool(np.all(self.vals == 0.0))
        return all(p.is_zero() for p in self.parts)

    def __repr__(self):
        if self.kind == "pwl":
            return f"ScalarCurve(pwl, {self.claimed_class}, {self.breaks.size} pts)"
        if self.kind == "compose":
            return "ScalarCurve(compose, %s, depth %d)" % (self.claimed_class, len(self.parts))
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"ScalarCurve({self.kind}, {self.claimed_class}, {inner})"


# Factories --------------------------------------------------------------


def linear(a: float, claimed_class: str | None = None) -> ScalarCurve:
    if a < 0 or not np.isfinite(a):
        raise ValueError("linear curve needs a >= 0")
    if claimed_class is None:
        claimed_class = "mono" if a == 0.0 else "Kinf"
    return ScalarCurve("linear", claimed_class, (("a", float(a)),))


def power(a: float, p: float, claimed_class: str = "Kinf") -> ScalarCurve:
    if a < 0 or p <= 0:
        raise ValueError("power curve needs a >= 0 and p > 0")
    if a == 0.0:
        claimed_class = "mono"
    return ScalarCurve("power", claimed_class, (("a", float(a)), ("p", float(p))))


def saturating(a: float) -> ScalarCurve:
    """a*r/(1+r): class K, bounded by a (not Kinf)."""
    if a < 0:
        raise ValueError("saturating curve needs a >= 0")
    return ScalarCurve("sat", "K" if a > 0 else "mono", (("a", float(a)),))


def expdecay(c: float, lam: float) -> ScalarCurve:
    """c*exp(-lam*t): class L for c >= 0, lam > 0."""
    if c < 0 or lam <= 0:
        raise ValueError("expdecay needs c >= 0 and lam > 0")
    return ScalarCurve("expdec", "L", (("c", float(c)), ("lam", float(lam))))


def pwl(points: Iterable[tuple[float, float]], claimed_class: str = "mono",
        floor: float = 0.0) -> ScalarCurve:
    pts = sorted((float(r), float(v)) for r, v in points)
    if not pts:
        raise ValueError("pwl curve needs at least one point")
    b = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(np.diff(b) == 0):
        raise ValueError("pwl breakpoints must be distinct")
    return ScalarCurve("pwl", claimed_class, breaks=b, vals=v, floor=floor)


def zero_curve() -> ScalarCurve:
    return linear(0.0)


def identity() -> ScalarCurve:
    return linear(1.0)


# Algebra ----------------------------------------------------------------


def _require_k_or_zero(c: ScalarCurve, what: str):
    if c.is_zero():
        return
    if c.claimed_class not in ("K", "Kinf"):
        raise ValueError(f"{what} requires a class-K curve, got {c.claimed_class!r}")


def compose(f: ScalarCurve, g: ScalarCurve) -> ScalarCurve:
    """f after g.  Exact for linear/power pairs and for pwl pairs
    (pulled-back breakpoints); otherwise an exact lazy chain."""
    _require_k_or_zero(f, "compose")
    _require_k_or_zero(g, "compose")
    if f.is_zero() or g.is_zero():
        return zero_curve()
    cls = "Kinf" if f.claimed_class == g.claimed_class == "Kinf" else "K"
    fp, gp = f._pdict(), g._pdict()
    if f.kind == "linear" and g.kind == "linear":
        return linear(fp["a"] * gp["a"], cls)
    if f.kind == "linear" and g.kind == "power":
        return power(fp["a"] * gp["a"], gp["p"], cls)
    if f.kind == "power" and g.kind == "linear":
        return power(fp["a"] * gp["a"] ** fp["p"], fp["p"], cls)
    if f.kind == "power" and g.kind == "power":
        return power(fp["a"] * gp["a"] ** fp["p"], fp["p"] * gp["p"], cls)
    if f.kind == "linear" and g.kind == "pwl":
        return ScalarCurve("pwl", cls, breaks=g.breaks.copy(), vals=fp["a"] * g.vals)
    if f.kind == "pwl" and g.kind == "linear" and gp["a"] > 0:
        return ScalarCurve("pwl", cls, breaks=f.breaks / gp["a"], vals=f.vals.copy())
    if f.kind == "pwl" and g.kind == "pwl":
        return _compose_pwl(f, g, cls)
    parts = (f.parts if f.kind == "compose" else (f,)) + \
            (g.parts if g.kind == "compose" else (g,))
    return ScalarCurve("compose", cls, parts=parts)


def _invert_monotone_pwl(b: np.ndarray, v: np.ndarray, y: np.ndarray,
                         final_slope: float) -> np.ndarray:
    """Preimages under a nondecreasing pwl map; clips below range."""
    x = np.interp(y, v, b)
    over = y > v[-1]
    if np.any(over):
        if final_slope <= 0:
            raise ValueError("cannot pull back past a flat pwl tail")
        x = np.where(over, b[-1] + (y - v[-1]) / final_slope, x)
    return x


def _compose_pwl(f: ScalarCurve, g: ScalarCurve, cls: str) -> ScalarCurve:
    pulled = _invert_monotone_pwl(g.breaks, g.vals,
                                  f.breaks[(f.breaks >= g.vals[0])], g.final_slope())
    b = np.unique(np.concatenate([g.breaks, pulled]))
    v = f._eval(g._eval(b))
    return ScalarCurve("pwl", cls, breaks=b, vals=v)


def scale(c: ScalarCurve, factor: float) -> ScalarCurve:
    """Pointwise multiple factor*c; every kind is closed under scaling."""
    if factor < 0:
        raise ValueError("scale factor must be >= 0")
    if factor == 0.0:
        return zero_curve()
    p = c._pdict()
    if c.kind in ("linear", "power", "sat"):
        p["a"] *= factor
    elif c.kind == "expdec":
        p["c"] *= factor
    elif c.kind == "pwl":
        return ScalarCurve("pwl", c.claimed_class, breaks=c.breaks.copy(),
                           vals=factor * c.vals, floor=factor * c.floor)
    else:
        return ScalarCurve("compose", c.claimed_class,
                           parts=(scale(c.parts[0], factor),) + c.parts[1:])
    return ScalarCurve(c.kind, c.claimed_class, tuple(p.items()))


def _as_pwl_on(c: ScalarCurve, breaks: np.ndarray) -> tuple[np.ndarray, float]:
    return c._eval(breaks), c.final_slope()


def _is_zero_curve(c: ScalarCurve) -> bool:
    return c.kind == "linear" and c._pdict()["a"] == 0.0


def _merge_class(a: ScalarCurve, b: ScalarCurve) -> str:
    # identically-zero operands are neutral for both sum and max
    if _is_zero_curve(a):
        return b.claimed_class
    if _is_zero_curve(b):
        return a.claimed_class
    if a.claimed_class == b.claimed_class == "L":
        return "L"
    kish = ("K", "Kinf")
    if a.claimed_class in kish and b.claimed_class in kish:
        return "Kinf" if "Kinf" in (a.claimed_class, b.claimed_class) else "K"
    return "mono"


def _binary_grid(a: ScalarCurve, b: ScalarCurve, grid) -> np.ndarray:
    pieces = [np.asarray(grid, float)] if grid is not None else []
    for c in (a, b):
        if c.kind == "pwl":
            pieces.append(c.breaks)
    if not pieces:
        pieces.append(default_grid())
    g = np.unique(np.concatenate([[0.0]] + pieces))
    return g


def curve_sum(a: ScalarCurve, b: ScalarCurve, grid=None) -> ScalarCurve:
    """Pointwise a+b.  Exact for linear/pwl operands, sampled otherwise."""
    if a.kind == "linear" and b.kind == "linear":
        return linear(a._pdict()["a"] + b._pdict()["a"], _merge_class(a, b))
    g = _binary_grid(a, b, grid)
    va, _ = _as_pwl_on(a, g)
    vb, _ = _as_pwl_on(b, g)
    return ScalarCurve("pwl", _merge_class(a, b), breaks=g, vals=va + vb,
                       floor=a.floor + b.floor)


def curve_max(a: ScalarCurve, b: ScalarCurve, grid=None) -> ScalarCurve:
    """Pointwise max(a,b).  Exact for linear/pwl operands (segment crossings
    become breakpoints), sampled on a grid otherwise."""
    if a.kind == "linear" and b.kind == "linear":
        return linear(max(a._pdict()["a"], b._pdict()["a"]), _merge_class(a, b))
    g = _binary_grid(a, b, grid)
    exact = all(c.kind in ("linear", "pwl") for c in (a, b))
    va, sa = _as_pwl_on(a, g)
    vb, sb = _as_pwl_on(b, g)
    if exact:
        # insert interior crossing points so the max is exact between nodes
        extra = []
        for k in range(g.size - 1):
            d0 = va[k] - vb[k]
            d1 = va[k + 1] - vb[k + 1]
            if d0 * d1 < 0:
                t = d0 / (d0 - d1)
                extra.append(g[k] + t * (g[k + 1] - g[k]))
        # crossing in the extrapolation region
        if (va[-1] - vb[-1]) * (sa - sb) < 0:
            extra.append(g[-1] + (vb[-1] - va[-1]) / (sa - sb))
        if extra:
            g = np.unique(np.concatenate([g, extra]))
            va, _ = _as_pwl_on(a, g)
            vb, _ = _as_pwl_on(b, g)
    return ScalarCurve("pwl", _merge_class(a, b), breaks=g, vals=np.maximum(va, vb),
                       floor=max(a.floor, b.floor))


# Envelopes --------------------------------------------------------------


def fit_monotone_envelope(samples: Iterable[tuple[float, float]],
                          zero_anchor: bool = False) -> ScalarCurve:
    """Least nondecreasing piecewise-linear curve through the running max.

    Duplicate radii collapse to their max value.  With ``zero_anchor`` the
    point (0, 0) is prepended, which is a contract error if a sample at
    r == 0 has positive value.
    """
    pts: dict[float, float] = {}
    for r, v in samples:
        r, v = float(r), float(v)
        if r < 0:
            raise ValueError("sample radii must be >= 0")
        if not np.isfinite(v):
            raise ValueError("sample values must be finite")
        pts[r] = max(v, pts.get(r, -math.inf))
    if not pts:
        raise ValueError("cannot fit an envelope to an empty sample set")
    if zero_anchor:
        if pts.get(0.0, 0.0) > 0.0:
            raise ValueError("zero_anchor conflicts with a positive sample at r = 0")
        pts[0.0] = 0.0
    radii = np.array(sorted(pts))
    vals = np.maximum.accumulate(np.array([pts[r] for r in radii]))
    if np.any(vals < 0):
        raise ValueError("envelope values must be nonnegative")
    return ScalarCurve("pwl", "mono", breaks=radii, vals=vals)


def make_strictly_increasing(c: ScalarCurve, min_slope: float = 1e-9) -> ScalarCurve:
    """Lift a nondecreasing pwl curve to class Kinf.

    Flat segments gain slope ``min_slope``; domination of the original curve
    is preserved because values only move up.  A zero first breakpoint is
    required (anchor the envelope first if needed).
    """
    if c.kind == "linear" and c._pdict()["a"] > 0:
        return ScalarCurve("linear", "Kinf", c.params)
    if c.kind != "pwl":
        raise ValueError("strictification expects a pwl or linear curve")
    b, v = c.breaks, c.vals.copy()
    if b[0] != 0.0:
        b = np.concatenate([[0.0], b])
        v = np.concatenate([[0.0], v])
    if v[0] != 0.0:
        raise ValueError("a class-K curve must vanish at 0")
    for k in range(1, v.size):
        v[k] = max(v[k], v[k - 1] + min_slope * (b[k] - b[k - 1]))
    if b.size == 1:
        b = np.concatenate([b, [1.0]])
        v = np.concatenate([v, [min_slope]])
    if (v[-1] - v[-2]) / (b[-1] - b[-2]) < min_slope:
        # guarantee unbounded growth past the data
        b = np.concatenate([b, [b[-1] + 1.0]])
        v = np.concatenate([v, [v[-1] + min_slope]])
    return ScalarCurve("pwl", "Kinf", breaks=b, vals=v)


# Class checking ---------------------------------------------------------


@dataclass(frozen=True)
class ClassReport:
    ok: bool
    claimed: str
    detail: str
    grid_max: float


def check_class(c: ScalarCurve, grid: np.ndarray | None = None,
                tol: float = 0.0) -> ClassReport:
    """Verify the claimed class on a sampled grid.

    Nonstrict steps are tolerated only within ``tol`` (default none beyond
    exact ties at machine level for 'mono').
    """
    if grid is None:
        grid = default_grid()
    g = np.asarray(grid, float)
    y = c(g)
    claimed = c.claimed_class
    if claimed in ("K", "Kinf"):
        if c(0.0) != 0.0:
            return ClassReport(False, claimed, "value at 0 is nonzero", float(y.max()))
        d = np.diff(y[np.argsort(g)])
        if np.any(d < -tol):
            return ClassReport(False, claimed, "decreasing step on grid", float(y.max()))
        if claimed == "K" and np.any(d <= 0) and not c.is_zero():
            return ClassReport(False, claimed, "not strictly increasing on grid", float(y.max()))
        if claimed == "Kinf":
            if np.any(d <= 0):
                return ClassReport(False, claimed, "not strictly increasing on grid", float(y.max()))
            if c.final_slope() <= 0:
                return ClassReport(False, claimed, "bounded tail cannot be Kinf", float(y.max()))
    elif claimed == "L":
        d = np.diff(y)
        if np.any(d > tol):
            return ClassReport(False, claimed, "increasing step on grid", float(y.max()))
        if y[-1] > c.floor + max(tol, 1e-9 * max(1.0, y[0])) and c.final_slope() >= 0:
            return ClassReport(False, claimed, "does not approach the floor", float(y.max()))
    else:  # mono
        d = np.diff(y)
        if np.any(d < -tol):
            return ClassReport(False, claimed, "decreasing step on grid", float(y.max()))
        if np.any(y < 0):
            return ClassReport(False, claimed, "negative value", float(y.max()))
    return ClassReport(True, claimed, "ok", float(np.max(y)))


# KL surfaces ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KLSurface:
    """Two-argument decay surface beta(r, t).

    Stored as one class-L pwl curve per grid radius; nondecreasing in r by
    construction (running sup across radii).  Evaluation anchors r = 0 at 0,
    interpolates linearly between grid radii, and holds the last radius
    curve above the grid.
    """

    radii: np.ndarray
    curves: tuple[ScalarCurve, ...]
    dominator: ScalarCurve | None = None

    def __post_init__(self):
        r = np.asarray(self.radii, float)
        if r.ndim != 1 or r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("surface radii must be positive and strictly increasing")
        if len(self.curves) != r.size:
            raise ValueError("one time curve per radius required")
        object.__setattr__(self, "radii", r)

    def __call__(self, r: float, t) -> float | np.ndarray:
        if r < 0:
            raise ValueError("radius must be >= 0")
        tarr = np.asarray(t, dtype=float)
        scalar = tarr.ndim == 0
        vals = self._eval(float(r), np.atleast_1d(tarr))
        return float(vals[0]) if scalar else vals

    def _eval(self, r: float, t: np.ndarray) -> np.ndarray:
        if r == 0.0:
            return np.zeros_like(t)
        j = int(np.searchsorted(self.radii, r, side="left"))
        if j >= self.radii.size:
            return self.curves[-1](t)
        if self.radii[j] == r:
            return self.curves[j](t)
        hi = self.curves[j](t)
        if j == 0:
            return (r / self.radii[0]) * hi
        lo = self.curves[j - 1](t)
        w = (r - self.radii[j - 1]) / (self.radii[j] - self.radii[j - 1])
        return lo + w * (hi - lo)

    def _curve_at(self, r: float) -> ScalarCurve:
        """Exact pwl time-curve at radius r (blend of the bracketing grid
        curves; the blend of pwl curves is pwl on their union breakpoints)."""
        j = int(np.searchsorted(self.radii, r, side="left"))
        if j >= self.radii.size:
            return self.curves[-1]
        if self.radii[j] == r:
            return self.curves[j]
        hi = self.curves[j]
        if j == 0:
            f = r / self.radii[0]
            return ScalarCurve("pwl", "L", breaks=hi.breaks.copy(),
                               vals=f * hi.vals, floor=f * hi.floor)
        lo = self.curves[j - 1]
        t = np.unique(np.concatenate([lo.breaks, hi.breaks]))
        w = (r - self.radii[j - 1]) / (self.radii[j] - self.radii[j - 1])
        v = (1.0 - w) * lo(t) + w * hi(t)
        return ScalarCurve("pwl", "L", breaks=t, vals=np.minimum.accumulate(v),
                           floor=(1.0 - w) * lo.floor + w * hi.floor)

    def max_with(self, other: "KLSurface") -> "KLSurface":
        """Pointwise max of two surfaces (exact: segment crossings of the
        per-radius pwl curves become breakpoints)."""
        radii = np.unique(np.concatenate([self.radii, other.radii]))
        curves = []
        for r in radii:
            m = curve_max(self._curve_at(float(r)), other._curve_at(float(r)))
            v = np.minimum.accumulate(m.vals)
            curves.append(ScalarCurve("pwl", "L", breaks=m.breaks, vals=v,
                                      floor=m.floor))
        dom = None
        if self.dominator is not None and other.dominator is not None:
            dom = curve_max(self.dominator, other.dominator)
        return KLSurface(radii, tuple(curves), dom)


def max_surface(surfaces: Sequence[KLSurface]) -> KLSurface:
    if not surfaces:
        raise ValueError("need at least one surface")
    out = surfaces[0]
    for s in surfaces[1:]:
        out = out.max_with(s)
    return out


def kl_from_decay_table(table: dict[float, tuple[Sequence[float], Sequence[float]]],
                        sigma: ScalarCurve) -> KLSurface:
    """Assemble a KL surface from per-radius attainment staircases.

    ``table`` maps each radius r to (times, levels) where times[0] == 0,
    times are strictly increasing, and levels follow the dyadic ladder
    levels[n] == 2**-n * sigma(r).  The radius-r curve starts at
    2*sigma(r), steps down to levels[n-1] at times[n], and is interpolated
    linearly in t.  Curves are completed to a running sup across radii (so
    the surface is nondecreasing in r) and clipped at 2*sigma(r), which
    makes the cap bound exact in floating point.
    """
    if not table:
        raise ValueError("empty decay table")
    radii = np.array(sorted(table))
    if np.any(radii <= 0):
        raise ValueError("table radii must be positive")
    stair = []
    for r in radii:
        times, levels = table[r]
        t = np.asarray(times, float)
        lv = np.asarray(levels, float)
        if t.ndim != 1 or t.shape != lv.shape or t.size < 1:
            raise ValueError("times/levels must be matching 1-d arrays")
        if t[0] != 0.0:
            raise ValueError("attainment times must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("attainment times must be strictly increasing")
        s_r = sigma(float(r))
        if s_r <= 0:
            raise ValueError("sigma must be positive at every table radius")
        expect = s_r * np.power(2.0, -np.arange(t.size))
        if np.any(np.abs(lv - expect) > 1e-9 * s_r):
            raise ValueError("levels must halve from sigma(r) (dyadic ladder)")
        # staircase points: (0, 2*eps0), (tau_n, eps_{n-1})
        tb = t.copy()
        vb = np.concatenate([[2.0 * s_r], expect[:-1]]) if t.size > 1 else np.array([2.0 * s_r])
        stair.append((tb, vb))
    t_union = np.unique(np.concatenate([tb for tb, _ in stair]))
    curves = []
    running = np.full(t_union.shape, -np.inf)
    for (tb, vb), r in zip(stair, radii):
        c = ScalarCurve("pwl", "L", breaks=tb, vals=vb)
        running = np.maximum(running, c(t_union))
        capped = np.minimum(running, 2.0 * sigma(float(r)))
        # L class: running sup of nonincreasing staircases stays nonincreasing,
        # but enforce against float slip before constructing
        capped = np.minimum.accumulate(capped)
        # beyond the last recorded time only the last certified level is
        # claimed, so the curve floors there instead of extrapolating to 0
        curves.append(ScalarCurve("pwl", "L", breaks=t_union, vals=capped,
                                  floor=float(capped[-1])))
    return KLSurface(radii, tuple(curves), dominator=scale(sigma, 2.0))


# Serialization ----------------------------------------------------------


def curve_to_json(c: ScalarCurve, grid: np.ndarray | None = None) -> dict:
    """Wire form.  Composition chains are flattened to sampled pwl (lossy,
    noted in the payload) because the wire format has five kinds."""
    if c.kind == "pwl":
        out = {"kind": "pwl", "points": [[float(b), float(v)] for b, v in zip(c.breaks, c.vals)],
                "class": c.claimed_class}
        if c.floor != 0.0:
            out["floor"] = float(c.floor)
        return out
    if c.kind == "compose":
        g = np.asarray(grid, float) if grid is not None else default_grid()
        v = c(g)
        return {"kind": "pwl", "points": [[float(b), float(y)] for b, y in zip(g, v)],
                "class": c.claimed_class, "sampled_from": "compose"}
    return {"kind": c.kind, "params": {k: float(v) for k, v in c.params},
            "class": c.claimed_class}


def curve_from_json(obj: dict) -> ScalarCurve:
    kind = obj.get("kind")
    cls = obj.get("class", "mono")
    if cls not in _CLASSES:
        raise ValueError(f"unknown curve class {cls!r}")
    if kind == "pwl":
        pts = obj.get("points")
        if not pts:
            raise ValueError("pwl curve JSON needs points")
        return pwl([(p[0], p[1]) for p in pts], cls, floor=float(obj.get("floor", 0.0)))
    params = obj.get("params", {})
    if kind == "linear":
        return linear(params["a"], cls)
    if kind == "power":
        return power(params["a"], params["p"], cls)
    if kind == "sat":
        c = saturating(params["a"])
        return c
    if kind == "expdec":
        return expdecay(params["c"], params["lam"])
    raise ValueError(f"unknown curve kind {kind!r}")


def surface_to_json(s: KLSurface) -> dict:
    out = {"radii": [float(r) for r in s.radii],
           "curves": [curve_to_json(c) for c in s.curves]}
    if s.dominator is not None:
        out["dominator"] = curve_to_json(s.dominator)
    return out


def surface_from_json(obj: dict) -> KLSurface:
    radii = np.asarray(obj["radii"], float)
    curves = tuple(curve_from_json(c) for c in obj["curves"])
    dom = curve_from_json(obj["dominator"]) if "dominator" in obj else None
    return KLSurface(radii, curves, dom)
