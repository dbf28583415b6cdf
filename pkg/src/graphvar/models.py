"""Nonlinearity plug-ins F(x, s, t) and growth-constant estimators.

Every catalog model factors as F(x, s, t) = b(x) * G(s, t) with b > 0 and
G(0, 0) = 0, which makes the zero-at-origin condition and the probe
evaluations exact.  The liminf/limsup growth constants are not computable
from finitely many samples; the estimators return a value together with the
raw per-radius tables and are always flagged heuristic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError


@dataclass
class GrowthHint:
    A: float
    B: float
    note: str = ""


class NonlinearityModel:
    """Base class: subclasses implement the scalar profile G and its partials."""

    name = "base"
    arity = 2

    def __init__(self, weight=None):
        # weight: per-vertex factor b(x); dict id -> value, or None for b = 1
        self.weight = weight
        self.growth_hint = None

    # profile and partials; s, t may be numpy arrays
    def g(self, s, t):
        raise NotImplementedError

    def g_s(self, s, t):
        raise NotImplementedError

    def g_t(self, s, t):
        raise NotImplementedError

    def weight_values(self, graph):
        if self.weight is None:
            return np.ones(graph.n)
        if isinstance(self.weight, dict):
            return np.asarray([float(self.weight[v]) for v in graph.ids])
        return np.asarray(self.weight, dtype=float)

    def value(self, graph, s, t=None):
        """Per-vertex array of F(x, s, t); s, t scalars or per-vertex arrays."""
        t = 0.0 if t is None else t
        return self.weight_values(graph) * self.g(s, t)

    def d_s(self, graph, s, t=None):
        t = 0.0 if t is None else t
        return self.weight_values(graph) * self.g_s(s, t)

    def d_t(self, graph, s, t=None):
        t = 0.0 if t is None else t
        return self.weight_values(graph) * self.g_t(s, t)

    def integral(self, graph, s, t=None, indices=None):
        """int F(x, s, t) dmu over a vertex set (default all)."""
        vals = self.value(graph, s, t) * graph.mu
        if indices is not None:
            vals = vals[indices]
        return math.fsum(np.atleast_1d(vals))

    def weight_integral(self, graph, indices=None):
        vals = self.weight_values(graph) * graph.mu
        if indices is not None:
            vals = vals[indices]
        return math.fsum(np.atleast_1d(vals))

    def check_registration(self, graph, probes=200, seed=0, tol=1e-6):
        """Registration checks: F(x,0,0) integrates to zero, partials match
        central finite differences, and the weight is integrable on the
        truncation.  Raises ParameterError on failure."""
        z = self.integral(graph, 0.0, 0.0)
        if abs(z) > 1e-12:
            raise ParameterError("F(x, 0, 0) must integrate to 0, got %g" % z)
        if not math.isfinite(self.weight_integral(graph)):
            raise ParameterError("weight b(x) must be integrable")
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-5.0, 5.0, size=(probes, 2))
        h = 1e-5
        worst = 0.0
        for s, t in pts:
            fd_s = (self.g(s + h, t) - self.g(s - h, t)) / (2 * h)
            fd_t = (self.g(s, t + h) - self.g(s, t - h)) / (2 * h)
            for fd, an in ((fd_s, self.g_s(s, t)), (fd_t, self.g_t(s, t))):
                worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1.0))
        if worst > tol:
            raise ParameterError(
                "partial derivatives disagree with finite differences "
                "(worst relative error %g)" % worst)
        return worst


def _abs_pow(x, e):
    return np.abs(x) ** e


def _abs_pow_d(x, e):
    # d/dx |x|^e = e |x|^(e-2) x, with the value 0 at x = 0 for e > 1
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = e * np.abs(x[nz]) ** (e - 1.0) * np.sign(x[nz])
    return out if out.ndim else float(out)


class PowerModel(NonlinearityModel):
    """F = b(x) (alpha |s|^ps + beta |t|^qt)."""

    name = "power"

    def __init__(self, alpha=1.0, beta=1.0, ps=2.0, qt=2.0, weight=None, arity=2):
        super().__init__(weight)
        if ps <= 1 or qt <= 1:
            raise ParameterError("power exponents must exceed 1")
        self.alpha, self.beta, self.ps, self.qt = alpha, beta, ps, qt
        self.arity = arity

    def g(self, s, t):
        if self.arity == 1:
            return self.alpha * _abs_pow(s, self.ps)
        return self.alpha * _abs_pow(s, self.ps) + self.beta * _abs_pow(t, self.qt)

    def g_s(self, s, t):
        return self.alpha * _abs_pow_d(s, self.ps)

    def g_t(self, s, t):
        if self.arity == 1:
            return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
        return self.beta * _abs_pow_d(t, self.qt)


def _component(kind, params):
    """Scalar profile components for the separable model."""
    if kind == "power":
        c = params.get("c", 1.0)
        a = params.get("a", 2.0)
        if a <= 1:
            raise ParameterError("separable power exponent must exceed 1")
        return (lambda s: c * _abs_pow(s, a),
                lambda s: c * _abs_pow_d(s, a))
    if kind == "bounded_osc":
        c = params.get("c", 1.0)
        om = params.get("omega", 1.0)
        return (lambda s: c * (1.0 - np.cos(om * np.asarray(s, dtype=float))),
                lambda s: c * om * np.sin(om * np.asarray(s, dtype=float)))
    raise ParameterError("unknown separable component %r" % kind)


class SeparableModel(NonlinearityModel):
    """F = b(x) (w1(s) + w2(t)) with catalog component profiles."""

    name = "separable"

    def __init__(self, w1=("power", None), w2=("power", None), weight=None, arity=2):
        super().__init__(weight)
        self.arity = arity
        self._w1, self._dw1 = _component(w1[0], w1[1] or {})
        self._w2, self._dw2 = _component(w2[0], w2[1] or {})

    def g(self, s, t):
        if self.arity == 1:
            return self._w1(s)
        return self._w1(s) + self._w2(t)

    def g_s(self, s, t):
        return self._dw1(s)

    def g_t(self, s, t):
        if self.arity == 1:
            return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
        return self._dw2(t)


class PlateauOscillator(NonlinearityModel):
    """F = b(x) theta(|s|^p + |t|^q) with a ramp/plateau radial profile.

    theta is C^1: on each geometric period [a_k, c^2 a_k] (a_k = a0 c^(2k))
    it ramps with slope beta over [a_k, c a_k] and is flat on the plateau
    [c a_k, c^2 a_k].  The ramp edges are blended over a fraction tau of the
    ramp so the slope is continuous; theta = 0 on [0, a0].  The ramp/plateau
    alternation makes liminf theta(r)/r strictly smaller than limsup, the
    mechanism behind the required growth gap.
    """

    name = "plateau_oscillator"

    def __init__(self, beta=1.0, c=25.0, a0=1.0, tau=0.1, p=2.0, q=2.0,
                 weight=None, arity=2):
        super().__init__(weight)
        if beta <= 0 or a0 <= 0 or c <= 1:
            raise ParameterError("need beta > 0, a0 > 0, c > 1")
        if not 0 < tau < 0.5:
            raise ParameterError("blend fraction tau must lie in (0, 0.5)")
        if p <= 1 or q <= 1:
            raise ParameterError("radial exponents must exceed 1")
        self.beta, self.c, self.a0, self.tau = beta, c, a0, tau
        self.p, self.q = p, q
        self.arity = arity
        # area under one full (blended) ramp of width L starting at a_k:
        # trapezoidal slope profile integrates to beta L (1 - tau)
        self._ramp_frac = 1.0 - tau

    # -- radial profile ----------------------------------------------------

    def _period(self, r):
        """Period index and local offsets for r > a0."""
        k = np.floor(np.log(r / self.a0) / (2.0 * np.log(self.c)))
        return k

    def theta(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        live = r > self.a0
        if not np.any(live):
            return out if out.ndim else float(out)
        rv = r[live]
        c2 = self.c * self.c
        k = np.floor(np.log(rv / self.a0) / np.log(c2))
        # guard against log rounding at period boundaries
        r0 = self.a0 * c2 ** k
        k = np.where(rv < r0, k - 1, k)
        r0 = self.a0 * c2 ** k
        L = (self.c - 1.0) * r0          # ramp width
        w = self.tau * L                 # blend width
        # sum of full ramp areas over earlier periods:
        # area_j = beta (c-1) a0 c^{2j} (1 - tau); geometric sum
        past = self.beta * (self.c - 1.0) * self.a0 * self._ramp_frac \
            * (c2 ** k - 1.0) / (c2 - 1.0)
        x = rv - r0
        out[live] = past + self._ramp_value(x, L, w)
        return out if out.ndim else float(out)

    def _ramp_value(self, x, L, w):
        """Integral of the trapezoidal slope profile from 0 to x (x >= 0)."""
        b = self.beta
        x = np.minimum(x, L)
        x = np.maximum(x, 0.0)
        # rising blend [0, w]: slope b x / w; x / w first keeps huge (but
        # finite) diverging iterates from overflowing in the square
        r1 = b * w * np.minimum(x / w, 1.0) ** 2 / 2.0
        # constant part [w, L - w]
        r2 = b * np.clip(x - w, 0.0, L - 2.0 * w)
        # falling blend [L - w, L]: slope b (L - x)/w
        y = np.clip(x - (L - w), 0.0, w)
        r3 = b * (w * y - y ** 2 / 2.0) / w
        return r1 + r2 + r3

    def theta_prime(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        live = r > self.a0
        if not np.any(live):
            return out if out.ndim else float(out)
        rv = r[live]
        c2 = self.c * self.c
        k = np.floor(np.log(rv / self.a0) / np.log(c2))
        r0 = self.a0 * c2 ** k
        k = np.where(rv < r0, k - 1, k)
        r0 = self.a0 * c2 ** k
        L = (self.c - 1.0) * r0
        w = self.tau * L
        x = rv - r0
        slope = np.zeros_like(rv)
        ramp = x < L
        xr = x[ramp]
        wr = np.broadcast_to(w, x.shape)[ramp]
        Lr = np.broadcast_to(L, x.shape)[ramp]
        s = np.where(xr < wr, xr / wr,
                     np.where(xr < Lr - wr, 1.0, (Lr - xr) / wr))
        slope[ramp] = self.beta * np.maximum(s, 0.0)
        out[live] = slope
        return out if out.ndim else float(out)

    # -- F interface -------------------------------------------------------

    def _radius(self, s, t):
        if self.arity == 1:
            return _abs_pow(s, self.p)
        return _abs_pow(s, self.p) + _abs_pow(t, self.q)

    def g(self, s, t):
        return self.theta(self._radius(s, t))

    def g_s(self, s, t):
        return self.theta_prime(self._radius(s, t)) * _abs_pow_d(s, self.p)

    def g_t(self, s, t):
        if self.arity == 1:
            return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
        return self.theta_prime(self._radius(s, t)) * _abs_pow_d(t, self.q)

    def radial_targets(self, graph, periods=12, samples_per_period=4000,
                       indices=None):
        """Documented A/B targets from a dense 1-D oracle over theta(r)/r.

        Valid for p = q (equal radial exponents), where the l1-ball max of the
        radius is y^p and both growth constants reduce to extrema of
        theta(r)/r times the weighted volume.
        """
        if self.p != self.q:
            raise ParameterError("radial targets require p == q")
        wvol = self.weight_integral(graph, indices)
        c2 = self.c * self.c
        lo = self.a0 * c2 ** (periods // 2)
        hi = self.a0 * c2 ** periods
        r = np.geomspace(lo, hi, samples_per_period * (periods - periods // 2))
        ratio = self.theta(r) / r
        hint = GrowthHint(A=wvol * float(ratio.min()),
                          B=wvol * float(ratio.max()),
                          note="dense 1-D oracle over the radial profile")
        self.growth_hint = hint
        return hint


CATALOG = {
    "power": PowerModel,
    "separable": SeparableModel,
    "plateau_oscillator": PlateauOscillator,
}


def make_model(catalog, params=None, arity=2):
    """Instantiate a catalog model from its name and parameter dict."""
    if catalog not in CATALOG:
        raise ParameterError("unknown catalog model %r" % catalog)
    params = dict(params or {})
    if "w1" in params:
        params["w1"] = tuple(params["w1"])
    if "w2" in params:
        params["w2"] = tuple(params["w2"])
    return CATALOG[catalog](arity=arity, **params)


def model_from_config(config):
    """Nonlinearity spec: {"catalog": name, "params": {...}}; raw tables are
    rejected."""
    if "table" in config:
        raise ParameterError("table-valued nonlinearities are not supported; "
                             "use a catalog model")
    if "catalog" not in config:
        raise ParameterError("nonlinearity config needs a 'catalog' name")
    return make_model(config["catalog"], config.get("params"),
                      arity=int(config.get("arity", 2)))


# -- growth constant estimators -------------------------------------------


def _l1_ball_samples(y, grid, arity):
    """Sample points of the closed l1 ball of radius y (corners included)."""
    if arity == 1:
        s = np.linspace(-y, y, grid)
        return s, np.zeros_like(s)
    pts_s, pts_t = [], []
    fracs = np.linspace(0.25, 1.0, 4)
    for f in fracs:
        rad = f * y
        a = np.linspace(0.0, 1.0, grid // 4 + 2)
        # boundary of |s| + |t| = rad, all four quadrants
        s = rad * a
        t = rad * (1.0 - a)
        for ss, tt in ((s, t), (-s, t), (s, -t), (-s, -t)):
            pts_s.append(ss)
            pts_t.append(tt)
    return np.concatenate(pts_s), np.concatenate(pts_t)


def estimate_A(model, graph, delta, radii, grid=256, indices=None,
               critical_points=None):
    """Heuristic liminf estimate of int_V max_{|s|+|t|<=y} F dmu / y^delta.

    The max over the l1 ball is approximated by dense sampling (plus any
    declared critical points); the liminf by the minimum over the largest
    half of the radii.  Returns (estimate, diagnostics).
    """
    radii = [float(y) for y in radii]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radii must be strictly increasing, >= 3 entries")
    if grid < 64:
        raise ParameterError("grid must provide >= 64 points per radius shell")
    wvol = model.weight_integral(graph, indices)
    table = []
    running_max = 0.0
    for y in radii:
        s, t = _l1_ball_samples(y, grid, model.arity)
        gvals = model.g(s, t)
        if critical_points:
            for cs, ct in critical_points:
                if abs(cs) + abs(ct) <= y:
                    gvals = np.append(gvals, model.g(cs, ct))
        # the ball max is nondecreasing in y; keep the running envelope
        running_max = max(running_max, float(np.max(gvals)))
        table.append({"y": y, "max_F_integral": running_max * wvol,
                      "ratio": running_max * wvol / y ** delta})
    k = (len(radii) + 1) // 2
    estimate = min(row["ratio"] for row in table[-k:])
    return estimate, {"table": table, "heuristic": True, "delta": delta}


def estimate_B(model, graph, p, q, radii, rays=None, indices=None):
    """Heuristic limsup estimate of int_V F dmu / (|s|^p + |t|^q) along rays.

    Returns (estimate, diagnostics)."""
    radii = [float(y) for y in radii]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radii must be strictly increasing, >= 3 entries")
    if rays is None:
        if model.arity == 1:
            rays = [(1.0, 0.0), (-1.0, 0.0)]
        else:
            rays = [(1.0, 0.0), (0.0, 1.0), (0.5, 0.5),
                    (-1.0, 0.0), (0.0, -1.0), (-0.5, -0.5)]
    wvol = model.weight_integral(graph, indices)
    table = []
    for ds, dt in rays:
        scale = abs(ds) + abs(dt)
        if scale == 0:
            raise ParameterError("zero ray direction")
        rows = []
        for y in radii:
            s, t = ds / scale * y, dt / scale * y
            denom = abs(s) ** p + abs(t) ** q
            val = float(model.g(s, t)) * wvol / denom
            rows.append({"y": y, "ratio": val})
        table.append({"ray": (ds, dt), "rows": rows})
    k = (len(radii) + 1) // 2
    estimate = max(row["ratio"] for entry in table
                   for row in entry["rows"][-k:])
    return estimate, {"table": table, "heuristic": True}
