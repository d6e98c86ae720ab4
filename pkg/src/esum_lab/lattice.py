"""Solid sequence-space norms on a finite index set.

Four norm families are supported on coefficient vectors of a fixed finite
length:

  - ``sup``           max_i |x_i|
  - ``weighted_sup``  max_i w_i |x_i|            (all w_i >= 1)
  - ``lp``            (sum_i |x_i|^p)^(1/p)      (p >= 1)
  - ``orlicz``        Luxemburg norm inf{lam > 0 : sum_i phi(|x_i|/lam) <= 1}

Every family is solid (|x| <= |y| pointwise implies norm(x) <= norm(y)) and
dominates the sup norm.  The module also computes indicator norms, the
uniformity constant ``ce_constant`` (the largest indicator norm, together
with its behaviour as the index set grows), and the generalized inverse of
an Orlicz function, which yields the indicator closed form
``chi(n) = 1 / phi_inv(1/n)``.
"""

from __future__ import annotations

import json
import numpy as np

LUXEMBURG_REL_TOL = 1e-10   # relative tolerance on the Luxemburg lambda
INVERSE_ITERS = 200         # bisection steps for generalized inverses
SEARCH_HORIZON = 1e18       # give up on phi(t) >= s beyond this t


class UnreachableLevelError(ValueError):
    """phi never reaches the requested level on the search horizon."""


class LatticeSpecError(ValueError):
    """Invalid norm-family parameters."""


# ---------------------------------------------------------------------------
# Orlicz functions
# ---------------------------------------------------------------------------

class OrliczFunction:
    """A nondecreasing function phi: [0,inf) -> [0,inf) with phi(0) = 0.

    ``a_phi`` caches the degeneracy point sup{t > 0 : phi(t) = 0} (0 when phi
    is positive immediately).  The evaluator accepts numpy arrays.
    """

    def __init__(self, evaluator, a_phi, family, params=None):
        self.evaluator = evaluator
        self.a_phi = float(a_phi)
        self.family = family
        self.params = dict(params or {})
        v0 = float(self.evaluator(0.0))
        if abs(v0) > 1e-15:
            raise LatticeSpecError(f"phi(0) must be 0, got {v0}")

    def __call__(self, t):
        return self.evaluator(np.asarray(t, dtype=float))

    def __repr__(self):
        return f"OrliczFunction({self.family}, {self.params})"

    @classmethod
    def power(cls, p):
        """phi(t) = t**p for p >= 1."""
        p = float(p)
        if not (p >= 1.0 and np.isfinite(p)):
            raise LatticeSpecError(f"power exponent must satisfy p >= 1, got {p}")
        return cls(lambda t: np.asarray(t, float) ** p, 0.0, "power", {"p": p})

    @classmethod
    def shifted_ramp(cls, a):
        """phi(t) = max(0, (t - a) / (1 - a)) for 0 < a < 1; vanishes on [0, a]."""
        a = float(a)
        if not (0.0 < a < 1.0):
            raise LatticeSpecError(f"ramp offset must lie in (0,1), got {a}")
        return cls(
            lambda t: np.maximum(0.0, (np.asarray(t, float) - a) / (1.0 - a)),
            a,
            "shifted_ramp",
            {"a": a},
        )

    @classmethod
    def from_table(cls, points):
        """Piecewise-linear phi through ``points`` [(t, y), ...].

        Nodes must start at (0, 0), have strictly increasing t and
        nondecreasing y; beyond the last node the final segment is extended
        linearly.  Only monotonicity is validated, not convexity.
        """
        pts = sorted((float(t), float(y)) for t, y in points)
        ts = np.array([t for t, _ in pts])
        ys = np.array([y for _, y in pts])
        if len(ts) < 2:
            raise LatticeSpecError("table needs at least two nodes")
        if ts[0] != 0.0 or ys[0] != 0.0:
            raise LatticeSpecError("table must start at (0, 0)")
        if np.any(np.diff(ts) <= 0):
            raise LatticeSpecError("table abscissae must be strictly increasing")
        if np.any(np.diff(ys) < 0):
            raise LatticeSpecError("table values must be nondecreasing")
        slope = (ys[-1] - ys[-2]) / (ts[-1] - ts[-2])

        def evaluator(t):
            t = np.asarray(t, float)
            out = np.interp(t, ts, ys)
            return np.where(t > ts[-1], ys[-1] + (t - ts[-1]) * slope, out)

        zero = np.nonzero(ys == 0.0)[0]
        a_phi = ts[zero[-1]] if len(zero) else 0.0
        return cls(evaluator, a_phi, "table", {"ts": tuple(ts), "ys": tuple(ys)})


def generalized_inverse(phi, s):
    """inf{t >= 0 : phi(t) >= s}, by bisection against the monotone evaluator.

    Returns 0 for s = 0.  Raises :class:`UnreachableLevelError` when phi
    stays below s on the search horizon.  Limit queries s -> 0+ should go
    through ``phi.a_phi`` instead.
    """
    s = float(s)
    if s < 0:
        raise ValueError(f"level must be nonnegative, got {s}")
    if s == 0.0:
        return 0.0
    hi = max(1.0, phi.a_phi + 1.0)
    while float(phi(hi)) < s:
        hi *= 2.0
        if hi > SEARCH_HORIZON:
            raise UnreachableLevelError(f"phi does not reach level {s}")
    lo = 0.0
    for _ in range(INVERSE_ITERS):
        mid = 0.5 * (lo + hi)
        if float(phi(mid)) >= s:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * max(hi, 1.0):
            break
    return hi


def _sup_inverse(phi, s, cap=SEARCH_HORIZON):
    """sup{t >= 0 : phi(t) <= s}; differs from the inf-inverse only across
    flat segments at level s."""
    hi = max(1.0, phi.a_phi + 1.0)
    while float(phi(hi)) <= s:
        hi *= 2.0
        if hi > cap:
            return np.inf
    lo = 0.0
    for _ in range(INVERSE_ITERS):
        mid = 0.5 * (lo + hi)
        if float(phi(mid)) <= s:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# Norm specs
# ---------------------------------------------------------------------------

class LatticeNormSpec:
    """One of the four solid norm families, on indices {0, ..., index_size-1}.

    Use the constructors :func:`sup_norm`, :func:`weighted_sup`,
    :func:`lp_norm`, :func:`orlicz_norm` or :func:`spec_from_dict`.
    """

    def __init__(self, kind, index_size, weights=None, p=None, phi=None):
        if index_size < 1 or index_size != int(index_size):
            raise LatticeSpecError(f"index_size must be a positive integer, got {index_size}")
        self.kind = kind
        self.index_size = int(index_size)
        self.weights = None
        self.p = None
        self.phi = None
        if kind == "sup":
            pass
        elif kind == "weighted_sup":
            w = np.asarray(weights, dtype=float)
            if w.shape != (self.index_size,):
                raise LatticeSpecError("need one weight per index")
            if not np.all(np.isfinite(w)) or np.any(w < 1.0):
                raise LatticeSpecError("weights must be finite and >= 1")
            self.weights = w
        elif kind == "lp":
            p = float(p)
            if not (np.isfinite(p) and p >= 1.0):
                raise LatticeSpecError(f"lp exponent must satisfy 1 <= p < inf, got {p}")
            self.p = p
        elif kind == "orlicz":
            if not isinstance(phi, OrliczFunction):
                raise LatticeSpecError("orlicz spec needs an OrliczFunction")
            # Admissibility gate: phi(1) >= 1 and phi > 1 beyond t = 1, so that
            # ||delta_i|| >= 1 and the sup norm is dominated.
            if float(phi(1.0)) < 1.0 - 1e-12:
                raise LatticeSpecError("phi(1) >= 1 required for sup-norm domination")
            if _sup_inverse(phi, 1.0) > 1.0 + 1e-9:
                raise LatticeSpecError("phi must exceed 1 strictly beyond t = 1")
            self.phi = phi
        else:
            raise LatticeSpecError(f"unknown norm family {kind!r}")

    def __repr__(self):
        extra = {
            "sup": "",
            "weighted_sup": f", w={self.weights}",
            "lp": f", p={self.p}",
            "orlicz": f", phi={self.phi}",
        }[self.kind]
        return f"LatticeNormSpec({self.kind}, n={self.index_size}{extra})"


def sup_norm(index_size):
    return LatticeNormSpec("sup", index_size)


def weighted_sup(weights):
    weights = np.asarray(weights, float)
    return LatticeNormSpec("weighted_sup", len(weights), weights=weights)


def lp_norm(p, index_size):
    return LatticeNormSpec("lp", index_size, p=p)


def orlicz_norm(phi, index_size):
    return LatticeNormSpec("orlicz", index_size, phi=phi)


def restrict_spec(spec, indices):
    """The same norm family on a subset of coordinates (in the given order)."""
    indices = list(indices)
    if len(indices) == 0:
        raise LatticeSpecError("cannot restrict to an empty index set")
    if any(i < 0 or i >= spec.index_size for i in indices):
        raise LatticeSpecError("restriction indices out of range")
    if spec.kind == "sup":
        return sup_norm(len(indices))
    if spec.kind == "weighted_sup":
        return weighted_sup(spec.weights[indices])
    if spec.kind == "lp":
        return lp_norm(spec.p, len(indices))
    return orlicz_norm(spec.phi, len(indices))


# ---------------------------------------------------------------------------
# Norm evaluation
# ---------------------------------------------------------------------------

def _validate_vector(spec, x):
    x = np.asarray(x)
    if x.shape != (spec.index_size,):
        raise ValueError(f"vector length {x.shape} does not match index_size {spec.index_size}")
    ax = np.abs(x).astype(float)
    if not np.all(np.isfinite(ax)):
        raise ValueError("vector entries must be finite")
    return ax


def luxemburg_batch(phi, rows):
    """Luxemburg norms of the rows of a nonnegative matrix, by vector bisection.

    The map lam -> sum_i phi(x_i / lam) is nonincreasing; the bracket
    [m / phi_inv(1), m / phi_inv(1/n)] with m = max_i x_i always contains the
    norm, by solidity.  Rows of zeros get norm 0.
    """
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[1]
    m = rows.max(axis=1)
    out = np.zeros(rows.shape[0])
    active = m > 0
    if not np.any(active):
        return out
    r = rows[active]
    ma = m[active]
    lo = ma / generalized_inverse(phi, 1.0)
    hi = ma / generalized_inverse(phi, 1.0 / n)

    def budget(lam):
        return phi(r / lam[:, None]).sum(axis=1)

    # Guard against flat segments of a merely-monotone phi: push lo down until
    # it is infeasible (budget > 1).
    for _ in range(80):
        feasible_lo = budget(lo) <= 1.0
        if not np.any(feasible_lo):
            break
        lo = np.where(feasible_lo, lo * 0.5, lo)
        if np.all(lo < 1e-300):
            break
    for _ in range(INVERSE_ITERS):
        mid = 0.5 * (lo + hi)
        ok = budget(mid) <= 1.0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        if np.all(hi - lo <= LUXEMBURG_REL_TOL * 0.01 * hi):
            break
    out[active] = hi
    return out


def norm_eval_batch(spec, rows):
    """Norms of the rows of a (batch, index_size) array of moduli."""
    rows = np.abs(np.asarray(rows)).astype(float)
    if spec.kind == "sup":
        return rows.max(axis=1)
    if spec.kind == "weighted_sup":
        return (rows * spec.weights).max(axis=1)
    if spec.kind == "lp":
        m = rows.max(axis=1)
        safe = np.where(m > 0, m, 1.0)
        return safe * ((rows / safe[:, None]) ** spec.p).sum(axis=1) ** (1.0 / spec.p)
    return luxemburg_batch(spec.phi, rows)


def norm_eval(spec, x):
    """The lattice norm of a coefficient vector (moduli are taken internally)."""
    ax = _validate_vector(spec, x)
    return float(norm_eval_batch(spec, ax[None, :])[0])


def delta_norm(spec, i):
    """Norm of the i-th coordinate unit vector."""
    if not (0 <= i < spec.index_size):
        raise IndexError(f"index {i} out of range")
    if spec.kind == "sup":
        return 1.0
    if spec.kind == "weighted_sup":
        return float(spec.weights[i])
    if spec.kind == "lp":
        return 1.0
    return 1.0 / generalized_inverse(spec.phi, 1.0)


def chi_norm(spec, subset_size):
    """Worst-case norm of an indicator vector of ``subset_size`` coordinates.

    Closed forms: sup -> 1; weighted sup -> the largest weight (the worst
    subset contains it); lp -> n**(1/p); orlicz -> 1 / phi_inv(1/n).  All are
    cross-checkable against :func:`norm_eval` on an explicit indicator.
    """
    n = int(subset_size)
    if n < 1 or n > spec.index_size:
        raise ValueError(f"subset size must lie in [1, {spec.index_size}], got {subset_size}")
    if spec.kind == "sup":
        return 1.0
    if spec.kind == "weighted_sup":
        return float(np.max(spec.weights))
    if spec.kind == "lp":
        return float(n) ** (1.0 / spec.p)
    return 1.0 / generalized_inverse(spec.phi, 1.0 / n)


def worst_indicator(spec, subset_size):
    """An explicit indicator vector attaining :func:`chi_norm`."""
    n = int(subset_size)
    x = np.zeros(spec.index_size)
    if spec.kind == "weighted_sup":
        order = np.argsort(spec.weights)[::-1]
        x[order[:n]] = 1.0
    else:
        x[:n] = 1.0
    return x


class CeReport:
    """Value of the uniformity constant at the finite horizon, plus the
    analytic verdict for the family on an unbounded index set."""

    def __init__(self, value, bounded, limit, growth):
        self.value = float(value)
        self.bounded = bool(bounded)
        self.limit = None if limit is None else float(limit)
        self.growth = growth

    def as_dict(self):
        return {
            "value": self.value,
            "bounded": self.bounded,
            "limit": self.limit,
            "growth": self.growth,
        }

    def __repr__(self):
        return f"CeReport(value={self.value}, bounded={self.bounded}, limit={self.limit}, growth={self.growth!r})"


def ce_constant(spec):
    """Largest indicator norm over all subset sizes at the configured horizon.

    The asymptotic verdict is reported analytically per family, never by
    extrapolating numbers: sup and weighted sup stay bounded, lp grows like
    n**(1/p), and an Orlicz family is bounded exactly when phi degenerates
    near 0 (a_phi > 0), with limit 1/a_phi.
    """
    n = spec.index_size
    if spec.kind == "sup":
        return CeReport(1.0, True, 1.0, "constant")
    if spec.kind == "weighted_sup":
        top = float(np.max(spec.weights))
        return CeReport(top, True, top, "constant")
    if spec.kind == "lp":
        return CeReport(n ** (1.0 / spec.p), False, None, f"n**(1/{spec.p:g})")
    value = chi_norm(spec, n)
    if spec.phi.a_phi > 0:
        return CeReport(value, True, 1.0 / spec.phi.a_phi, "constant")
    return CeReport(value, False, None, "1/phi_inv(1/n)")


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------

def phi_from_dict(d):
    family = d.get("family")
    if family == "power":
        return OrliczFunction.power(d["p"])
    if family == "shifted_ramp":
        return OrliczFunction.shifted_ramp(d["a"])
    if family == "table":
        return OrliczFunction.from_table(d["points"])
    raise LatticeSpecError(f"unknown Orlicz family {family!r}")


def spec_from_dict(d):
    kind = d.get("kind")
    n = d.get("index_size")
    if kind == "sup":
        return sup_norm(n)
    if kind == "weighted_sup":
        w = d["weights"]
        if n is not None and len(w) != n:
            raise LatticeSpecError("index_size disagrees with the weight list")
        return weighted_sup(w)
    if kind == "lp":
        return lp_norm(d["p"], n)
    if kind == "orlicz":
        return orlicz_norm(phi_from_dict(d["phi"]), n)
    raise LatticeSpecError(f"unknown norm family {kind!r}")


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
