"""Iterated adaptive Gauss-Kronrod quadrature over subregion cells.

The 1-D driver refines many independent integrals at once: every open
panel of every integral is evaluated in a single vectorised call, and each
panel is accepted once its error share (proportional to its width) is met.
Cells are integrated as an outer x-integral whose integrand is a batch of
inner y-integrals over ``[y_lower(x), y_upper(x)]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .partition import SubregionSpec

# 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights, with the
# embedded 7-point Gauss weights at the odd Kronrod positions.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

_EPS = np.finfo(float).eps


class QuadratureWarning(UserWarning):
    """An integral stopped at ``max_subdivisions`` before meeting tolerance."""


@dataclass(frozen=True)
class IntegrationSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2**15

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_SETTINGS = IntegrationSettings()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool = True

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value, self.error + other.error,
                          self.converged and other.converged)

    def scaled(self, factor: float) -> "QuadResult":
        return QuadResult(self.value * factor, self.error * abs(factor), self.converged)


def _gk_panels(func, lo, hi, owner):
    """Evaluate GK15 on each panel; returns (kronrod, error) per panel.

    ``func(t, owner)`` gets flat arrays and returns values, or a
    ``(values, errors)`` pair whose errors are folded into the panel error.
    """
    half = 0.5 * (hi - lo)
    centre = 0.5 * (hi + lo)
    t = centre[:, None] + half[:, None] * NODES[None, :]
    out = func(t.ravel(), np.repeat(owner, 15))
    if isinstance(out, tuple):
        vals, inner_err = out
        inner_err = np.abs(inner_err).reshape(t.shape)
    else:
        vals, inner_err = out, None
    vals = np.asarray(vals, dtype=float).reshape(t.shape)
    if np.isnan(vals).any():
        raise ValueError("integrand returned NaN")
    resk = vals @ KRONROD_W
    resg = vals @ GAUSS_W
    resabs = np.abs(vals) @ KRONROD_W
    resasc = np.abs(vals - 0.5 * resk[:, None]) @ KRONROD_W
    habs = np.abs(half)
    resk, resabs, resasc = resk * half, resabs * habs, resasc * habs
    err = np.abs((resk - resg * half))
    # QUADPACK error scaling
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(resasc > 0, np.minimum(1.0, (200.0 * err / resasc) ** 1.5), 1.0)
    err = np.where((resasc > 0) & (err > 0), resasc * scale, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    if inner_err is not None:
        err = err + (inner_err @ KRONROD_W) * habs
    return resk, err


def integrate_batch(func, a, b, rel_tol=1e-9, abs_tol=1e-12, max_subdivisions=2**15):
    """Adaptively integrate ``m`` 1-D integrals ``int_{a_j}^{b_j} func``.

    ``func(t, j)`` evaluates integrand ``j`` at points ``t`` (flat arrays).
    Returns ``(values, errors, converged)`` arrays of length ``m``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m = a.size
    b = np.maximum(a, b)
    total_w = b - a
    value = np.zeros(m)
    error = np.zeros(m)
    splits = np.zeros(m, dtype=np.int64)
    converged = np.ones(m, dtype=bool)

    owner = np.flatnonzero(total_w > 0)
    lo, hi = a[owner], b[owner]
    if owner.size == 0:
        return value, error, converged
    est, err = _gk_panels(func, lo, hi, owner)

    while owner.size:
        run_val = value + np.bincount(owner, est, minlength=m)
        run_err = error + np.bincount(owner, err, minlength=m)
        tol = np.maximum(rel_tol * np.abs(run_val), abs_tol)
        owner_ok = run_err <= tol
        share = tol[owner] * (hi - lo) / total_w[owner]
        accept = owner_ok[owner] | (err <= share) | (splits[owner] >= max_subdivisions)
        exhausted = ~owner_ok[owner] & (err > share) & (splits[owner] >= max_subdivisions)
        if exhausted.any():
            converged[np.unique(owner[exhausted])] = False
        np.add.at(value, owner[accept], est[accept])
        np.add.at(error, owner[accept], err[accept])
        keep = ~accept
        if not keep.any():
            break
        owner, lo, hi = owner[keep], lo[keep], hi[keep]
        np.add.at(splits, owner, 1)
        mid = 0.5 * (lo + hi)
        owner = np.concatenate([owner, owner])
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        est, err = _gk_panels(func, lo, hi, owner)
    return value, error, converged


def integrate_1d(f, a, b, settings: IntegrationSettings = DEFAULT_SETTINGS) -> QuadResult:
    """Adaptive integral of a vectorised scalar function ``f`` over ``[a, b]``."""
    v, e, ok = integrate_batch(lambda t, _j: f(t), [a], [b], settings.rel_tol,
                               settings.abs_tol, settings.max_subdivisions)
    return QuadResult(float(v[0]), float(e[0]), bool(ok[0]))


def integrate_region(f, x_lo, x_hi, y_lower, y_upper,
                     settings: IntegrationSettings = DEFAULT_SETTINGS) -> QuadResult:
    """``int_{x_lo}^{x_hi} int_{y_lower(x)}^{y_upper(x)} f(x, y) dy dx``.

    ``f``, ``y_lower`` and ``y_upper`` must accept numpy arrays.
    """
    if not x_hi > x_lo:
        return QuadResult(0.0, 0.0, True)
    inner_rel = 0.1 * settings.rel_tol
    inner_abs = 0.1 * settings.abs_tol
    flags = []

    def inner(xs, _owner):
        ylo = np.asarray(y_lower(xs), dtype=float)
        yhi = np.maximum(np.asarray(y_upper(xs), dtype=float), ylo)
        v, e, ok = integrate_batch(lambda t, j: f(xs[j], t), ylo, yhi, inner_rel,
                                   inner_abs, settings.max_subdivisions)
        flags.append(bool(ok.all()))
        return v, e

    v, e, ok = integrate_batch(inner, [x_lo], [x_hi], settings.rel_tol, settings.abs_tol,
                               settings.max_subdivisions)
    return QuadResult(float(v[0]), float(e[0]), bool(ok[0]) and all(flags))


def integrate_cell(f, spec: SubregionSpec,
                   settings: IntegrationSettings = DEFAULT_SETTINGS) -> QuadResult:
    """Integrate ``f(x, y)`` over one canonical copy of a subregion.

    Non-convergence is reported through ``converged=False`` plus a
    :class:`QuadratureWarning`; a NaN integrand raises ``ValueError``.
    """
    total = QuadResult(0.0, 0.0, True)
    r0 = spec.r0
    for p in spec.pieces:
        total = total + integrate_region(
            f, p.x_lo, p.x_hi,
            lambda x, c=p.y_lower: c(x, r0),
            lambda x, c=p.y_upper: c(x, r0),
            settings,
        )
    if not total.converged:
        warnings.warn(
            f"cell R{spec.type_id} at r0={r0:.6g}: error estimate {total.error:.3g} "
            "exceeds tolerance after max_subdivisions", QuadratureWarning, stacklevel=2)
    return total
