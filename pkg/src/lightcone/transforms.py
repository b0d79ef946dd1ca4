"""Polar and adjoint transforms, transform chains and duality checks.

A transform output is again a chart: evaluating it at (u, v) re-seeds
the coordinates a few orders higher, rebuilds the base frame there and
hands back the tagged frame vector.  Chains therefore nest charts and
the per-step order costs add up.  The costs are raw-to-raw: each step
receives a raw light cone lift and pays one extra order to
re-canonicalize it before the frame construction.
"""

import numpy as np

from .ambient import projective_distance
from .analysis import WILLMORE_GATE, residual_scale, willmore_report
from .charts import DEFAULT_ORDER, SurfaceChart, sample_grid
from .errors import (DegenerateTransform, DomainError, NotWillmore,
                     UnknownIdentifier)
from .frames import (adjoint_vector, canonical_lift, envelope_vector,
                     frame_and_invariants, frame_at, frame_field, invariants)
from .jets import seed_point

POLAR_ORDER_COST = 3
ADJOINT_ORDER_COST = 4
ENVELOPE_ORDER_COST = 5
PROBE_GRID = 8
PROBE_ORDER = 6

_COSTS = {
    "polar_left": POLAR_ORDER_COST,
    "polar_right": POLAR_ORDER_COST,
    "adjoint_left": ADJOINT_ORDER_COST,
    "adjoint_right": ADJOINT_ORDER_COST,
    "second_envelope": ENVELOPE_ORDER_COST,
}

_TAGS = {
    "L": "polar_left",
    "R": "polar_right",
    "adjL": "adjoint_left",
    "adjR": "adjoint_right",
    "env": "second_envelope",
}

_SHORT = {step: tag for tag, step in _TAGS.items()}


def _affine_data(J, axis):
    """Value and linear coefficients of an affine coordinate jet.

    Transform lifts receive either plain coordinate seeds or seeds
    shifted and linearly scaled by a wrapping chart; both re-expand
    exactly at a higher order.  A curved reparametrization cannot, so
    it is refused.  Order-zero jets carry no axis information and are
    taken to be the plain coordinate of their slot.
    """
    c = J.c
    value = c[..., 0, 0]
    if J.order >= 1:
        cu = c[..., 1, 0]
        cv = c[..., 0, 1]
    else:
        cu = np.full_like(value, 1.0 if axis == 0 else 0.0)
        cv = np.full_like(value, 0.0 if axis == 0 else 1.0)
    rest = c.copy()
    rest[..., 0, 0] = 0.0
    if J.order >= 1:
        rest[..., 1, 0] = 0.0
        rest[..., 0, 1] = 0.0
    scale = 1.0 + float(np.max(np.abs(c)))
    if float(np.max(np.abs(rest))) > 1e-12 * scale:
        raise DomainError(
            "transform charts compose only with affine reparametrizations",
            worst=float(np.max(np.abs(rest))))
    if float(np.max(np.abs(value.imag))) > 1e-12 * scale:
        raise DomainError("coordinate jets must be real valued",
                          worst=float(np.max(np.abs(value.imag))))
    return value.real, cu, cv


def _reseed(U, V, extra):
    """Rebuild the coordinate jets of a lift call at a higher order."""
    uval, ucu, ucv = _affine_data(U, 0)
    vval, vcu, vcv = _affine_data(V, 1)
    A, B = seed_point(uval, vval, U.order + extra)
    dA = A - uval
    dB = B - vval
    return dA * ucu + dB * ucv + uval, dA * vcu + dB * vcv + vval


def _step_lift(base, step):
    cost = _COSTS[step]
    needs_inv = step not in ("polar_left", "polar_right")

    def lift(U, V):
        U2, V2 = _reseed(U, V, cost)
        frame = frame_field(canonical_lift(base.evaluate(U2, V2)))
        inv = invariants(frame) if needs_inv else None
        if step == "polar_left":
            out = frame.L
        elif step == "polar_right":
            out = frame.R
        elif step == "adjoint_left":
            out = adjoint_vector(frame, inv, "left")
        elif step == "adjoint_right":
            out = adjoint_vector(frame, inv, "right")
        else:
            out = envelope_vector(frame, inv)
        return out.truncated(U.order)

    return lift


class TransformedSurface(SurfaceChart):
    """Chart obtained from a base chart by a sequence of frame
    transforms.

    ``steps`` records the applied step names outermost-last;
    ``order_cost`` is the total extra jet order one evaluation spends
    internally, so a chain evaluated at order k runs the innermost
    chart at k + order_cost.
    """

    def __init__(self, base, step):
        self.base = base
        self.steps = tuple(getattr(base, "steps", ())) + (step,)
        self.order_cost = sum(_COSTS[s] for s in self.steps)
        meta = dict(base.meta)
        meta.pop("torus_pq", None)
        meta["steps"] = list(self.steps)
        super().__init__(base.name + "+" + _SHORT[step],
                         _step_lift(base, step), base.domain,
                         base.periodic, params=base.params, meta=meta)


def _probe(chart):
    u, v = sample_grid(chart, PROBE_GRID, PROBE_GRID)
    return invariants(frame_at(chart, u, v, order=PROBE_ORDER))


def _polar(chart, side):
    inv = _probe(chart)
    mask = inv.umbilic_left if side == "left" else inv.umbilic_right
    if np.all(mask):
        raise DegenerateTransform(
            "the %s polar direction degenerates everywhere" % side,
            chart=chart.name, side=side)
    return TransformedSurface(chart, "polar_" + side)


def polar_left(chart):
    """Chart tracing the left null normal direction [L]."""
    return _polar(chart, "left")


def polar_right(chart):
    """Chart tracing the right null normal direction [R]."""
    return _polar(chart, "right")


def _adjoint(chart, side, willmore_gate=WILLMORE_GATE):
    inv = _probe(chart)
    report = willmore_report(inv)
    if report.max_abs > willmore_gate:
        raise NotWillmore("adjoint transforms need a Willmore base chart",
                          chart=chart.name, residual=report.max_abs,
                          gate=willmore_gate)
    mask = inv.umbilic_left if side == "left" else inv.umbilic_right
    if np.all(mask):
        raise DegenerateTransform(
            "the %s adjoint direction degenerates everywhere" % side,
            chart=chart.name, side=side)
    return TransformedSurface(chart, "adjoint_" + side)


def adjoint_left(chart, willmore_gate=WILLMORE_GATE):
    """Chart of the adjoint built on the left mu direction."""
    return _adjoint(chart, "left", willmore_gate)


def adjoint_right(chart, willmore_gate=WILLMORE_GATE):
    """Chart of the adjoint built on the right mu direction."""
    return _adjoint(chart, "right", willmore_gate)


def full_second_envelope(chart):
    """Second envelope of the left null congruence, no Willmore gate.

    Carries the left-Willmore-operator correction along L, so the
    output is orthogonal to L, L_z, L_zbar and L_zzbar unconditionally
    and coincides with adjoint_left exactly on Willmore charts.
    """
    inv = _probe(chart)
    if np.all(inv.umbilic_left):
        raise DegenerateTransform(
            "the left polar direction degenerates everywhere",
            chart=chart.name, side="left")
    return TransformedSurface(chart, "second_envelope")


_BUILDERS = {
    "polar_left": polar_left,
    "polar_right": polar_right,
    "adjoint_left": adjoint_left,
    "adjoint_right": adjoint_right,
    "second_envelope": full_second_envelope,
}


def apply_chain(chart, tags):
    """Fold transform steps over a chart.

    ``tags`` is a sequence or comma-separated string of short tags
    (L, R, adjL, adjR, env) or full step names.
    """
    if isinstance(tags, str):
        tags = [t.strip() for t in tags.split(",") if t.strip()]
    out = chart
    for tag in tags:
        step = _TAGS.get(tag, tag)
        if step not in _BUILDERS:
            raise UnknownIdentifier("unknown transform tag", tag=str(tag),
                                    available=sorted(_TAGS))
        out = _BUILDERS[step](out)
    return out


def inverse_check(chart, grid=(PROBE_GRID, PROBE_GRID)):
    """Worst projective distance from the base surface after the two
    polar round trips (left then right, and right then left)."""
    u, v = sample_grid(chart, *grid)
    base_vals = np.real(chart.lift_at(u, v, order=0).value)
    worst = 0.0
    for tags in (("L", "R"), ("R", "L")):
        back = apply_chain(chart, tags)
        vals = np.real(back.lift_at(u, v, order=0).value)
        worst = max(worst, float(np.max(
            projective_distance(vals, base_vals))))
    return worst


class DualityReport:
    """Sup diagnostics of the two adjoint directions over a grid.

    All four fields are nonnegative; they vanish together exactly when
    the chart has coincident adjoint directions.
    """

    __slots__ = ("swillmore_dev", "adjoint_coincidence", "sigma_residual",
                 "central_sphere_residual")

    def __init__(self, swillmore_dev, adjoint_coincidence, sigma_residual,
                 central_sphere_residual):
        self.swillmore_dev = float(swillmore_dev)
        self.adjoint_coincidence = float(adjoint_coincidence)
        self.sigma_residual = float(sigma_residual)
        self.central_sphere_residual = float(central_sphere_residual)

    def as_dict(self):
        return {"swillmore_dev": self.swillmore_dev,
                "adjoint_coincidence": self.adjoint_coincidence,
                "sigma_residual": self.sigma_residual,
                "central_sphere_residual": self.central_sphere_residual}

    def __repr__(self):
        return ("DualityReport(swillmore_dev={:.3e}, "
                "adjoint_coincidence={:.3e})").format(
                    self.swillmore_dev, self.adjoint_coincidence)


def _central_sphere_residual(frame, w):
    """Relative least squares defect of w against the central sphere
    basis {Y, Re Y_z, Im Y_z, N}, Euclidean per point."""
    basis = np.stack([np.real(frame.Y.value), np.real(frame.Yz.value),
                      np.imag(frame.Yz.value), np.real(frame.N.value)],
                     axis=-2)
    g = np.einsum("...ic,...jc->...ij", basis, basis)
    rhs = np.einsum("...ic,...c->...i", basis, w)
    coef = np.linalg.solve(g, rhs[..., None])[..., 0]
    proj = np.einsum("...i,...ic->...c", coef, basis)
    return (np.linalg.norm(w - proj, axis=-1)
            / np.linalg.norm(w, axis=-1))


def duality_report(chart, grid=(PROBE_GRID, PROBE_GRID), order=DEFAULT_ORDER,
                   willmore_gate=WILLMORE_GATE):
    """Duality diagnostics of a Willmore chart over a grid.

    The S-condition deviation is the raw sup of the adjoint direction
    discriminant; the other three measure how far the two adjoints are
    from one coinciding dual surface on the central sphere.
    """
    u, v = sample_grid(chart, *grid)
    frame, inv = frame_and_invariants(chart, u, v, order=order)
    report = willmore_report(inv)
    if report.max_abs > willmore_gate:
        raise NotWillmore("duality diagnostics need a Willmore chart",
                          chart=chart.name, residual=report.max_abs,
                          gate=willmore_gate)
    mask = inv.umbilic_left | inv.umbilic_right
    if np.all(mask):
        raise DegenerateTransform(
            "a polar direction degenerates on the whole grid",
            chart=chart.name)
    keep = ~mask

    disc = inv.lambda1 * inv.gamma2 - inv.lambda2 * inv.gamma1
    dev = float(np.max(np.abs(disc.value)[keep]))

    yhat = np.real(adjoint_vector(frame, inv, "left").value)
    ytil = np.real(adjoint_vector(frame, inv, "right").value)
    coincidence = float(np.max(projective_distance(yhat, ytil)[keep]))

    scale = residual_scale(inv)
    sigma = np.maximum(np.abs(inv.sigma_left.value),
                       np.abs(inv.sigma_right.value)) / scale
    sigma_sup = float(np.max(sigma[keep]))

    sphere = np.maximum(_central_sphere_residual(frame, yhat),
                        _central_sphere_residual(frame, ytil))
    sphere_sup = float(np.max(sphere[keep]))

    return DualityReport(dev, coincidence, sigma_sup, sphere_sup)
