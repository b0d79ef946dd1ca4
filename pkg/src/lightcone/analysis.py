"""Residual checks, energies and verification bundles.

The structure and integrability checks are exact identities of the jet
construction, so their residuals sit at rounding level for any honest
chart; they guard the pipeline, not the surface.  The Willmore residual
and the holomorphy of the invariant forms measure actual geometry.

Every check comes in two layers: a worker on precomputed frame and
invariant data, and a chart-level operation that samples a grid, runs
the worker and stamps the grid spec into the report.  The CLI and the
test suites share the workers.
"""

import numpy as np

from .ambient import SIGNS
from .errors import (DegenerateTransform, IntegrandSingular, NotSWillmore,
                     NotWillmore)
from .frames import (adjoint_vector, frame_at, invariants, pair_density,
                     willmore_operators)
from .charts import DEFAULT_ORDER, sample_grid
from .jets import inner

SINGULAR_INTEGRAND = 1e6
WILLMORE_GATE = 1e-6
SWILLMORE_GATE = 1e-6
VERIFY_GRID = 32


class ResidualReport:
    """Max/mean absolute residuals of a named identity over a grid."""

    __slots__ = ("identity", "grid", "max_abs", "mean_abs",
                 "degenerate_fraction", "lines")

    def __init__(self, identity, max_abs, mean_abs,
                 degenerate_fraction=0.0, grid=None, lines=None):
        self.identity = identity
        self.max_abs = float(max_abs)
        self.mean_abs = float(mean_abs)
        self.degenerate_fraction = float(degenerate_fraction)
        self.grid = grid
        self.lines = dict(lines or {})

    def as_dict(self):
        return {"identity": self.identity, "grid": self.grid,
                "max_abs": self.max_abs, "mean_abs": self.mean_abs,
                "degenerate_fraction": self.degenerate_fraction}

    def __repr__(self):
        return "ResidualReport({!r}, max_abs={:.3e})".format(
            self.identity, self.max_abs)


def _stats(stack, exclude=None):
    """Pooled (max, mean) of absolute residuals; `exclude` masks points."""
    pooled = []
    for a in stack:
        a = np.abs(np.asarray(a))
        if exclude is not None:
            a = a[~exclude]
        pooled.append(a.ravel())
    alls = np.concatenate(pooled)
    if alls.size == 0:
        raise DegenerateTransform("every grid point is degenerate")
    return float(np.max(alls)), float(np.mean(alls))


def _grid_spec(chart, U):
    nu, nv = (U.shape + (1, 1))[:2]
    return {"nu": int(nu), "nv": int(nv),
            "domain": [list(map(float, chart.domain[0])),
                       list(map(float, chart.domain[1]))]}


def _sample(chart, grid, order):
    if grid is None:
        grid = sample_grid(chart, VERIFY_GRID, VERIFY_GRID)
    U, V = grid
    frame = frame_at(chart, U, V, order=order)
    return U, frame, invariants(frame)


# structure and integrability identities


def structure_residual(frame, inv):
    """Residual values of the five frame derivative equations."""
    Y, Yz, Yzb = frame.Y, frame.Yz, frame.Yzb
    N, L, R = frame.N, frame.L, frame.R

    r1 = Yz.z() + Y * (inv.s * 0.5) - L * inv.lambda1 - R * inv.lambda2
    r2 = Yz.zbar() - Y * inv.beta - N * 0.5
    r3 = (N.z() - Yz * (inv.beta * 2.0) + Yzb * inv.s
          - L * (inv.gamma1 * 2.0) - R * (inv.gamma2 * 2.0))
    r4 = (L.z() - L * inv.alpha + Y * (inv.gamma2 * 2.0)
          - Yzb * (inv.lambda2 * 2.0))
    r5 = (R.z() + R * inv.alpha + Y * (inv.gamma1 * 2.0)
          - Yzb * (inv.lambda1 * 2.0))

    parts = {"second_derivative": r1, "mixed_derivative": r2,
             "gauss_direction": r3, "left_null": r4, "right_null": r5}
    mx, mn = _stats([p.value for p in parts.values()])
    lines = {k: float(np.max(np.abs(p.value))) for k, p in parts.items()}
    return ResidualReport("structure", mx, mn, lines=lines)


def check_structure(chart, grid=None, order=DEFAULT_ORDER):
    U, frame, inv = _sample(chart, grid, order)
    report = structure_residual(frame, inv)
    report.grid = _grid_spec(chart, U)
    return report


def integrability_residual(frame, inv):
    """Residual values of the compatibility equations."""
    w1, w2 = willmore_operators(inv)
    gauss = (inv.s.zbar() + inv.beta.z() * 2.0
             + inv.lambda1 * inv.gamma2.conj() * 4.0
             + inv.lambda2 * inv.gamma1.conj() * 4.0)
    ricci = (inv.alpha.zbar() - inv.alpha.conj().z()
             + inv.lambda2 * inv.lambda1.conj() * 2.0
             - inv.lambda2.conj() * inv.lambda1 * 2.0)
    pair = inv.kappa_pair + inv.beta
    parts = {"gauss": gauss, "codazzi_left": w1.imag,
             "codazzi_right": w2.imag, "ricci": ricci,
             "pair_consistency": pair}
    mx, mn = _stats([p.value for p in parts.values()])
    lines = {k: float(np.max(np.abs(p.value))) for k, p in parts.items()}
    return ResidualReport("integrability", mx, mn, lines=lines)


def check_integrability(chart, grid=None, order=DEFAULT_ORDER):
    U, frame, inv = _sample(chart, grid, order)
    report = integrability_residual(frame, inv)
    report.grid = _grid_spec(chart, U)
    return report


# Willmore condition and the S-condition


def residual_scale(inv):
    """Pointwise scale (|lambda| + |gamma| + |s| + 1) that makes the
    Willmore and sigma residual tolerances parameter-free."""
    return (np.abs(inv.lambda1.value) + np.abs(inv.lambda2.value)
            + np.abs(inv.gamma1.value) + np.abs(inv.gamma2.value)
            + np.abs(inv.s.value) + 1.0)


def willmore_report(inv):
    """Scale-normalized residual of the Willmore condition, both null
    directions pooled."""
    w1, w2 = willmore_operators(inv)
    scale = residual_scale(inv)
    a1 = np.abs(w1.value) / scale
    a2 = np.abs(w2.value) / scale
    mx, mn = _stats([a1, a2])
    return ResidualReport("willmore", mx, mn, lines={
        "left": float(np.max(a1)), "right": float(np.max(a2))})


def willmore_residual(chart, grid=None, order=DEFAULT_ORDER):
    U, frame, inv = _sample(chart, grid, order)
    report = willmore_report(inv)
    report.grid = _grid_spec(chart, U)
    return report


def swillmore_deviation(inv):
    """Raw sup of |lambda1 gamma2 - lambda2 gamma1|, zero exactly when
    the two adjoint directions coincide."""
    disc = inv.lambda1 * inv.gamma2 - inv.lambda2 * inv.gamma1
    return float(np.max(np.abs(disc.value)))


def swillmore_report(inv):
    disc = inv.lambda1 * inv.gamma2 - inv.lambda2 * inv.gamma1
    both = inv.umbilic_left & inv.umbilic_right
    mx, mn = _stats([disc.value])
    return ResidualReport("swillmore", mx, mn,
                          degenerate_fraction=np.mean(both),
                          lines={"deviation": mx})


def swillmore_residual(chart, grid=None, order=DEFAULT_ORDER):
    U, frame, inv = _sample(chart, grid, order)
    report = swillmore_report(inv)
    report.grid = _grid_spec(chart, U)
    return report


def _require_willmore(inv, gate):
    worst = willmore_report(inv).max_abs
    if worst > gate:
        raise NotWillmore("Willmore residual exceeds the gate",
                          residual=worst, gate=gate)


def theta_report(inv, willmore_gate=WILLMORE_GATE):
    """Relative antiholomorphy of the quartic form; only meaningful on
    Willmore charts, hence gated."""
    _require_willmore(inv, willmore_gate)
    absolute = np.abs(inv.theta.zbar().value)
    relative = absolute / (np.abs(inv.theta.value) + 1e-12)
    both = inv.umbilic_left & inv.umbilic_right
    mx, mn = _stats([relative])
    return ResidualReport("theta_holomorphy", mx, mn,
                          degenerate_fraction=np.mean(both),
                          lines={"relative": mx,
                                 "absolute": float(np.max(absolute))})


def theta_holomorphy(chart, grid=None, order=DEFAULT_ORDER,
                     willmore_gate=WILLMORE_GATE):
    U, frame, inv = _sample(chart, grid, order)
    report = theta_report(inv, willmore_gate)
    report.grid = _grid_spec(chart, U)
    return report


def mu_riccati_residual(inv, side="left"):
    """|mu_z - mu^2/2 - s| for one adjoint direction."""
    mu = inv.mu_left if side == "left" else inv.mu_right
    res = mu.z() - mu * mu * 0.5 - inv.s
    return float(np.max(np.abs(res.value)))


def adjoint_side(inv):
    """Which mu direction is usable: the one whose defining lambda is
    farther from the umbilic locus over the batch."""
    m1 = float(np.min(np.abs(inv.lambda1.value)))
    m2 = float(np.min(np.abs(inv.lambda2.value)))
    return "left" if m2 >= m1 else "right"


# conformal Gauss map metric data


def gauss_metric_report(Y):
    from .frames import conformal_gauss_data
    data = conformal_gauss_data(Y)
    unit = np.abs(data["gram_GG"] - 1.0)
    metric = np.abs(data["quarter_dG2"] - data["kappa_pair"])
    mx, mn = _stats([unit, metric])
    return ResidualReport("conformal_gauss", mx, mn, lines={
        "gram_GG": float(np.max(unit)),
        "quarter_dG2": float(np.max(metric))})


def gauss_metric_check(chart, grid=None, order=6):
    if grid is None:
        grid = sample_grid(chart, VERIFY_GRID, VERIFY_GRID)
    U, V = grid
    from .frames import canonical_lift
    Y = canonical_lift(chart.lift_at(U, V, order=order))
    report = gauss_metric_report(Y)
    report.grid = _grid_spec(chart, U)
    return report


# quadrature


class EnergyResult:
    """Quadrature value plus one coarse refinement for error control."""

    __slots__ = ("value", "estimate", "refinements", "meta")

    def __init__(self, value, estimate, refinements, meta=None):
        self.value = float(value)
        self.estimate = float(estimate)
        self.refinements = list(refinements)
        self.meta = dict(meta or {})

    def as_dict(self):
        return {"value": self.value, "estimate": self.estimate,
                "refinements": self.refinements}


def _axis_quadrature(lo, hi, n, periodic):
    if periodic:
        x = lo + (hi - lo) * np.arange(n) / n
        w = np.full(n, (hi - lo) / n)
        return x, w
    t, w = np.polynomial.legendre.leggauss(n)
    x = lo + (hi - lo) * (t + 1.0) / 2.0
    return x, w * (hi - lo) / 2.0


def willmore_energy(chart, nu=64, nv=64, order=3, abs_integrand=False):
    """Willmore energy of a chart over its domain.

    Periodic directions use the uniform trapezoid rule (spectral for
    closed charts), open ones Gauss-Legendre.  One half-resolution pass
    supplies the convergence estimate.
    """
    (u0, u1), (v0, v1) = chart.domain

    def single(nu_, nv_):
        xu, wu = _axis_quadrature(u0, u1, nu_, chart.periodic[0])
        xv, wv = _axis_quadrature(v0, v1, nv_, chart.periodic[1])
        U, V = np.meshgrid(xu, xv, indexing="ij")
        f = pair_density(chart.lift_at(U, V, order=order)).value.real
        worst = float(np.max(np.abs(f)))
        if worst > SINGULAR_INTEGRAND:
            raise IntegrandSingular("energy density blows up on the grid",
                                    worst=worst)
        if abs_integrand:
            f = np.abs(f)
        return float(np.einsum("i,j,ij->", wu, wv, f))

    coarse_nu = max(2, int(np.ceil(nu / 2)))
    coarse_nv = max(2, int(np.ceil(nv / 2)))
    coarse = single(coarse_nu, coarse_nv)
    fine = single(nu, nv)
    refinements = [
        {"nu": coarse_nu, "nv": coarse_nv, "value": coarse},
        {"nu": nu, "nv": nv, "value": fine},
    ]
    meta = {}
    if "torus_pq" in chart.meta:
        meta["torus_pq"] = list(chart.meta["torus_pq"])
    return EnergyResult(fine, abs(fine - coarse), refinements, meta)


def homogeneous_torus_energy(p, q):
    """Closed-form Willmore energy of the rational member p/q of the
    homogeneous torus family."""
    return p * p * np.pi ** 2 / np.sqrt(float(p * p - q * q))


# harmonicity of the adjoint pair map


def _wedge(x, y):
    return x[..., :, None] * y[..., None, :] \
        - x[..., None, :] * y[..., :, None]


def _lam_inner(a, b):
    return 0.5 * np.einsum("...pq,...pq,p,q->...", a, b, SIGNS, SIGNS)


def harmonicity_report(frame, inv, side=None):
    """Tension of the map sending a point to the plane spanned by the
    lift and its adjoint.

    The tension is the tangential part of W_zzbar after removing the
    conformal-factor multiple of W; it vanishes exactly when the chart
    is Willmore.  Diagnostic lines record the radial component and the
    conformal factor consistency |<W_z,W_zbar> - (rho+rho bar)/2|, both
    construction identities.
    """
    if side is None:
        side = adjoint_side(inv)
    rho = inv.rho_left if side == "left" else inv.rho_right
    degenerate = inv.umbilic_left if side == "left" else inv.umbilic_right
    if np.all(degenerate):
        raise DegenerateTransform(
            "adjoint direction degenerates on the whole grid", side=side)
    yhat = adjoint_vector(frame, inv, side)

    Yv = frame.Y.value.real
    Yz = frame.Y.z().value
    Yzb = frame.Y.zbar().value
    Yzzb = frame.Y.z().zbar().value
    Hv = yhat.value.real
    Hz = yhat.z().value
    Hzb = yhat.zbar().value
    Hzzb = yhat.z().zbar().value

    W = _wedge(Yv, Hv)
    Wz = _wedge(Yz, Hv) + _wedge(Yv, Hz)
    Wzb = _wedge(Yzb, Hv) + _wedge(Yv, Hzb)
    Wzzb = (_wedge(Yzzb, Hv) + _wedge(Yz, Hzb)
            + _wedge(Yzb, Hz) + _wedge(Yv, Hzzb))

    factor = (rho.value + np.conj(rho.value)).real / 2.0
    metric = np.abs(_lam_inner(Wz, Wzb) - factor)

    Rw = Wzzb - factor[..., None, None] * W
    radial = _lam_inner(Rw, W)

    # basis of the common orthogonal complement of the moving plane
    rows = np.stack([Yv * SIGNS, Hv * SIGNS], axis=-2)
    _, _, vh = np.linalg.svd(rows)
    h = vh[..., 2:, :].real

    g = np.einsum("...ic,c,...jc->...ij", h, SIGNS, h)
    basis_up = _wedge(h, np.broadcast_to(Hv[..., None, :], h.shape))
    basis_dn = _wedge(np.broadcast_to(Yv[..., None, :], h.shape), h)
    rhs_up = 0.5 * np.einsum("...pq,...ipq,p,q->...i", Rw, basis_up,
                             SIGNS, SIGNS)
    rhs_dn = 0.5 * np.einsum("...pq,...ipq,p,q->...i", Rw, basis_dn,
                             SIGNS, SIGNS)
    b = np.linalg.solve(g, rhs_up[..., None])[..., 0]
    a = np.linalg.solve(g, rhs_dn[..., None])[..., 0]
    c_w = -radial

    tangential = (c_w[..., None, None] * W
                  + np.einsum("...i,...ipq->...pq", a, basis_up)
                  + np.einsum("...i,...ipq->...pq", b, basis_dn))
    norm = np.sqrt(0.5 * np.sum(np.abs(tangential) ** 2, axis=(-2, -1)))

    exclude = degenerate if np.any(degenerate) else None
    mx, mn = _stats([norm], exclude=exclude)
    return ResidualReport(
        "harmonicity", mx, mn,
        degenerate_fraction=np.mean(degenerate),
        lines={"tension": mx,
               "radial": float(np.max(np.abs(radial))),
               "metric": float(np.max(metric))})


def harmonicity_residual(chart, grid=None, order=DEFAULT_ORDER, side=None):
    U, frame, inv = _sample(chart, grid, order)
    report = harmonicity_report(frame, inv, side)
    report.grid = _grid_spec(chart, U)
    return report


# the quartic differential of coincident adjoint directions


def omega_report(frame, inv, side=None, swillmore_gate=SWILLMORE_GATE):
    """The form 4 (rho lambda1 lambda2)^2, its antiholomorphy defect and
    the adjoint second-derivative cross-check.  Requires coincident
    adjoint directions and both lambdas bounded away from zero."""
    dev = swillmore_deviation(inv)
    if dev > swillmore_gate:
        raise NotSWillmore("adjoint directions do not coincide",
                           deviation=dev, gate=swillmore_gate)
    degenerate = inv.umbilic_left | inv.umbilic_right
    if np.all(degenerate):
        raise DegenerateTransform(
            "a polar direction degenerates on the whole grid",
            points=int(np.sum(degenerate)))
    if side is None:
        side = adjoint_side(inv)
    rho = inv.rho_left if side == "left" else inv.rho_right
    core = rho * inv.lambda1 * inv.lambda2
    omega = core * core * 4.0

    yhat = adjoint_vector(frame, inv, side)
    yhzz = yhat.z().z()
    cross = inner(yhzz, yhzz) + core * rho * 2.0

    exclude = degenerate if np.any(degenerate) else None
    mx, mn = _stats([core.zbar().value], exclude=exclude)
    report = ResidualReport(
        "omega_holomorphy", mx, mn,
        degenerate_fraction=np.mean(degenerate),
        lines={"holomorphy": mx,
               "cross_check": float(np.max(np.abs(cross.value)))})
    return report, omega.value, side


def omega_value(chart, grid=None, order=DEFAULT_ORDER,
                swillmore_gate=SWILLMORE_GATE):
    U, frame, inv = _sample(chart, grid, order)
    report, omega, side = omega_report(frame, inv,
                                       swillmore_gate=swillmore_gate)
    report.grid = _grid_spec(chart, U)
    return report, omega, side
