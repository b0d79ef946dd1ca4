"""Canonical lifts, adapted frames and conformal invariants.

Everything here is pointwise jet algebra.  A chart's raw lift is first
rescaled to the canonical lift Y with <Y_z, Y_zbar> = 1/2; the conformal
Gauss direction N and a gauged null basis L, R of the normal plane then
make the invariant scalars plain inner products.

Frame conventions, fixed once:

  * <N, N> = 0, <N, Y> = -1, <N, Y_z> = 0;
  * <L, L> = <R, R> = 0, <L, R> = -1, both orthogonal to Y, Y_u, Y_v, N;
  * det(Y, Y_u, Y_v, N, L, R) > 0;
  * the gauge balances |<L, W0>| = |<R, W0>| against a fixed reference
    axis W0, with <L, W0> < 0.
"""

import numpy as np

from .ambient import SIGNS
from .errors import (GaugeReferenceDegenerate, NormalPlaneDegenerate,
                     NotSpacelike)
from .jets import Jet2, JetVec6, inner, jet_where, seed_point

SPACELIKE_TOL = 1e-10
PLANE_TOL = 1e-10
GAUGE_TOL = 1e-8
UMBILIC_TOL = 1e-8

# reference axes for the gauge, tried in order: primary e_4 (first
# timelike direction), then e_3, then the rest.  Some axis always
# works: <L, R> = -1 is a sum of six componentwise products, so the
# dominant slot pairs away from zero with both null directions.
GAUGE_PRIMARY = 4
GAUGE_FALLBACK = 3
GAUGE_AXES = (4, 3, 2, 1, 0, 5)


def canonical_lift(raw):
    """Scale a raw light cone lift to the canonical one.

    The returned jet has one order less than the input (one derivative
    is consumed by the normalization).  Raises NotSpacelike where the
    induced metric degenerates or flips sign.
    """
    rz = raw.z()
    rzb = raw.zbar()
    g2 = (inner(rz, rzb) * 2.0).real
    scale = np.sum(np.abs(rz.value) ** 2, axis=-1)
    ratio = g2.value.real / np.maximum(scale, 1e-300)
    if np.min(ratio) <= SPACELIKE_TOL:
        raise NotSpacelike("induced metric is not positive",
                           worst=float(np.min(ratio)))
    return raw.truncated(raw.order - 1) * g2.power(-0.5)


def _component_at(w, idx):
    """Extract component jets of w along a per-point index array."""
    idx = np.asarray(idx)
    if idx.ndim == 0:
        return Jet2(w.c[..., int(idx), :, :])
    sel = np.broadcast_to(idx, w.batch_shape)[..., None, None, None]
    return Jet2(np.take_along_axis(w.c, sel, axis=-3)[..., 0, :, :])


class FrameData:
    """Adapted frame along a chart, all entries jets of equal order
    except Y (one higher) and its first derivatives."""

    __slots__ = ("Y", "Yz", "Yzb", "Yu", "Yv", "N", "L", "R",
                 "orientation_det", "gauge_axis", "gauge_fallback")

    def __init__(self, Y, Yz, Yzb, Yu, Yv, N, L, R, orientation_det,
                 gauge_axis):
        self.Y = Y
        self.Yz = Yz
        self.Yzb = Yzb
        self.Yu = Yu
        self.Yv = Yv
        self.N = N
        self.L = L
        self.R = R
        self.orientation_det = orientation_det
        self.gauge_axis = gauge_axis
        self.gauge_fallback = gauge_axis != GAUGE_PRIMARY


def frame_field(Y):
    """Build the adapted frame from a canonical lift.

    N, L, R come out two orders below Y.  The normal plane basis is
    found by projecting coordinate axes off the tangent 4-space,
    diagonalizing the best candidate pair at value level, then
    orthonormalizing as jets so the frame identities hold exactly.
    """
    Yz = Y.z()
    Yzb = Y.zbar()
    Yu = Y.du()
    Yv = Y.dv()
    Yzzb = Yz.zbar()
    N = Yzzb * 2.0 + Y * (inner(Yzzb, Yzzb) * 2.0)

    order = N.order
    Yt = Y.truncated(order)
    Yut = Yu.truncated(order)
    Yvt = Yv.truncated(order)

    # value-level candidate selection: project each coordinate axis off
    # span{Y, Yu, Yv, N} and look for the best Lorentzian pair
    Yval = Y.value.real
    Yuval = Yu.value.real
    Yvval = Yv.value.real
    Nval = N.value.real
    eye = np.eye(6)
    n_all = (eye
             + SIGNS[:, None] * (Nval[..., None, :] * Yval[..., :, None]
                                 + Yval[..., None, :] * Nval[..., :, None]
                                 - Yuval[..., None, :] * Yuval[..., :, None]
                                 - Yvval[..., None, :] * Yvval[..., :, None]))
    q = np.einsum("...ic,...ic,c->...i", n_all, n_all, SIGNS)
    C = np.einsum("...ic,...jc,c->...ij", n_all, n_all, SIGNS)
    E = np.einsum("...ic,...ic->...i", n_all, n_all)
    D = q[..., :, None] * q[..., None, :] - C ** 2
    Dn = D / np.maximum(E[..., :, None] * E[..., None, :], 1e-300)
    # an axis sitting inside the tangent 4-space projects to rounding
    # noise; drop it or its 0/0 ratio can masquerade as a good pair
    tiny = E < 1e-14 * np.max(E, axis=-1, keepdims=True)
    usable = ~(tiny[..., :, None] | tiny[..., None, :])
    upper = np.triu(np.ones((6, 6)), 1) > 0
    # select by the raw Gram discriminant: it rewards pairs that are
    # both Lorentzian and well-sized, so a thin near-tangent axis never
    # wins and the normalization below stays well conditioned.  The
    # scale-free ratio is kept for the degeneracy gate only.
    score = np.where(usable & upper, D, np.inf)
    flat = score.reshape(score.shape[:-2] + (36,))
    best = np.argmin(flat, axis=-1)
    flatn = np.where(usable & upper, Dn, np.inf).reshape(flat.shape)
    worst = np.max(np.take_along_axis(flatn, best[..., None], axis=-1))
    if worst > -PLANE_TOL:
        raise NormalPlaneDegenerate(
            "no Lorentzian plane in the projected axes",
            worst=float(worst))
    ia, ib = best // 6, best % 6

    def project_off_tangent(idx):
        sgn = SIGNS[idx]
        one_hot = JetVec6.constant(eye[idx], order)
        cn = _component_at(N, idx) * sgn
        cu = _component_at(Yut, idx) * sgn
        cv = _component_at(Yvt, idx) * sgn
        cy = _component_at(Yt, idx) * sgn
        return one_hot - (Yt * (-cn) + Yut * cu + Yvt * cv + N * (-cy))

    na = project_off_tangent(ia)
    nb = project_off_tangent(ib)

    # value-level diagonalization picks the rotation that makes the
    # first vector spacelike and the second timelike with the largest
    # margins; the jet-level Gram-Schmidt below then needs no branches
    qa = np.take_along_axis(q, ia[..., None], axis=-1)[..., 0]
    qb = np.take_along_axis(q, ib[..., None], axis=-1)[..., 0]
    cab = inner(na, nb).value.real
    phi = 0.5 * np.arctan2(2.0 * cab, qa - qb)
    m1 = na * np.cos(phi) + nb * np.sin(phi)
    m2 = na * (-np.sin(phi)) + nb * np.cos(phi)

    q1 = inner(m1, m1).real
    f1 = m1 * q1.power(-0.5)
    m2 = m2 - f1 * inner(m2, f1)
    q2 = -inner(m2, m2).real
    f2 = m2 * q2.power(-0.5)

    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    L = (f2 - f1) * inv_sqrt2
    R = (f2 + f1) * inv_sqrt2

    rows = np.stack([Yval, Yuval, Yvval, Nval,
                     L.value.real, R.value.real], axis=-2)
    det = np.linalg.det(rows)
    swap = det < 0
    L, R = jet_where(swap, R, L), jet_where(swap, L, R)

    L, R, gauge_axis = _gauge(L, R)

    return FrameData(Y, Yz, Yzb, Yu, Yv, N, L, R,
                     orientation_det=np.abs(det), gauge_axis=gauge_axis)


def _gauge(L, R):
    """Balance L and R against a reference axis and fix their sign.

    Per point the reference is the first axis in GAUGE_AXES whose
    pairings with both L and R clear the tolerance (the pairing with
    e_i is SIGNS[i] times component i).  The scale makes the two
    pairings equal in magnitude, the joint sign makes <L, W0> negative.
    Returns the gauged pair and the chosen axis per point.
    """
    shape = np.broadcast_shapes(L.batch_shape, R.batch_shape)
    chosen = np.full(shape, -1, dtype=int)
    pL = None
    pR = None
    for axis in GAUGE_AXES:
        qL = L.component(axis) * SIGNS[axis]
        qR = R.component(axis) * SIGNS[axis]
        ok = ((np.abs(qL.value) >= GAUGE_TOL)
              & (np.abs(qR.value) >= GAUGE_TOL) & (chosen < 0))
        if pL is None:
            pL, pR = qL, qR
        else:
            pL = jet_where(ok, qL, pL)
            pR = jet_where(ok, qR, pR)
        chosen = np.where(ok, axis, chosen)
    if np.any(chosen < 0):
        raise GaugeReferenceDegenerate(
            "no reference axis pairs nondegenerately with the null "
            "normal directions", points=int(np.sum(chosen < 0)))
    sL = np.where(pL.value.real >= 0, 1.0, -1.0)
    sR = np.where(pR.value.real >= 0, 1.0, -1.0)
    lam = ((pR * sR) * (pL * sL).reciprocal()).power(0.5)
    L = L * lam
    R = R * lam.reciprocal()
    flip = sL > 0
    L = jet_where(flip, -L, L)
    R = jet_where(flip, -R, R)
    return L, R, chosen


class InvariantSet:
    """Pointwise conformal invariants of a framed chart.

    lambda1 and lambda2 weight the null normal directions in Y_zz, s is
    the Schwarzian-like coefficient, alpha the normal connection form,
    gamma1/gamma2 the derived coefficients of N_z.  The division-based
    fields (mu, rho, sigma) are only meaningful off the umbilic masks,
    and rho is None when the frame order cannot support one more
    derivative of mu.
    """

    __slots__ = ("lambda1", "lambda2", "s", "alpha", "gamma1", "gamma2",
                 "beta", "kappa_pair", "kappa_iso", "mu_left", "mu_right",
                 "theta", "rho_left", "rho_right", "sigma_left",
                 "sigma_right", "umbilic_left", "umbilic_right")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw[name])

    def classification(self):
        """Per-point label: generic, left_umbilic (lambda2 ~ 0),
        right_umbilic (lambda1 ~ 0), or umbilic (both)."""
        shape = np.broadcast_shapes(np.shape(self.umbilic_left),
                                    np.shape(self.umbilic_right))
        out = np.full(shape, "generic", dtype=object)
        left = np.broadcast_to(self.umbilic_left, shape)
        right = np.broadcast_to(self.umbilic_right, shape)
        out[left] = "left_umbilic"
        out[right] = "right_umbilic"
        out[left & right] = "umbilic"
        return out


def invariants(frame):
    """Extract the invariant scalars from an adapted frame."""
    Yzz = frame.Yz.z()
    Yzzb = frame.Yz.zbar()
    lambda1 = -inner(Yzz, frame.R)
    lambda2 = -inner(Yzz, frame.L)
    s = inner(Yzz, frame.N) * 2.0
    alpha = -inner(frame.L.z(), frame.R)
    abar = alpha.conj()
    gamma1 = lambda1.zbar() + lambda1 * abar
    gamma2 = lambda2.zbar() - lambda2 * abar
    beta = (lambda1 * lambda2.conj() + lambda2 * lambda1.conj()).real
    kappa_pair = inner(Yzzb, Yzzb).real
    kappa_iso = lambda1 * lambda2 * (-2.0)

    floor = UMBILIC_TOL * (1.0 + np.abs(s.value))
    umb_right = np.abs(lambda1.value) < floor
    umb_left = np.abs(lambda2.value) < floor
    one = Jet2.constant(np.ones(lambda1.batch_shape), lambda1.order)
    safe1 = jet_where(umb_right, one, lambda1)
    safe2 = jet_where(umb_left, one, lambda2)

    mubar_left = gamma2 * (-2.0) / safe2
    mubar_right = gamma1 * (-2.0) / safe1
    mu_left = mubar_left.conj()
    mu_right = mubar_right.conj()

    disc = lambda1 * gamma2 - lambda2 * gamma1
    theta = disc * disc

    # rho sits one derivative below mu; leave it out when the frame
    # does not carry that order (transform steps run at the edge)
    if mubar_left.order > 0:
        rho_left = mubar_left.z() + beta * 2.0
        rho_right = mubar_right.z() + beta * 2.0
    else:
        rho_left = None
        rho_right = None
    sigma_left = gamma1 * 2.0 + lambda1 * mubar_left
    sigma_right = gamma2 * 2.0 + lambda2 * mubar_right

    return InvariantSet(
        lambda1=lambda1, lambda2=lambda2, s=s, alpha=alpha,
        gamma1=gamma1, gamma2=gamma2, beta=beta, kappa_pair=kappa_pair,
        kappa_iso=kappa_iso, mu_left=mu_left, mu_right=mu_right,
        theta=theta, rho_left=rho_left, rho_right=rho_right,
        sigma_left=sigma_left, sigma_right=sigma_right,
        umbilic_left=umb_left, umbilic_right=umb_right)


def frame_at(chart, u, v, order=8):
    """Canonical lift and adapted frame of a chart at sample points."""
    raw = chart.lift_at(u, v, order=order)
    return frame_field(canonical_lift(raw))


def frame_and_invariants(chart, u, v, order=8):
    frame = frame_at(chart, u, v, order=order)
    return frame, invariants(frame)


def invariants_at(chart, u, v, order=8):
    """Invariant scalars of a chart at sample points."""
    return invariants(frame_at(chart, u, v, order=order))


def classify_point(inv):
    """Coarse per-point label: umbilic when both lambdas sit under the
    tolerance, null_umbilic when exactly one does, generic otherwise."""
    left = np.asarray(inv.umbilic_left)
    right = np.asarray(inv.umbilic_right)
    shape = np.broadcast_shapes(left.shape, right.shape)
    left = np.broadcast_to(left, shape)
    right = np.broadcast_to(right, shape)
    out = np.full(shape, "generic", dtype=object)
    out[left ^ right] = "null_umbilic"
    out[left & right] = "umbilic"
    return out


def central_sphere_basis(frame):
    """Real basis {Y, Re Y_z, Im Y_z, N} of the central sphere 4-space,
    all truncated to a common order."""
    order = frame.N.order
    return [frame.Y.real.truncated(order),
            frame.Yz.real.truncated(order),
            (frame.Yz * (-1j)).real.truncated(order),
            frame.N.real]


def central_sphere_at(chart, u, v, order=8):
    """Central sphere basis of a chart at sample points."""
    return central_sphere_basis(frame_at(chart, u, v, order=order))


def pair_density(raw):
    """<Y_zzbar, Y_zzbar> of the canonical lift, the Willmore energy
    density against du dv.  Cheap: needs no frame, raw order 3."""
    Y = canonical_lift(raw)
    Yzzb = Y.z().zbar()
    return inner(Yzzb, Yzzb).real


def willmore_operators(inv):
    """The two components of the Willmore condition in the gauged
    frame.  Both vanish identically on Willmore charts."""
    sbar_half = inv.s.conj() * 0.5
    abar = inv.alpha.conj()
    w1 = inv.gamma1.zbar() + inv.gamma1 * abar + sbar_half * inv.lambda1
    w2 = inv.gamma2.zbar() - inv.gamma2 * abar + sbar_half * inv.lambda2
    return w1, w2


def adjoint_vector(frame, inv, side="left"):
    """The adjoint lift built from one of the mu directions.

    Null, with <Y, Yhat> = -1 and <Y_z, Yhat> = mu/2, for any chart;
    it only becomes a conformal chart of its own where the surface is
    Willmore (the transform layer checks that gate)."""
    if side == "left":
        mu = inv.mu_left
    elif side == "right":
        mu = inv.mu_right
    else:
        raise ValueError("side must be 'left' or 'right'")
    mubar = mu.conj()
    order = mu.order
    return (frame.Y.truncated(order) * (mu * mubar * 0.5)
            + frame.Yz.truncated(order) * mubar
            + frame.Yzb.truncated(order) * mu
            + frame.N.truncated(order))


def envelope_vector(frame, inv):
    """Second envelope of the left null congruence.

    Adds the L-direction correction that makes the result orthogonal to
    L, L_z and L_zzbar; the correction coefficient is real on Willmore
    charts, so its imaginary part is dropped (it is an integrability
    residual)."""
    _, w2 = willmore_operators(inv)
    one = Jet2.constant(np.ones(inv.lambda2.batch_shape), inv.lambda2.order)
    safe2 = jet_where(inv.umbilic_left, one, inv.lambda2)
    corr = (w2 / (safe2 * safe2.conj())).real
    yhat = adjoint_vector(frame, inv, "left")
    return yhat + frame.L.truncated(corr.order) * corr


def conformal_gauss_data(Y):
    """Metric data of the central sphere congruence.

    Returns per-point arrays: gram_GG, a folded Gram determinant of
    (Y, Y_z, Y_zbar, N) that equals 1 identically, and quarter_dG2,
    the quarter conformal-metric trace of the congruence, which equals
    <Y_zzbar, Y_zzbar> wherever the congruence is regular.
    """
    Yz = Y.z()
    Yzb = Y.zbar()
    Yzz = Yz.z()
    Yzzb = Yz.zbar()
    Yzbzb = Yzb.zbar()
    N = Yzzb * 2.0 + Y * (inner(Yzzb, Yzzb) * 2.0)
    Nz = N.z()
    Nzb = N.zbar()

    base = [Y, Yz, Yzb, N]
    dz = [Yz, Yzz, Yzzb, Nz]
    dzb = [Yzb, Yzzb, Yzbzb, Nzb]

    vals = np.stack([w.value for w in base], axis=-2)
    vals_z = np.stack([w.value for w in dz], axis=-2)
    vals_zb = np.stack([w.value for w in dzb], axis=-2)

    def gram_det(a, b):
        g = np.einsum("...ic,c,...jc->...ij", a, SIGNS, b)
        return np.linalg.det(g)

    gram_gg = 4.0 * gram_det(vals, vals)

    total = 0.0
    for i in range(4):
        ai = vals.copy()
        ai[..., i, :] = vals_z[..., i, :]
        for j in range(4):
            bj = vals.copy()
            bj[..., j, :] = vals_zb[..., j, :]
            total = total + gram_det(ai, bj)
    quarter = 2.0 * np.real(total)
    kp = np.real(inner(Yzzb, Yzzb).value)
    return {"gram_GG": np.real(gram_gg), "quarter_dG2": quarter,
            "kappa_pair": kp}
