"""Low-level ODE drivers for the squeeze-parameter flow.

Two engines, both explicit:

  * an embedded Dormand-Prince 5(4) pair with proportional step control
    (the adaptive integrator), and
  * a classical fixed-step fourth-order Runge-Kutta scheme used for
    cross-validation.

The flow is integrated in the dimensionless variable x = -k eta, which
decreases from deep sub-horizon (x >> 1) through horizon crossing (x = 1)
to the super-horizon evaluation point, so steps are negative in x.

Stiffness handling.  The rotation-angle equation carries a coth(r) relaxation
rate: for r ~ 1e-6 the angle is attracted to its quasi-static fixed point
about 1e6/k times faster than any other scale in the problem.  Resolving that
with an explicit method costs ~coth(r)/k steps per unit x, which is
astronomically many exactly in the regime the pipeline must sweep.  The
attraction is so strong that the angle deviates from the fixed-point branch

    sin(2 phi*) = 2 M_P mu2 / [A tanh(r)/(1 + mu2 tanh r) + M_P (coth r + mu2)]
    cos(2 phi*) = -sqrt(1 - sin^2(2 phi*))        (the attracting branch)

by less than one part in 1e12 once locked.  The adaptive driver therefore
supports an adiabatic fast path: while the relaxation rate times the
remaining span exceeds a budget, it advances the amplitude r alone with the
same embedded pair, holding phi on the fixed-point branch, and falls back to
the full two-variable system as soon as that is affordable.  Entry requires
the state to already sit on the branch (within 1e-8); exit re-seeds the full
system from the branch, which is continuous.  The fast path is validated
against a stiff reference integrator in the test suite; integrate() accepts
stiff_mode="off" to force the plain explicit method.

Everything here is numba-jitted when numba is importable and falls back to
pure Python (slow but identical results) otherwise.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


# form / coupling-power dispatch codes
FORM_CONFORMAL = 0
FORM_TRANSFORMED = 1
FORM_CLOSED = 2
POWER_LITERAL = 0
POWER_CONSISTENT = 1

# driver status codes
STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

_SLAVE_ENTRY_TOL = 1e-8  # |phi - phi*| required before the fast path engages
_STALL_SNAP_STEPS = 5000  # full-system steps tolerated in a stiff window


@njit(cache=True)
def _coth(r):
    # Laurent form keeps coth(r)*sin(2 phi) accurate for tiny |r| (odd in r,
    # so it also serves transient negative stage values).  r = 0 is the
    # genuine coordinate singularity of the angle equation: return inf and
    # let the step controller reject the step.
    if r == 0.0:
        return math.inf
    if abs(r) < 1e-4:
        return 1.0 / r + r / 3.0 + r * r * r / 45.0
    return math.cosh(r) / math.sinh(r)


@njit(cache=True)
def _rhs_eta(r, phi, a_cc, mu2, mu2_rate, mp, form):
    """Conformal-time derivatives (dr/deta, dphi/deta) of the printed flow.

    a_cc is the closed-coupling factor: M_P |1 - mu1^2| in literal mode,
    |z'/z| in hamiltonian-consistent mode (resolved by the caller).
    """
    tr = math.tanh(r)
    s2p = math.sin(2.0 * phi)
    c2p = math.cos(2.0 * phi)

    if form == FORM_CLOSED:
        # analytic mu2 = mu2' = 0 limit; finite at r = 0
        drdeta = -a_cc * c2p
        dpdeta = 0.5 * s2p * (a_cc * tr + mp * _coth(r))
        return drdeta, dpdeta

    if form == FORM_CONFORMAL:
        s2r = math.sinh(2.0 * r)
        ch2 = math.cosh(r) ** 2
        den = s2r + 2.0 * mu2 * ch2
        if den == 0.0:
            # r = 0 with mu2 = 0: take the 0/0 limit of the printed ratio
            drdeta = -a_cc * c2p - mu2_rate
        else:
            drdeta = (-a_cc * s2r * c2p - s2r * mu2_rate) / den
    else:
        den = tr + mu2
        if den == 0.0:
            drdeta = -(mu2_rate + a_cc * c2p)
        else:
            drdeta = -tr * (mu2_rate + a_cc * c2p) / den

    dpdeta = -mp * mu2 + 0.5 * s2p * (
        a_cc * tr / (1.0 + mu2 * tr) + mp * (_coth(r) + mu2)
    )
    return drdeta, dpdeta


@njit(cache=True)
def _couplings_x(x, k, mp, power, zero_coupling):
    """(a_cc, mu2) at x = -k eta on the constant-eps background."""
    lam = 0.0 if zero_coupling else k / x  # |z'/z| = 1/|eta|
    mu2 = k / mp
    if power == POWER_LITERAL:
        a_cc = lam * lam / mp
    else:
        a_cc = lam
    return a_cc, mu2


@njit(cache=True)
def _rhs_x(x, r, phi, k, mp, power, form, mu2_rate, zero_coupling):
    """(dr/dx, dphi/dx); x = -k eta so d/dx = -(1/k) d/deta."""
    a_cc, mu2 = _couplings_x(x, k, mp, power, zero_coupling)
    drdeta, dpdeta = _rhs_eta(r, phi, a_cc, mu2, mu2_rate, mp, form)
    return -drdeta / k, -dpdeta / k


@njit(cache=True)
def _phase_bracket(x, r, k, mp, power, form, zero_coupling):
    """Bracket B multiplying sin(2 phi)/2 in dphi/deta (the relaxation scale)."""
    a_cc, mu2 = _couplings_x(x, k, mp, power, zero_coupling)
    tr = math.tanh(r)
    if form == FORM_CLOSED:
        return a_cc * tr + mp * _coth(r)
    return a_cc * tr / (1.0 + mu2 * tr) + mp * (_coth(r) + mu2)


@njit(cache=True)
def _attractor_phi(x, r, phi_anchor, k, mp, power, form, zero_coupling):
    """Stable fixed point of the angle equation, branch nearest phi_anchor.

    Returns (phi_star, ok); ok is False when the fixed point does not exist
    or is too marginal (sin 2phi* >= 0.99) to be an attractor.
    """
    b = _phase_bracket(x, r, k, mp, power, form, zero_coupling)
    if form == FORM_CLOSED:
        s = 0.0
    else:
        mu2 = k / mp
        s = 2.0 * mp * mu2 / b
    if not (0.0 <= s < 0.99):
        return phi_anchor, False
    base = 0.5 * (math.pi - math.asin(s))
    m = round((phi_anchor - base) / math.pi)
    return base + m * math.pi, True


# Dormand-Prince 5(4) tableau
_DP_C2, _DP_C3, _DP_C4, _DP_C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_DP_A21 = 1.0 / 5.0
_DP_A31, _DP_A32 = 3.0 / 40.0, 9.0 / 40.0
_DP_A41, _DP_A42, _DP_A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_DP_A51, _DP_A52, _DP_A53, _DP_A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_DP_A61, _DP_A62, _DP_A63, _DP_A64, _DP_A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_DP_B1, _DP_B3, _DP_B4, _DP_B5, _DP_B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
# b5 - b4 error weights (stage 7 = FSAL evaluation at the new point)
_DP_E1, _DP_E3, _DP_E4, _DP_E5, _DP_E6, _DP_E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True)
def _drive_adaptive(
    xs,
    r0,
    phi0,
    k,
    mp,
    power,
    form,
    mu2_rate,
    zero_coupling,
    rtol,
    atol,
    r_cap,
    stiff_auto,
    stiff_budget,
    max_steps,
):
    """Advance (r, phi) through the decreasing checkpoints xs.

    Returns (out_r, out_phi, n_filled, status, n_steps, n_rejected, max_err,
    n_slaved, capped, clamped, snap_dev, fail_x, fail_r, fail_phi); n_filled
    counts completed checkpoints, and the fail_* scalars carry the true state
    where integration stopped when status != 0.
    """
    n_out = len(xs)
    out_r = np.empty(n_out)
    out_phi = np.empty(n_out)
    out_r[0] = r0
    out_phi[0] = phi0

    x = xs[0]
    x_end = xs[n_out - 1]
    r = r0
    phi = phi0

    status = STATUS_OK
    n_steps = 0
    n_rejected = 0
    n_slaved = 0
    max_err = 0.0
    capped = False
    clamped = False
    snap_dev = 0.0

    slaved = False
    stall = 0
    h = -(xs[0] - x_end) * 1e-4  # negative: x decreases
    if h == 0.0:
        h = -1e-8

    fr, fp = _rhs_x(x, r, phi, k, mp, power, form, mu2_rate, zero_coupling)

    i_out = 1
    while i_out < n_out:
        x_target = xs[i_out]

        while x > x_target:
            if n_steps + n_rejected > max_steps:
                status = STATUS_MAX_STEPS
                return (
                    out_r, out_phi, i_out, status, n_steps, n_rejected,
                    max_err, n_slaved, capped, clamped, snap_dev, x, r, phi,
                )

            # mode switching, with hysteresis to avoid chatter
            if stiff_auto:
                rate = _phase_bracket(x, r, k, mp, power, form, zero_coupling) / k
                slack = rate * (x - x_end)
                if slaved:
                    if slack <= stiff_budget:
                        slaved = False
                        stall = 0
                        fr, fp = _rhs_x(
                            x, r, phi, k, mp, power, form, mu2_rate, zero_coupling
                        )
                else:
                    if slack > 2.0 * stiff_budget:
                        ps, ok = _attractor_phi(
                            x, r, phi, k, mp, power, form, zero_coupling
                        )
                        dev = abs(phi - ps)
                        if ok and dev < _SLAVE_ENTRY_TOL:
                            slaved = True
                            phi = ps
                        elif ok and stall > _STALL_SNAP_STEPS and dev < 1e-4:
                            # stiff transient refused to contract; record the
                            # snap distance instead of grinding forever
                            if dev > snap_dev:
                                snap_dev = dev
                            slaved = True
                            phi = ps
                        else:
                            stall += 1

            land = False
            if h <= x_target - x:
                h = x_target - x
                land = True

            if slaved:
                # one-variable embedded step for r on the fixed-point branch
                p1, _ = _attractor_phi(x, r, phi, k, mp, power, form, zero_coupling)
                k1, _ = _rhs_x(x, r, p1, k, mp, power, form, mu2_rate, zero_coupling)
                y2 = r + h * _DP_A21 * k1
                p2, _ = _attractor_phi(x + _DP_C2 * h, y2, phi, k, mp, power, form, zero_coupling)
                k2, _ = _rhs_x(x + _DP_C2 * h, y2, p2, k, mp, power, form, mu2_rate, zero_coupling)
                y3 = r + h * (_DP_A31 * k1 + _DP_A32 * k2)
                p3, _ = _attractor_phi(x + _DP_C3 * h, y3, phi, k, mp, power, form, zero_coupling)
                k3, _ = _rhs_x(x + _DP_C3 * h, y3, p3, k, mp, power, form, mu2_rate, zero_coupling)
                y4 = r + h * (_DP_A41 * k1 + _DP_A42 * k2 + _DP_A43 * k3)
                p4, _ = _attractor_phi(x + _DP_C4 * h, y4, phi, k, mp, power, form, zero_coupling)
                k4, _ = _rhs_x(x + _DP_C4 * h, y4, p4, k, mp, power, form, mu2_rate, zero_coupling)
                y5 = r + h * (_DP_A51 * k1 + _DP_A52 * k2 + _DP_A53 * k3 + _DP_A54 * k4)
                p5, _ = _attractor_phi(x + _DP_C5 * h, y5, phi, k, mp, power, form, zero_coupling)
                k5, _ = _rhs_x(x + _DP_C5 * h, y5, p5, k, mp, power, form, mu2_rate, zero_coupling)
                y6 = r + h * (_DP_A61 * k1 + _DP_A62 * k2 + _DP_A63 * k3 + _DP_A64 * k4 + _DP_A65 * k5)
                p6, _ = _attractor_phi(x + h, y6, phi, k, mp, power, form, zero_coupling)
                k6, _ = _rhs_x(x + h, y6, p6, k, mp, power, form, mu2_rate, zero_coupling)
                r_new = r + h * (_DP_B1 * k1 + _DP_B3 * k3 + _DP_B4 * k4 + _DP_B5 * k5 + _DP_B6 * k6)
                p7, _ = _attractor_phi(x + h, r_new, phi, k, mp, power, form, zero_coupling)
                k7, _ = _rhs_x(x + h, r_new, p7, k, mp, power, form, mu2_rate, zero_coupling)
                err_r = h * (_DP_E1 * k1 + _DP_E3 * k3 + _DP_E4 * k4 + _DP_E5 * k5 + _DP_E6 * k6 + _DP_E7 * k7)
                scale = atol + rtol * max(abs(r), abs(r_new))
                err = abs(err_r) / scale
                accepted = err <= 1.0
                if accepted:
                    x = x_target if land else x + h
                    r = r_new
                    phi = p7
                    n_steps += 1
                    n_slaved += 1
                    if err > max_err:
                        max_err = err
            else:
                k1r, k1p = fr, fp
                r2 = r + h * _DP_A21 * k1r
                q2 = phi + h * _DP_A21 * k1p
                k2r, k2p = _rhs_x(x + _DP_C2 * h, r2, q2, k, mp, power, form, mu2_rate, zero_coupling)
                r3 = r + h * (_DP_A31 * k1r + _DP_A32 * k2r)
                q3 = phi + h * (_DP_A31 * k1p + _DP_A32 * k2p)
                k3r, k3p = _rhs_x(x + _DP_C3 * h, r3, q3, k, mp, power, form, mu2_rate, zero_coupling)
                r4 = r + h * (_DP_A41 * k1r + _DP_A42 * k2r + _DP_A43 * k3r)
                q4 = phi + h * (_DP_A41 * k1p + _DP_A42 * k2p + _DP_A43 * k3p)
                k4r, k4p = _rhs_x(x + _DP_C4 * h, r4, q4, k, mp, power, form, mu2_rate, zero_coupling)
                r5 = r + h * (_DP_A51 * k1r + _DP_A52 * k2r + _DP_A53 * k3r + _DP_A54 * k4r)
                q5 = phi + h * (_DP_A51 * k1p + _DP_A52 * k2p + _DP_A53 * k3p + _DP_A54 * k4p)
                k5r, k5p = _rhs_x(x + _DP_C5 * h, r5, q5, k, mp, power, form, mu2_rate, zero_coupling)
                r6 = r + h * (_DP_A61 * k1r + _DP_A62 * k2r + _DP_A63 * k3r + _DP_A64 * k4r + _DP_A65 * k5r)
                q6 = phi + h * (_DP_A61 * k1p + _DP_A62 * k2p + _DP_A63 * k3p + _DP_A64 * k4p + _DP_A65 * k5p)
                k6r, k6p = _rhs_x(x + h, r6, q6, k, mp, power, form, mu2_rate, zero_coupling)
                r_new = r + h * (_DP_B1 * k1r + _DP_B3 * k3r + _DP_B4 * k4r + _DP_B5 * k5r + _DP_B6 * k6r)
                p_new = phi + h * (_DP_B1 * k1p + _DP_B3 * k3p + _DP_B4 * k4p + _DP_B5 * k5p + _DP_B6 * k6p)
                k7r, k7p = _rhs_x(x + h, r_new, p_new, k, mp, power, form, mu2_rate, zero_coupling)
                err_r = h * (_DP_E1 * k1r + _DP_E3 * k3r + _DP_E4 * k4r + _DP_E5 * k5r + _DP_E6 * k6r + _DP_E7 * k7r)
                err_p = h * (_DP_E1 * k1p + _DP_E3 * k3p + _DP_E4 * k4p + _DP_E5 * k5p + _DP_E6 * k6p + _DP_E7 * k7p)
                sr = atol + rtol * max(abs(r), abs(r_new))
                sp = atol + rtol * max(abs(phi), abs(p_new))
                err = math.sqrt(0.5 * ((err_r / sr) ** 2 + (err_p / sp) ** 2))
                accepted = err <= 1.0
                if accepted:
                    x = x_target if land else x + h
                    r = r_new
                    phi = p_new
                    fr, fp = k7r, k7p  # FSAL
                    n_steps += 1
                    if err > max_err:
                        max_err = err

            if accepted:
                if r < 0.0:
                    r = 0.0
                    clamped = True
                    if not slaved:
                        fr, fp = _rhs_x(x, r, phi, k, mp, power, form, mu2_rate, zero_coupling)
                if r > r_cap:
                    capped = True
            else:
                n_rejected += 1

            # proportional controller on the scalar error
            if err == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, max(0.2, 0.9 * err ** -0.2))
            h = h * factor
            # a rejected step that still demands a sub-ulp stride means the
            # integrator cannot advance (angle singularity or equivalent)
            if (not accepted) and -h < 16.0 * 2.220446049250313e-16 * max(1.0, abs(x)):
                status = STATUS_STEP_UNDERFLOW
                return (
                    out_r, out_phi, i_out, status, n_steps, n_rejected,
                    max_err, n_slaved, capped, clamped, snap_dev, x, r, phi,
                )

        out_r[i_out] = r
        out_phi[i_out] = phi
        i_out += 1

    return (
        out_r, out_phi, n_out, status, n_steps, n_rejected,
        max_err, n_slaved, capped, clamped, snap_dev, x, r, phi,
    )


@njit(cache=True)
def _drive_rk4(
    xs,
    n_sub,
    r0,
    phi0,
    k,
    mp,
    power,
    form,
    mu2_rate,
    zero_coupling,
    r_cap,
):
    """Classical RK4 with n_sub[i] equal steps on segment xs[i] -> xs[i+1].

    Plain full-system stepping, no stiffness bypass; meant for
    cross-validating the adaptive driver on well-conditioned windows.
    Returns (out_r, out_phi, n_steps, capped, clamped).
    """
    n_out = len(xs)
    out_r = np.empty(n_out)
    out_phi = np.empty(n_out)
    out_r[0] = r0
    out_phi[0] = phi0

    r = r0
    phi = phi0
    n_steps = 0
    capped = False
    clamped = False

    for i in range(n_out - 1):
        x0 = xs[i]
        x1 = xs[i + 1]
        n = n_sub[i]
        h = (x1 - x0) / n
        x = x0
        for _ in range(n):
            k1r, k1p = _rhs_x(x, r, phi, k, mp, power, form, mu2_rate, zero_coupling)
            k2r, k2p = _rhs_x(
                x + 0.5 * h, r + 0.5 * h * k1r, phi + 0.5 * h * k1p,
                k, mp, power, form, mu2_rate, zero_coupling,
            )
            k3r, k3p = _rhs_x(
                x + 0.5 * h, r + 0.5 * h * k2r, phi + 0.5 * h * k2p,
                k, mp, power, form, mu2_rate, zero_coupling,
            )
            k4r, k4p = _rhs_x(
                x + h, r + h * k3r, phi + h * k3p,
                k, mp, power, form, mu2_rate, zero_coupling,
            )
            r = r + h * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) / 6.0
            phi = phi + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
            x += h
            n_steps += 1
            if r < 0.0:
                r = 0.0
                clamped = True
            if r > r_cap:
                capped = True
        x = x1  # land exactly
        out_r[i + 1] = r
        out_phi[i + 1] = phi

    return out_r, out_phi, n_steps, capped, clamped
