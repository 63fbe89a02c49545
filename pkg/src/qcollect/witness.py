"""Analytic collectibility and the collective entanglement witness.

The collectibility Y(rho, theta, phi) is built from Gramm matrix elements of
the conditional states of qubit B after projecting qubit A on |a+/->.  Its
maximum over theta (phi = 0) exceeds 1/16 exactly for entangled pure states.
The witness W(rho) works for mixed states as well: W < 0 certifies
entanglement.  An independent negativity computed from the partial transpose
serves as the cross-validation oracle.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import RadicandNegativeError
from .states import (
    ProjectionSetting,
    bell_state,
    conditional_state,
    maximally_mixed_state,
    singlet_overlap_unnormalized,
)

#: Pure-state detection threshold for the maximal collectibility.
Y_PURE_THRESHOLD = 1.0 / 16.0

#: Below this the Gramm radicand signals corruption rather than float noise.
RADICAND_FAIL = 1e-10


@dataclass(frozen=True)
class GrammElements:
    """Gramm matrix elements of the two conditional states at one setting.

    g_plus/g_minus equal sqrt(tr chi^2) of the unnormalized conditionals,
    which coincides with p sqrt(tr sigma^2) whenever the branch weight is
    nonzero; g is the cross element sqrt(tr(chi+ chi-)).
    """

    p_plus: float
    p_minus: float
    g_plus: float
    g_minus: float
    g: float


@dataclass(frozen=True)
class CollectibilityValue:
    y: float
    theta_star: float


@dataclass(frozen=True)
class WitnessValue:
    """W(rho) with the quantities it is assembled from.

    z_plus/z_minus are doubled singlet overlaps of the H/V conditionals with
    themselves, x_plus/x_minus the same at the diagonal-basis setting; a
    degenerate branch reports 0.0 and contributes nothing.
    """

    w: float
    eta: float
    z_plus: float
    z_minus: float
    x_plus: float
    x_minus: float
    gramm: GrammElements


def _branches(rho, setting):
    plus = conditional_state(rho, setting, "+")
    minus = conditional_state(rho, setting, "-")
    return plus, minus


def gramm_elements(rho, setting):
    """Gramm elements (p+/-, G+/-, G) of rho at the given projection setting."""
    plus, minus = _branches(rho, setting)
    g_plus_sq = float(np.real(np.trace(plus.chi @ plus.chi)))
    g_minus_sq = float(np.real(np.trace(minus.chi @ minus.chi)))
    g_sq = float(np.real(np.trace(plus.chi @ minus.chi)))
    return GrammElements(
        p_plus=plus.weight,
        p_minus=minus.weight,
        g_plus=math.sqrt(max(g_plus_sq, 0.0)),
        g_minus=math.sqrt(max(g_minus_sq, 0.0)),
        g=math.sqrt(max(g_sq, 0.0)),
    )


def collectibility_from_gramm(gramm):
    """Y = 1/4 (sqrt(G+G-) + sqrt(G+G- - G^2))^2 with the radicand clamp."""
    outer = gramm.g_plus * gramm.g_minus
    radicand = outer - gramm.g**2
    if radicand < -RADICAND_FAIL:
        raise RadicandNegativeError(
            f"G+G- - G^2 = {radicand:.3e}; Gramm elements violate Cauchy-Schwarz"
        )
    radicand = max(radicand, 0.0)
    return 0.25 * (math.sqrt(outer) + math.sqrt(radicand)) ** 2


def collectibility(rho, setting):
    """Collectibility Y(rho, theta, phi) at a single projection setting."""
    return collectibility_from_gramm(gramm_elements(rho, setting))


def collectibility_profile(rho, thetas, phi=0.0):
    """Vectorized Y over an array of theta values at fixed phi."""
    thetas = np.asarray(thetas, dtype=float)
    c = np.cos(thetas / 2.0)
    s = np.sin(thetas / 2.0)
    phase = np.exp(1j * phi)
    a_plus = np.stack([c + 0j, phase * s], axis=1)
    a_minus = np.stack([-np.conj(phase) * s, c + 0j], axis=1)
    r4 = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    chi_p = np.einsum("ti,ibjc,tj->tbc", a_plus.conj(), r4, a_plus)
    chi_m = np.einsum("ti,ibjc,tj->tbc", a_minus.conj(), r4, a_minus)
    gp_sq = np.real(np.einsum("tbc,tcb->t", chi_p, chi_p))
    gm_sq = np.real(np.einsum("tbc,tcb->t", chi_m, chi_m))
    g_sq = np.real(np.einsum("tbc,tcb->t", chi_p, chi_m))
    outer = np.sqrt(np.clip(gp_sq, 0.0, None) * np.clip(gm_sq, 0.0, None))
    radicand = np.clip(outer**2 - g_sq, 0.0, None)
    return 0.25 * (np.sqrt(outer) + np.sqrt(radicand)) ** 2


def _golden_section_maximize(f, lo, hi, tol):
    """Golden-section search for the maximum of f on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def max_collectibility(rho, grid_points=181, tol=1e-6, phi=0.0):
    """Maximal collectibility over theta in [0, pi] at fixed phi.

    Dense scan over grid_points settings followed by golden-section
    refinement of the best bracket to |d theta| < tol.
    """
    thetas = np.linspace(0.0, math.pi, grid_points)
    ys = collectibility_profile(rho, thetas, phi=phi)
    k = int(np.argmax(ys))
    lo = thetas[max(k - 1, 0)]
    hi = thetas[min(k + 1, grid_points - 1)]

    def f(theta):
        return collectibility(rho, ProjectionSetting(theta=theta, phi=phi))

    theta_star, y_star = _golden_section_maximize(f, lo, hi, tol)
    if ys[k] > y_star:
        theta_star, y_star = float(thetas[k]), float(ys[k])
    return CollectibilityValue(y=float(y_star), theta_star=float(theta_star))


def _doubled_self_overlap(cond):
    """2 tr[P^-(sigma (x) sigma)] of one conditional branch; 0.0 if degenerate."""
    if cond.degenerate:
        return 0.0
    sigma = cond.sigma
    return 2.0 * singlet_overlap_unnormalized(sigma, sigma)


def witness_W(rho):
    """Collective entanglement witness W(rho) = (eta + G+^2 + G-^2 + 2G^2 - 1)/2.

    Gramm elements are taken in the fixed H/V frame (theta = 0), and
    eta = 8 p+ p- sqrt(z+ z-) + 2 max(x+, x-) with z at theta = 0 and x at
    theta = pi/2 (phi = 0).  The product p+ p- sqrt(z+ z-) is evaluated from
    the unnormalized conditionals so degenerate branches contribute zero.
    """
    hv = ProjectionSetting(theta=0.0)
    diag = ProjectionSetting(theta=math.pi / 2.0)

    plus_hv, minus_hv = _branches(rho, hv)
    gramm = gramm_elements(rho, hv)

    z_plus = _doubled_self_overlap(plus_hv)
    z_minus = _doubled_self_overlap(minus_hv)
    # (p+- tr chi^2 terms) 2 tr[P^-(chi (x) chi)] = p^2 z, finite at p = 0.
    pz_plus = 2.0 * singlet_overlap_unnormalized(plus_hv.chi, plus_hv.chi)
    pz_minus = 2.0 * singlet_overlap_unnormalized(minus_hv.chi, minus_hv.chi)
    product_term = math.sqrt(max(pz_plus, 0.0) * max(pz_minus, 0.0))

    plus_diag, minus_diag = _branches(rho, diag)
    x_plus = _doubled_self_overlap(plus_diag)
    x_minus = _doubled_self_overlap(minus_diag)
    x_candidates = [
        x for x, cond in ((x_plus, plus_diag), (x_minus, minus_diag))
        if not cond.degenerate
    ]
    x_max = max(x_candidates) if x_candidates else 0.0

    eta = 8.0 * product_term + 2.0 * x_max
    w = (eta + gramm.g_plus**2 + gramm.g_minus**2 + 2.0 * gramm.g**2 - 1.0) / 2.0
    return WitnessValue(
        w=w,
        eta=eta,
        z_plus=z_plus,
        z_minus=z_minus,
        x_plus=x_plus,
        x_minus=x_minus,
        gramm=gramm,
    )


def werner_state(p):
    """Werner state p |Psi1><Psi1| + (1 - p) I/4."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter must be in [0, 1], got {p}")
    return p * bell_state() + (1.0 - p) * maximally_mixed_state()


def partial_transpose_b(rho):
    """Partial transpose over qubit B in the {HH, HV, VH, VV} basis."""
    r4 = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("abcd->adcb", r4).reshape(4, 4)


def negativity(rho):
    """Doubled absolute sum of negative partial-transpose eigenvalues.

    Normalized so the Bell state gives 1; positive exactly for entangled
    two-qubit states (Peres-Horodecki).
    """
    eigs = np.linalg.eigvalsh(partial_transpose_b(rho))
    return float(-2.0 * eigs[eigs < 0.0].sum())


def werner_witness_closed_form(p):
    """Closed-form witness value 3/4 - p^2 on the Werner family.

    Validated against the direct matrix computation in the test suite and
    used as the oracle for grid and threshold checks.
    """
    return 0.75 - p * p
