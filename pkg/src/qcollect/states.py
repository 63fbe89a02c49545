"""Two-qubit density matrices and the small dense linear algebra behind them.

Basis ordering is fixed as {HH, HV, VH, VV}; qubit A (the locally projected
photon) is the first tensor factor.  All matrices are plain complex numpy
arrays; working sizes never exceed 4x4, so everything is dense.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchDegenerateError, StateValidationError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
DEGENERATE_WEIGHT = 1e-12

KET_H = np.array([1.0, 0.0], dtype=complex)
KET_V = np.array([0.0, 1.0], dtype=complex)
KET_D = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
KET_A = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)

#: (|HV> - |VH>)/sqrt(2) in the {HH, HV, VH, VV} basis.
SINGLET_KET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)
SINGLET_PROJECTOR = np.outer(SINGLET_KET, SINGLET_KET.conj())

IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_4 = np.eye(4, dtype=complex)


def kron(a, b):
    """Kronecker product of two matrices (dims multiply)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(m):
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def ket_to_dm(ket):
    """Projector |k><k| of a (not necessarily normalized) ket."""
    k = np.asarray(ket, dtype=complex)
    k = k / np.linalg.norm(k)
    return np.outer(k, k.conj())


def bell_state():
    """Singlet |Psi1> = (|HV> - |VH>)/sqrt(2) as a density matrix."""
    return ket_to_dm(SINGLET_KET)


def separable_state():
    """Product state |Psi2> = |HH> as a density matrix."""
    return ket_to_dm(np.array([1.0, 0.0, 0.0, 0.0], dtype=complex))


def maximally_mixed_state():
    """Maximally mixed two-qubit state I/4."""
    return IDENTITY_4 / 4.0


def validate_two_qubit_state(rho):
    """Check the density-matrix invariants and return a clean complex copy.

    Raises StateValidationError naming the violated invariant: shape,
    hermitian (1e-12), unit-trace (1e-12) or positive-semidefinite (1e-10).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise StateValidationError("shape", f"expected a 4x4 matrix, got {rho.shape}")
    herm = np.max(np.abs(rho - dagger(rho)))
    if herm > HERMITIAN_ATOL:
        raise StateValidationError(
            "hermitian", f"max |rho - rho^dagger| = {herm:.3e} exceeds {HERMITIAN_ATOL}"
        )
    tr = rho.trace()
    if abs(tr - 1.0) > TRACE_ATOL:
        raise StateValidationError(
            "unit-trace", f"|tr(rho) - 1| = {abs(tr - 1.0):.3e} exceeds {TRACE_ATOL}"
        )
    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < -PSD_ATOL:
        raise StateValidationError(
            "positive-semidefinite",
            f"min eigenvalue {min_eig:.3e} below -{PSD_ATOL}",
        )
    return rho


def purity(state):
    """tr(rho^2); 1 for pure states, 1/d for the maximally mixed state."""
    m = np.asarray(state, dtype=complex)
    return float(np.real(np.trace(m @ m)))


@dataclass(frozen=True)
class ProjectionSetting:
    """Projection basis |a+> = cos(t/2)|H> + e^{i phi} sin(t/2)|V> and its
    orthogonal partner |a-> = cos(t/2)|V> - e^{-i phi} sin(t/2)|H>."""

    theta: float
    phi: float = 0.0

    def a_plus(self):
        c, s = math.cos(self.theta / 2.0), math.sin(self.theta / 2.0)
        return np.array([c, np.exp(1j * self.phi) * s], dtype=complex)

    def a_minus(self):
        c, s = math.cos(self.theta / 2.0), math.sin(self.theta / 2.0)
        return np.array([-np.exp(-1j * self.phi) * s, c], dtype=complex)


@dataclass(frozen=True)
class ConditionalState:
    """Unnormalized conditional operator chi of qubit B with weight p = tr(chi).

    The normalized state chi/p is available as .sigma and is undefined when
    the branch is degenerate (p below 1e-12).
    """

    chi: np.ndarray
    weight: float
    degenerate: bool

    @property
    def sigma(self):
        if self.degenerate:
            raise BranchDegenerateError(
                f"branch weight {self.weight:.3e} too small to normalize"
            )
        return self.chi / self.weight


def project_qubit_a(rho, ket):
    """Project qubit A of rho onto |ket| and return (chi, weight).

    chi = tr_A[rho (|k><k| (x) 1)] as a 2x2 operator on qubit B,
    weight = tr(chi) = success probability of the projection.
    """
    k = np.asarray(ket, dtype=complex)
    r4 = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    chi = np.einsum("i,ibjc,j->bc", k.conj(), r4, k)
    chi = (chi + dagger(chi)) / 2.0
    return chi, float(np.real(np.trace(chi)))


def conditional_state(rho, setting, branch):
    """Conditional state of qubit B after projecting qubit A on |a+/-->.

    branch is "+" or "-".  Returns the unnormalized chi together with its
    weight; the degenerate flag is set when the weight is below 1e-12.
    """
    if branch == "+":
        ket = setting.a_plus()
    elif branch == "-":
        ket = setting.a_minus()
    else:
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    chi, weight = project_qubit_a(rho, ket)
    return ConditionalState(chi=chi, weight=weight, degenerate=weight < DEGENERATE_WEIGHT)


def singlet_overlap(a, b):
    """tr[P^-(a (x) b)] for normalized single-qubit states a, b.

    This is half the anticoalescence rate of the pair on a balanced beam
    splitter.  Computed both directly and through the swap identity
    (1 - tr(ab))/2; the two routes must agree to 1e-12.  For hermitian
    inputs tr(ab) = Re<b, a>, whose elementwise products commute exactly,
    so the returned value is bit-for-bit symmetric in (a, b).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    direct = float(np.real(np.trace(SINGLET_PROJECTOR @ np.kron(a, b))))
    via_swap = (1.0 - float(np.vdot(a, b).real)) / 2.0
    assert abs(direct - via_swap) < 1e-12, "singlet projector routes disagree"
    return via_swap


def singlet_overlap_unnormalized(a, b):
    """tr[P^-(a (x) b)] = (tr(a)tr(b) - tr(ab))/2 for unnormalized operators."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.real(np.trace(a) * np.trace(b) - np.trace(a @ b))) / 2.0


def haar_random_pure_state(rng):
    """Density matrix of a Haar-random pure two-qubit state."""
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    z /= np.linalg.norm(z)
    return np.outer(z, z.conj())


def random_density_matrix(rng):
    """Random full-rank density matrix from the Ginibre ensemble."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = g @ dagger(g)
    return m / np.real(np.trace(m))


def save_density_matrix(path, rho):
    """Write rho to a JSON document {"rho": 4x4 array of [re, im] pairs}."""
    rho = np.asarray(rho, dtype=complex)
    payload = {
        "rho": [[[float(z.real), float(z.imag)] for z in row] for row in rho]
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_density_matrix(path):
    """Read and validate a density matrix from the JSON document format.

    The file must contain an object with key "rho" holding a 4-element array
    of 4-element arrays of [re, im] pairs, basis order {HH, HV, VH, VV}.
    """
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StateValidationError("format", f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "rho" not in payload:
        raise StateValidationError("format", 'missing top-level "rho" key')
    raw = payload["rho"]
    try:
        arr = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in raw],
            dtype=complex,
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise StateValidationError(
            "format", f'"rho" entries must be [re, im] number pairs: {exc}'
        ) from exc
    return validate_two_qubit_state(arr)
