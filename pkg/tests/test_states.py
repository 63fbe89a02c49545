"""Tests for the state model: projections, conditionals, overlaps, file I/O.

Expected values tagged as derived were computed with the independent oracles
defined here (explicit partial trace, swap-operator route) before being
frozen into assertions.
"""

import math

import numpy as np
import pytest

from qcollect.errors import BranchDegenerateError, StateValidationError
from qcollect.states import (
    KET_D,
    KET_H,
    KET_V,
    SINGLET_PROJECTOR,
    ProjectionSetting,
    bell_state,
    conditional_state,
    dagger,
    haar_random_pure_state,
    ket_to_dm,
    kron,
    load_density_matrix,
    maximally_mixed_state,
    purity,
    random_density_matrix,
    save_density_matrix,
    separable_state,
    singlet_overlap,
    validate_two_qubit_state,
)

RNG_SEED = 20240811


def random_qubit_dm(rng):
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    m = g @ dagger(g)
    return m / np.trace(m).real


def partial_trace_oracle(rho, ket):
    """tr_A[rho (|k><k| (x) 1)] via the full 4x4 product and an explicit
    index-sum partial trace; independent of the production einsum route."""
    proj = np.outer(ket, ket.conj())
    m = (rho @ np.kron(proj, np.eye(2))).reshape(2, 2, 2, 2)
    return np.einsum("abad->bd", m)


class TestKron:
    def test_identity(self):
        assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_bookkeeping(self):
        hh = ket_to_dm(KET_H)
        vv = ket_to_dm(KET_V)
        assert np.allclose(kron(hh, vv), np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_trace_multiplicativity(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(50):
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            a = a + dagger(a)
            b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            b = b + dagger(b)
            assert np.trace(kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b))


class TestProjectionSetting:
    def test_theta_zero_is_hv(self):
        s = ProjectionSetting(theta=0.0)
        assert np.allclose(s.a_plus(), KET_H)
        assert np.allclose(s.a_minus(), KET_V)

    def test_branches_orthonormal(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(200):
            s = ProjectionSetting(
                theta=rng.uniform(0.0, math.pi), phi=rng.uniform(0.0, 2.0 * math.pi)
            )
            ap, am = s.a_plus(), s.a_minus()
            assert abs(np.vdot(ap, am)) < 1e-12
            assert np.vdot(ap, ap).real == pytest.approx(1.0, abs=1e-12)
            assert np.vdot(am, am).real == pytest.approx(1.0, abs=1e-12)


class TestConditionalState:
    def test_product_state_degenerate_branch(self):
        rho = separable_state()
        setting = ProjectionSetting(theta=0.0)
        plus = conditional_state(rho, setting, "+")
        assert plus.weight == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(plus.sigma, ket_to_dm(KET_H), atol=1e-12)
        minus = conditional_state(rho, setting, "-")
        assert minus.weight == pytest.approx(0.0, abs=1e-12)
        assert minus.degenerate
        with pytest.raises(BranchDegenerateError):
            _ = minus.sigma
        assert np.allclose(minus.chi, np.zeros((2, 2)), atol=1e-12)

    def test_bell_state_plus_branch(self):
        rho = bell_state()
        plus = conditional_state(rho, ProjectionSetting(theta=0.0), "+")
        assert plus.weight == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(plus.sigma, ket_to_dm(KET_V), atol=1e-12)

    def test_maximally_mixed_any_setting(self):
        rho = maximally_mixed_state()
        for theta, phi in [(0.0, 0.0), (1.1, 0.7), (math.pi / 2, 0.0)]:
            for branch in "+-":
                cond = conditional_state(rho, ProjectionSetting(theta, phi), branch)
                assert cond.weight == pytest.approx(0.5, abs=1e-12)
                assert np.allclose(cond.sigma, np.eye(2) / 2.0, atol=1e-12)

    def test_against_partial_trace_oracle(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(100):
            rho = random_density_matrix(rng)
            s = ProjectionSetting(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            plus = conditional_state(rho, s, "+")
            assert np.allclose(plus.chi, partial_trace_oracle(rho, s.a_plus()), atol=1e-12)

    def test_completeness(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(200):
            rho = random_density_matrix(rng)
            s = ProjectionSetting(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            p_plus = conditional_state(rho, s, "+").weight
            p_minus = conditional_state(rho, s, "-").weight
            assert p_plus + p_minus == pytest.approx(1.0, abs=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(50):
            rho1 = random_density_matrix(rng)
            rho2 = random_density_matrix(rng)
            alpha = rng.uniform()
            s = ProjectionSetting(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            mixed = conditional_state(alpha * rho1 + (1 - alpha) * rho2, s, "+").chi
            parts = (
                alpha * conditional_state(rho1, s, "+").chi
                + (1 - alpha) * conditional_state(rho2, s, "+").chi
            )
            assert np.allclose(mixed, parts, atol=1e-12)

    def test_bad_branch(self):
        with pytest.raises(ValueError):
            conditional_state(bell_state(), ProjectionSetting(0.0), "x")


class TestPurity:
    def test_reference_values(self):
        assert purity(bell_state()) == pytest.approx(1.0, abs=1e-12)
        assert purity(maximally_mixed_state()) == pytest.approx(0.25, abs=1e-12)
        assert purity(np.eye(2) / 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_range(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(100):
            p = purity(random_density_matrix(rng))
            assert 0.25 - 1e-12 <= p <= 1.0 + 1e-12


class TestSingletOverlap:
    def test_identical_pure_states(self):
        h = ket_to_dm(KET_H)
        assert singlet_overlap(h, h) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        # |<HV|Psi->|^2 = 1/2 by direct expansion.
        assert singlet_overlap(ket_to_dm(KET_H), ket_to_dm(KET_V)) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_maximally_mixed_pair(self):
        eye2 = np.eye(2) / 2.0
        assert singlet_overlap(eye2, eye2) == pytest.approx(0.25, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(100):
            a, b = random_qubit_dm(rng), random_qubit_dm(rng)
            assert singlet_overlap(a, b) == singlet_overlap(b, a)

    def test_swap_identity_ensemble(self):
        # tr(si sj) = tr[S (si (x) sj)] for 10^4 random qubit pairs; the swap
        # route S = 1 - 2 P^- is evaluated explicitly here.
        rng = np.random.default_rng(RNG_SEED)
        swap_op = np.eye(4, dtype=complex) - 2.0 * SINGLET_PROJECTOR
        worst = 0.0
        for _ in range(10_000):
            a, b = random_qubit_dm(rng), random_qubit_dm(rng)
            direct = np.trace(a @ b).real
            via_swap = np.trace(swap_op @ np.kron(a, b)).real
            worst = max(worst, abs(direct - via_swap))
            assert singlet_overlap(a, b) == pytest.approx((1.0 - direct) / 2.0, abs=1e-12)
        assert worst < 1e-10


class TestValidation:
    def test_accepts_presets_and_random(self):
        rng = np.random.default_rng(RNG_SEED)
        for rho in (bell_state(), separable_state(), maximally_mixed_state(),
                    random_density_matrix(rng), haar_random_pure_state(rng)):
            validate_two_qubit_state(rho)

    def test_shape(self):
        with pytest.raises(StateValidationError) as exc:
            validate_two_qubit_state(np.eye(2))
        assert exc.value.invariant == "shape"

    def test_hermitian(self):
        rho = maximally_mixed_state().copy()
        rho[0, 1] = 0.1
        with pytest.raises(StateValidationError) as exc:
            validate_two_qubit_state(rho)
        assert exc.value.invariant == "hermitian"

    def test_unit_trace(self):
        with pytest.raises(StateValidationError) as exc:
            validate_two_qubit_state(np.eye(4, dtype=complex))
        assert exc.value.invariant == "unit-trace"

    def test_positive_semidefinite(self):
        rho = np.diag([0.6, 0.5, -0.1, 0.0]).astype(complex)
        with pytest.raises(StateValidationError) as exc:
            validate_two_qubit_state(rho)
        assert exc.value.invariant == "positive-semidefinite"


class TestDensityMatrixFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(RNG_SEED)
        rho = random_density_matrix(rng)
        path = tmp_path / "state.json"
        save_density_matrix(path, rho)
        loaded = load_density_matrix(path)
        assert np.allclose(loaded, rho, atol=0.0)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"sigma": []}')
        with pytest.raises(StateValidationError) as exc:
            load_density_matrix(path)
        assert exc.value.invariant == "format"

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json")
        with pytest.raises(StateValidationError) as exc:
            load_density_matrix(path)
        assert exc.value.invariant == "format"

    def test_invariant_diagnostic_on_load(self, tmp_path):
        path = tmp_path / "nonherm.json"
        rows = [[[0.25, 0.0]] * 4 for _ in range(4)]
        rows[0][1] = [0.9, 0.0]
        import json

        path.write_text(json.dumps({"rho": rows}))
        with pytest.raises(StateValidationError) as exc:
            load_density_matrix(path)
        assert exc.value.invariant == "hermitian"

    def test_bad_entries(self, tmp_path):
        path = tmp_path / "entries.json"
        path.write_text('{"rho": [[1, 2], [3, 4]]}')
        with pytest.raises(StateValidationError) as exc:
            load_density_matrix(path)
        assert exc.value.invariant == "format"


def test_diagonal_ket_constant():
    assert np.allclose(KET_D, ProjectionSetting(theta=math.pi / 2).a_plus())
