import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiral_teleport.molecule import MoleculeAmplitudes
from chiral_teleport.optics import OpticalParams
from chiral_teleport.perfect import PHOTON2_MAPS
from chiral_teleport.statedep import (
    BRANCH_LABELS,
    SingularTransformError,
    amplitude_fidelity,
    analysis_report,
    bloch_vector,
    dense_bottom_arm,
    dense_branches,
    determinants,
    outcome_probabilities,
    pair_bit_analysis,
    photon2_ratio,
    reconstruct_amplitudes,
    teleportee_matrices,
    teleportee_states,
)
from chiral_teleport.statevec import Kind, fidelity_up_to_global_phase, ket, to_vector

from .conftest import random_m

C = 1 / (2 * math.sqrt(2))


def test_first_matrix_opposite_sign_convention():
    # the other common convention is this module's matrix at -phi
    phi = 0.37
    e = cmath.exp(1j * phi)
    other = (1 / (2j * math.sqrt(2))) * np.array([[1 / e, -e], [e, -1 / e]])
    np.testing.assert_allclose(teleportee_matrices(-phi)[0], other, atol=1e-15)


def test_opposite_convention_combinations(rng):
    m = random_m(rng)
    phi = 0.81
    k = {j: PHOTON2_MAPS[j] @ m.vector for j in (1, 2, 3, 4)}
    e = cmath.exp(-1j * phi)  # opposite-sign convention
    expected = [
        1j * C * (k[2] / e - e * k[4]),
        1j * C * (k[1] / e - e * k[3]),
        C * (k[1] / e + e * k[3]),
        C * (k[2] / e + e * k[4]),
    ]
    for s, v in zip(teleportee_states(m, phi).states, expected):
        np.testing.assert_allclose(to_vector(s), v, atol=1e-15)


def test_phi_zero_third_state_is_y(rng):
    for _ in range(5):
        m = random_m(rng)
        s = teleportee_states(m, 0.0).states[2]
        np.testing.assert_allclose(to_vector(s), (m.b - m.a) * C * np.array([1, -1]), atol=1e-15)
        assert fidelity_up_to_global_phase(s.normalized(), ket(photon2_pol="y")) == pytest.approx(1, abs=1e-12)


def test_branch_labels():
    assert BRANCH_LABELS == (("-", "y"), ("+", "y"), ("-", "x"), ("+", "x"))


def test_probability_examples(rng):
    assert outcome_probabilities(MoleculeAmplitudes(1, 0), 0.3).probabilities == pytest.approx([0.25] * 4, abs=1e-15)
    assert outcome_probabilities(random_m(rng), math.pi / 4).probabilities == pytest.approx([0.25] * 4, abs=1e-15)
    p = outcome_probabilities(MoleculeAmplitudes(1, 1), 0.0).probabilities
    assert p == pytest.approx([0, 0.5, 0, 0.5], abs=1e-15)
    dense = [b.norm() ** 2 for b in dense_branches(MoleculeAmplitudes(1, 1), OpticalParams(phi=0.0))]
    assert dense == pytest.approx([0, 0.5, 0, 0.5], abs=1e-15)


def test_zero_branch_has_no_post_state():
    dist = outcome_probabilities(MoleculeAmplitudes(1, 1), 0.0)
    assert dist.post_states[0] is None and dist.post_states[1] is not None


@pytest.mark.parametrize("variant", ["natural", "e-field", "faraday"])
def test_closed_form_matches_dense(rng, variant):
    for _ in range(50):
        m = random_m(rng)
        phi = rng.uniform(-math.pi, math.pi)
        params = OpticalParams(phi=phi, variant=variant)
        closed = teleportee_states(m, phi).states
        dense = dense_branches(m, params)
        probs = outcome_probabilities(m, phi).probabilities
        for c, d, p in zip(closed, dense, probs):
            np.testing.assert_allclose(to_vector(d), to_vector(c), atol=1e-12)
            assert d.norm() ** 2 == pytest.approx(p, abs=1e-12)


def test_dense_bottom_arm_expansion(rng):
    m = random_m(rng)
    s = dense_bottom_arm(m, OpticalParams(phi=0.4))
    assert s.kinds == (Kind.MOLECULE, Kind.PHOTON1_POL, Kind.PHOTON2_POL)
    assert s.basis_for(Kind.MOLECULE) == "parity"
    assert s.basis_for(Kind.PHOTON1_POL) == "linear"
    assert s.norm() == pytest.approx(1, abs=1e-12)


def test_kz_is_global_phase(rng):
    m = random_m(rng)
    ref = [b.norm() ** 2 for b in dense_branches(m, OpticalParams(phi=0.4))]
    for kz in (0.5, 1.7, 4.0):
        probs = [b.norm() ** 2 for b in dense_branches(m, OpticalParams(phi=0.4, kz=kz))]
        assert probs == pytest.approx(ref, abs=1e-12)


def test_probabilities_sum_and_pairs(rng):
    for _ in range(100):
        p = outcome_probabilities(random_m(rng), rng.uniform(0, 2 * math.pi)).probabilities
        assert sum(p) == pytest.approx(1, abs=1e-12)
        assert p[0] == pytest.approx(p[2], abs=1e-12)
        assert p[1] == pytest.approx(p[3], abs=1e-12)


def test_post_states_pure(rng):
    for _ in range(50):
        for s in outcome_probabilities(random_m(rng), rng.uniform(0.1, 1.4)).post_states:
            assert s.norm() == pytest.approx(1, abs=1e-12)
            assert np.linalg.norm(bloch_vector(s)) == pytest.approx(1, abs=1e-12)


def test_non_unitary_norm_depends_on_state():
    phi = 0.3
    m1, m2 = MoleculeAmplitudes(1, 1), MoleculeAmplitudes(1, -1)
    for M in teleportee_matrices(phi):
        assert abs(np.linalg.norm(M @ m1.vector) - np.linalg.norm(M @ m2.vector)) > 1e-3


def test_determinants():
    for phi in (0.2, 0.9, 2.0):
        for d in determinants(phi):
            assert abs(d) == pytest.approx(abs(math.sin(2 * phi)) / 4, abs=1e-15)
            assert abs(d.real) < 1e-15
    for phi in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
        assert max(abs(d) for d in determinants(phi)) < 1e-12


def test_reconstruct_pure_left():
    phi = 0.3
    ratio = photon2_ratio(teleportee_states(MoleculeAmplitudes(1, 0), phi).states[0])
    # with this module's phase convention the l/r ratio is exp(+2 i phi)
    assert ratio == pytest.approx(cmath.exp(2j * phi), abs=1e-12)
    rec = reconstruct_amplitudes(1, phi, ratio)
    assert amplitude_fidelity(rec, MoleculeAmplitudes(1, 0)) == pytest.approx(1, abs=1e-12)
    assert amplitude_fidelity(reconstruct_amplitudes("1'", -phi, cmath.exp(-2j * phi)), MoleculeAmplitudes(1, 0)) == pytest.approx(1)


def test_reconstruct_round_trip(rng):
    for _ in range(200):
        m = random_m(rng)
        phi = rng.uniform(0.05, 1.5)
        for k, s in enumerate(teleportee_states(m, phi).states, start=1):
            rec = reconstruct_amplitudes(k, phi, photon2_ratio(s))
            assert amplitude_fidelity(rec, m) >= 1 - 1e-9


def test_reconstruct_infinite_ratio():
    # choose (a, b) so that |1'> is pure |l2>
    phi = 0.5
    M = teleportee_matrices(phi)[0]
    ab = np.linalg.solve(M, [1, 0])
    m = MoleculeAmplitudes(ab[0], ab[1])
    s = teleportee_states(m, phi).states[0]
    assert math.isinf(photon2_ratio(s).real)
    assert amplitude_fidelity(reconstruct_amplitudes(1, phi, complex("inf")), m) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("phi", [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
def test_reconstruct_singular(phi):
    for k in (1, 2, 3, 4):
        with pytest.raises(SingularTransformError):
            reconstruct_amplitudes(k, phi, 1.0)


def test_reconstruct_bad_outcome():
    with pytest.raises(ValueError):
        reconstruct_amplitudes(5, 0.3, 1.0)
    with pytest.raises(ValueError):
        reconstruct_amplitudes("5'", 0.3, 1.0)


def test_pair_bit_pure_left():
    rep = pair_bit_analysis(MoleculeAmplitudes(1, 0), 0.3)
    assert abs(rep.ratios[0]) == pytest.approx(1, abs=1e-12)
    assert abs(rep.ratios[2]) == pytest.approx(1, abs=1e-12)


def test_pair_bit_relations(rng):
    for _ in range(200):
        m = random_m(rng)
        phi = rng.uniform(0.05, 1.5)
        rep = pair_bit_analysis(m, phi)
        assert rep.magnitudes_equal_in_pairs
        assert rep.within_pair_sign_flip
        assert min(rep.exact.values()) >= 1 - 1e-9
        assert min(rep.via_partner.values()) >= 1 - 1e-9


def test_pair_bit_alone_is_ambiguous():
    rep = pair_bit_analysis(MoleculeAmplitudes(0.6, 0.8j), 0.3)
    assert not rep.pair_bit_sufficient
    assert min(min(v) for v in rep.pair_only.values()) < 0.99


def test_analysis_report(rng):
    rep = analysis_report(random_m(rng), 0.3)
    assert len(rep["probabilities"]) == 4
    assert all(v["fidelity"] >= 1 - 1e-9 for v in rep["reconstruction"].values())
    with pytest.raises(SingularTransformError):
        analysis_report(random_m(rng), 0.0)
    assert "reconstruction" not in analysis_report(random_m(rng), 0.0, reconstruct=False)


@settings(max_examples=80, deadline=None)
@given(
    st.floats(0.01, 1.0),
    st.floats(-math.pi, math.pi),
    st.floats(-math.pi, math.pi),
    st.floats(-10, 10),
)
def test_probabilities_match_matrices(frac, ta, tb, phi):
    m = MoleculeAmplitudes.from_polar(math.sqrt(frac), ta, math.sqrt(1 - frac), tb)
    p = outcome_probabilities(m, phi).probabilities
    for M, pk in zip(teleportee_matrices(phi), p):
        assert np.linalg.norm(M @ m.vector) ** 2 == pytest.approx(pk, abs=1e-12)
