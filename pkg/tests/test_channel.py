"""Channel construction tests: Bell states, circuit vs analytic equivalence,
marginals, measurement support, and relabeling."""
import numpy as np
import pytest

from quadtel import channel as ch
from quadtel import statevector as sv

RT2 = np.sqrt(2.0)


def test_bell_state_amplitude_tables():
    assert np.allclose(ch.bell_state(ch.BellKind.KAPPA_PLUS).amps, [1 / RT2, 0, 0, 1 / RT2])
    assert np.allclose(ch.bell_state(ch.BellKind.KAPPA_MINUS).amps, [1 / RT2, 0, 0, -1 / RT2])
    assert np.allclose(ch.bell_state(ch.BellKind.LAMBDA_PLUS).amps, [0, 1 / RT2, 1 / RT2, 0])
    assert np.allclose(ch.bell_state(ch.BellKind.LAMBDA_MINUS).amps, [0, 1 / RT2, -1 / RT2, 0])


def test_bell_states_are_orthonormal():
    for a in range(4):
        for b in range(4):
            got = sv.overlap(ch.bell_state(a), ch.bell_state(b))
            assert abs(got - (1 if a == b else 0)) < 1e-12


def test_ghz_checkpoint_two_amplitudes():
    s = ch.ghz_state(17, allow_large=True)
    nz = np.flatnonzero(np.abs(s.amps) > 1e-14)
    assert list(nz) == [0, 2**17 - 1]
    assert np.allclose(s.amps[nz], 1 / RT2)


def test_single_pair_circuit_carries_minus_sign():
    """Hand-assembled expectation for k=1: (kappa+ |0>_E - lambda- |1>_E)/sqrt2.

    The oracle builds the 3-qubit amplitudes with plain numpy krons, placing
    the sender-side member of the pair at qubit 0, independent of the channel
    module's own assembly code.
    """
    kappa = np.zeros(4, dtype=complex)
    kappa[0b00] = kappa[0b11] = 1 / RT2  # index = sender + 2*receiver
    lam = np.zeros(4, dtype=complex)
    lam[0b10] = 1 / RT2  # sender 0, receiver 1
    lam[0b01] = -1 / RT2  # sender 1, receiver 0
    e0 = np.array([1, 0], dtype=complex)
    e1 = np.array([0, 1], dtype=complex)
    expected = (np.kron(e0, kappa) - np.kron(e1, lam)) / RT2
    got = ch.prepare_channel_circuit(1)
    assert np.linalg.norm(got.amps - expected) < 1e-12
    assert sv.distance(got, ch.build_channel_analytic(1, -1)) < 1e-12


def test_two_pair_circuit_signs_cancel():
    got = ch.prepare_channel_circuit(2)
    assert sv.distance(got, ch.build_channel_analytic(2, +1)) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_circuit_matches_analytic_with_alternating_sign(k):
    got = ch.prepare_channel_circuit(k)
    want = ch.build_channel_analytic(k, (-1) ** k)
    assert sv.distance(got, want) < 1e-12
    wrong = ch.build_channel_analytic(k, -((-1) ** k))
    assert sv.distance(got, wrong) > 0.5


def test_full_channel_circuit_matches_analytic():
    got = ch.prepare_channel_circuit(8, allow_large=True)
    want = ch.build_channel_analytic(8, +1, allow_large=True)
    assert sv.distance(got, want) < 1e-12


def test_channel_norm_and_size_cap():
    assert abs(ch.prepare_channel_circuit(3).norm() - 1) < 1e-12
    with pytest.raises(ValueError):
        ch.prepare_channel_circuit(8)  # 17 qubits needs the opt-in
    with pytest.raises(ValueError):
        ch.build_channel_analytic(8)
    with pytest.raises(ValueError):
        ch.build_channel_analytic(2, branch_sign=2)


def test_pair_marginals_are_half_half_bell_mixture():
    state = ch.prepare_channel_circuit(8, allow_large=True)
    kp = ch.bell_state(ch.BellKind.KAPPA_PLUS).amps
    lm = ch.bell_state(ch.BellKind.LAMBDA_MINUS).amps
    mix = 0.5 * np.outer(kp, kp.conj()) + 0.5 * np.outer(lm, lm.conj())
    layout = ch.ChannelLayout(8)
    for j in range(8):
        snd, rcv = layout.pair_qubits(j)
        dm = sv.partial_trace(state, [rcv, snd])  # index = 2*sender_bit + receiver_bit
        assert np.abs(dm.mat - mix).max() < 1e-12


def test_bsm_support_on_channel_pairs():
    state = ch.prepare_channel_circuit(8, allow_large=True)
    layout = ch.ChannelLayout(8)
    for j in range(8):
        snd, rcv = layout.pair_qubits(j)
        probs = sv.bsm_probabilities(state, snd, rcv)
        assert np.allclose(probs, [0.5, 0, 0, 0.5], atol=1e-12)


def test_relabel_identity_layout_is_noop():
    state = ch.prepare_channel_circuit(2)
    out = ch.relabel(state, ch.ChannelLayout(2))
    assert sv.distance(out, state) == 0


def test_relabel_roundtrip_through_swapped_layout():
    state = ch.prepare_channel_circuit(2)
    swapped_map = ch.ChannelLayout(2).label_map.copy()
    swapped_map[1], swapped_map[2] = swapped_map[2], swapped_map[1]
    layout = ch.ChannelLayout(2, label_map=swapped_map)
    once = ch.relabel(state, layout)
    assert sv.distance(once, state) > 0.1
    twice = sv.permute_qubits(once, [1, 0, 2, 3, 4])
    assert sv.distance(twice, state) < 1e-15


def test_relabeled_channel_still_supports_pair_bsm():
    # move pair 1 in front of pair 0 and check the measurement support follows
    m = {1: 2, 2: 3, 3: 0, 4: 1, 5: 4, "E": 4}
    layout = ch.ChannelLayout(2, label_map=m)
    state = ch.relabel(ch.prepare_channel_circuit(2), layout)
    for j in range(2):
        snd, rcv = layout.pair_qubits(j)
        probs = sv.bsm_probabilities(state, snd, rcv)
        assert np.allclose(probs, [0.5, 0, 0, 0.5], atol=1e-12)


def test_layout_validation():
    with pytest.raises(ValueError):
        ch.ChannelLayout(2, label_map={1: 0, 2: 0, 3: 1, 4: 2, 5: 3, "E": 4})
    layout = ch.ChannelLayout(8)
    assert layout.label_map["A"] == 0 and layout.label_map["P"] == 1
    assert layout.label_map["D'"] == 14 and layout.label_map["W"] == 15
    assert layout.controller == 16
    with pytest.raises(IndexError):
        layout.pair_qubits(8)
