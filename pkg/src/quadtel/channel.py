"""Entangled-channel construction.

The channel for k sender/receiver pairs lives on 2k+1 qubits and is built
two independent ways:

* ``prepare_channel_circuit`` runs the gate sequence (all-zeros init, H on
  the controller, CNOT fan-out, H on each receiver-side qubit, CNOT within
  each pair);
* ``build_channel_analytic`` assembles the target superposition of Bell-pair
  products directly by tensor products, with an explicit branch sign.

The circuit output equals the analytic state with branch sign (-1)^k: each
pair contributes a singlet with a minus sign on the controller-|1> branch,
so the signs cancel for even pair counts (in particular k=8, the full
protocol channel).

Register layout: channel qubit positions follow the construction order, with
the sender-side qubit of pair j at index 2j, the receiver-side qubit at
2j+1, and the controller at index 2k (the highest qubit).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping

import numpy as np

from .statevector import (
    StateVector,
    apply_1q,
    apply_cnot,
    init_basis,
    pair_state,
    permute_qubits,
    tensor,
)

_SQRT2_INV = 1.0 / np.sqrt(2.0)


class BellKind(IntEnum):
    """The four Bell states, numbered as measurement outcomes 0..3."""

    KAPPA_PLUS = 0  # (|00> + |11>)/sqrt2
    KAPPA_MINUS = 1  # (|00> - |11>)/sqrt2
    LAMBDA_PLUS = 2  # (|01> + |10>)/sqrt2
    LAMBDA_MINUS = 3  # (|01> - |10>)/sqrt2


# Coefficients c[2a+b] of |a> on the first pair member, |b> on the second.
BELL_COEFFS: Mapping[BellKind, np.ndarray] = {
    BellKind.KAPPA_PLUS: np.array([1, 0, 0, 1], dtype=complex) * _SQRT2_INV,
    BellKind.KAPPA_MINUS: np.array([1, 0, 0, -1], dtype=complex) * _SQRT2_INV,
    BellKind.LAMBDA_PLUS: np.array([0, 1, 1, 0], dtype=complex) * _SQRT2_INV,
    BellKind.LAMBDA_MINUS: np.array([0, 1, -1, 0], dtype=complex) * _SQRT2_INV,
}

# Symbols used by the CLI forced-outcome syntax and JSON reports.
BELL_SYMBOLS = ("k+", "k-", "l+", "l-")


def bell_state(kind: BellKind | int) -> StateVector:
    """Two-qubit Bell state with the first pair member on qubit 1."""
    return pair_state(BELL_COEFFS[BellKind(kind)], "first_high")


def _pair_low(kind: BellKind | int) -> StateVector:
    # channel registers store the first (sender-side) member at the lower index
    return pair_state(BELL_COEFFS[BellKind(kind)], "first_low")


def ghz_state(n_qubits: int, *, allow_large: bool = False) -> StateVector:
    """(|0...0> + |1...1>)/sqrt2 via H on the top qubit and a CNOT fan-out."""
    state = apply_1q(init_basis(n_qubits, 0, allow_large=allow_large), "H", n_qubits - 1)
    for target in range(n_qubits - 1):
        state = apply_cnot(state, n_qubits - 1, target)
    return state


def prepare_channel_circuit(k: int, *, allow_large: bool = False) -> StateVector:
    """Gate-level construction of the k-pair channel on 2k+1 qubits.

    Steps: GHZ over all qubits (controller on top), then H on each
    receiver-side qubit, then CNOT from the receiver-side qubit onto its
    sender-side partner.
    """
    if k < 1:
        raise ValueError(f"need at least one pair, got {k}")
    state = ghz_state(2 * k + 1, allow_large=allow_large)
    for j in range(k):
        state = apply_1q(state, "H", 2 * j + 1)
    for j in range(k):
        state = apply_cnot(state, 2 * j + 1, 2 * j)
    return state


def build_channel_analytic(k: int, branch_sign: int = 1, *, allow_large: bool = False) -> StateVector:
    """Direct tensor assembly of the k-pair channel, no gates involved.

    Returns (kappa+^k |0>_E + sign * lambda-^k |1>_E)/sqrt2.  The circuit
    builder reproduces this with branch_sign = (-1)^k.
    """
    if k < 1:
        raise ValueError(f"need at least one pair, got {k}")
    if branch_sign not in (1, -1):
        raise ValueError(f"branch sign must be +1 or -1, got {branch_sign}")
    kappa = [_pair_low(BellKind.KAPPA_PLUS)] * k
    lam = [_pair_low(BellKind.LAMBDA_MINUS)] * k
    branch0 = tensor(*kappa, init_basis(1, 0), allow_large=allow_large)
    branch1 = tensor(*lam, init_basis(1, 1), allow_large=allow_large)
    amps = (branch0.amps + branch_sign * branch1.amps) * _SQRT2_INV
    return StateVector(2 * k + 1, amps, copy=False)


@dataclass
class ChannelLayout:
    """Names for the channel register of an n_pairs-pair protocol.

    ``label_map`` sends both the numeric construction labels (1-based, as in
    the circuit description) and the protocol role labels to qubit indices.
    Role labels exist for up to four sender blocks: sender block i owns
    ("S{i}", "S{i}'"), its receiver owns ("R{i}", "R{i}'"), and "E" is the
    controller.  For the full 8-pair channel the classic single-letter roles
    (A, A', P, Q, B, ...) are included as aliases.
    """

    n_pairs: int
    label_map: dict = field(default_factory=dict)

    _CLASSIC_ROLES = (
        ("A", "P", "A'", "Q"),
        ("B", "R", "B'", "S"),
        ("C", "T", "C'", "U"),
        ("D", "V", "D'", "W"),
    )

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ValueError("need at least one pair")
        if not self.label_map:
            self.label_map = self._standard_map()
        n = 2 * self.n_pairs + 1
        numeric = [self.label_map.get(label) for label in range(1, n + 1)]
        if sorted(numeric) != list(range(n)):  # type: ignore[arg-type]
            raise ValueError("numeric labels 1..2k+1 must map onto every channel qubit exactly once")
        if any(not 0 <= v < n for v in self.label_map.values()):
            raise ValueError("label map targets must be valid channel qubits")

    def _standard_map(self) -> dict:
        n = 2 * self.n_pairs + 1
        m: dict = {label: label - 1 for label in range(1, n + 1)}
        m["E"] = n - 1
        if self.n_pairs % 2 == 0:
            for i in range(self.n_pairs // 2):
                s, r, s2, r2 = (f"S{i}", f"R{i}", f"S{i}'", f"R{i}'")
                m[s], m[r], m[s2], m[r2] = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
                if self.n_pairs == 8:
                    a, p, a2, q = self._CLASSIC_ROLES[i]
                    m[a], m[p], m[a2], m[q] = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
        return m

    @property
    def controller(self) -> int:
        return self.label_map["E"]

    def pair_qubits(self, j: int) -> tuple[int, int]:
        """(sender-side, receiver-side) qubits of pair j."""
        if not 0 <= j < self.n_pairs:
            raise IndexError(f"pair {j} out of range")
        return self.label_map[2 * j + 1], self.label_map[2 * j + 2]

    def sender_qubits(self, i: int) -> tuple[int, int]:
        """The two sender-side channel qubits of sender block i."""
        return self.pair_qubits(2 * i)[0], self.pair_qubits(2 * i + 1)[0]

    def receiver_qubits(self, i: int) -> tuple[int, int]:
        """The two receiver-side channel qubits of sender block i."""
        return self.pair_qubits(2 * i)[1], self.pair_qubits(2 * i + 1)[1]


def relabel(state: StateVector, layout: ChannelLayout) -> StateVector:
    """Permute a channel state from construction order into layout positions.

    The input must be in construction order (numeric label L at qubit L-1);
    the output places label L at ``layout.label_map[L]``.  The standard
    layout is the identity permutation.
    """
    n = 2 * layout.n_pairs + 1
    if state.n_qubits != n:
        raise ValueError(f"state has {state.n_qubits} qubits, layout expects {n}")
    perm = [layout.label_map[label + 1] for label in range(n)]
    return permute_qubits(state, perm)
