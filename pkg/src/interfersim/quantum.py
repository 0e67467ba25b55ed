"""Reference quantum engine: state vector, gate unitaries, Born sampling.

States are normalized complex vectors over the circuit paths, equal up to a
global phase. Phase shifters and beam splitters act unitarily on their own
components; a detector layer is a single projective measurement event with
click probability ``|psi_j|**2`` per detector and a joint no-click branch
that projects out every detector path at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .circuits import BeamSplitter, Circuit, Layer, PhaseShifter
from .records import OutcomeRecord

# Norm drift below RENORM_TOL is ignored, between the two it is silently
# renormalized, beyond FAIL_TOL it is treated as an internal error.
RENORM_TOL = 1e-9
FAIL_TOL = 1e-6

# Outcome branches with probability at or below this are impossible.
IMPOSSIBLE_TOL = 1e-12


class ImpossibleOutcomeError(ValueError):
    """Conditioning on an outcome whose probability is zero."""


class BranchCapError(RuntimeError):
    """Exact outcome enumeration exceeded its branch budget."""


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class QuantumState:
    """Normalized state vector; equality of physical states is ray equality."""

    amplitudes: np.ndarray

    def __init__(self, amplitudes: Iterable[complex]):
        psi = np.array(tuple(amplitudes), dtype=np.complex128)
        if psi.ndim != 1 or psi.size == 0:
            raise ValueError("state must be a non-empty vector")
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > FAIL_TOL:
            raise ValueError(f"state norm {norm} too far from 1")
        if abs(norm - 1.0) > RENORM_TOL:
            psi = psi / norm
        object.__setattr__(self, "amplitudes", _readonly(psi))

    @property
    def width(self) -> int:
        return self.amplitudes.size

    def ray_equals(self, other: "QuantumState", tol: float = 1e-9) -> bool:
        return ray_overlap(self.amplitudes, other.amplitudes) >= 1.0 - tol

    @classmethod
    def basis(cls, path: int, width: int) -> "QuantumState":
        if not 0 <= path < width:
            raise IndexError(f"path {path} out of range for width {width}")
        psi = np.zeros(width, dtype=np.complex128)
        psi[path] = 1.0
        return cls(psi)


def ray_overlap(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>| / (|a||b|)``; 1 means the vectors span the same ray."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(abs(np.vdot(a, b)) / (na * nb))


def beamsplitter_matrix(reflectivity: float) -> np.ndarray:
    """2x2 coupler block ``[[i sqrt(R), sqrt(T)], [sqrt(T), i sqrt(R)]]``."""
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity {reflectivity!r} outside [0, 1]")
    r = math.sqrt(reflectivity)
    t = math.sqrt(1.0 - reflectivity)
    return np.array([[1j * r, t], [t, 1j * r]], dtype=np.complex128)


def _check_path(path: int, width: int) -> None:
    if not 0 <= path < width:
        raise IndexError(f"path {path} out of range for width {width}")


def apply_phase(state: QuantumState, path: int, omega: float) -> QuantumState:
    """Multiply component ``path`` by ``exp(i omega)``."""
    _check_path(path, state.width)
    psi = state.amplitudes.copy()
    psi[path] *= np.exp(1j * omega)
    return QuantumState(psi)


def apply_beamsplitter(state: QuantumState, s: int, t: int,
                       reflectivity: float) -> QuantumState:
    """Apply the coupler block to components ``(s, t)``."""
    _check_path(s, state.width)
    _check_path(t, state.width)
    if s == t:
        raise ValueError("beam splitter requires two distinct paths")
    b = beamsplitter_matrix(reflectivity)
    psi = state.amplitudes.copy()
    psi_s = b[0, 0] * psi[s] + b[0, 1] * psi[t]
    psi_t = b[1, 0] * psi[s] + b[1, 1] * psi[t]
    psi[s] = psi_s
    psi[t] = psi_t
    return QuantumState(psi)


def detector_click_probability(state: QuantumState, path: int) -> float:
    """Born probability ``|psi_path|**2``."""
    _check_path(path, state.width)
    return float(abs(state.amplitudes[path]) ** 2)


def apply_detection(state: QuantumState, path: int, clicked: bool) -> QuantumState:
    """Collapse after a detector outcome: click projects onto the path,
    no-click projects it out and renormalizes."""
    _check_path(path, state.width)
    if clicked:
        if detector_click_probability(state, path) <= IMPOSSIBLE_TOL:
            raise ImpossibleOutcomeError(
                f"click at path {path} has probability 0"
            )
        return QuantumState.basis(path, state.width)
    return project_no_click(state, (path,))


def project_no_click(state: QuantumState, paths: Iterable[int]) -> QuantumState:
    """Joint no-click collapse: zero every listed component, renormalize once."""
    psi = state.amplitudes.copy()
    for path in paths:
        _check_path(path, state.width)
        psi[path] = 0.0
    norm_sq = float(np.vdot(psi, psi).real)
    if norm_sq <= IMPOSSIBLE_TOL:
        raise ImpossibleOutcomeError("joint no-click has probability 0")
    return QuantumState(psi / math.sqrt(norm_sq))


def unitary_part(layer: Layer, width: int) -> np.ndarray:
    """Matrix of the layer's phase shifters and beam splitters (detectors and
    free paths contribute identity)."""
    u = np.eye(width, dtype=np.complex128)
    for gate in layer.gates:
        if isinstance(gate, PhaseShifter):
            u[gate.path, gate.path] = np.exp(1j * gate.omega)
        elif isinstance(gate, BeamSplitter):
            block = beamsplitter_matrix(gate.reflectivity)
            u[gate.s, gate.s] = block[0, 0]
            u[gate.s, gate.t] = block[0, 1]
            u[gate.t, gate.s] = block[1, 0]
            u[gate.t, gate.t] = block[1, 1]
    return u


def detector_complement(paths: Iterable[int], width: int) -> np.ndarray:
    """Diagonal projector that zeroes every listed path."""
    d = np.ones(width, dtype=np.complex128)
    for path in paths:
        d[path] = 0.0
    return np.diag(d)


def _apply_layer_unitaries(state: QuantumState, layer: Layer) -> QuantumState:
    for gate in layer.gates:
        if isinstance(gate, PhaseShifter):
            state = apply_phase(state, gate.path, gate.omega)
        elif isinstance(gate, BeamSplitter):
            state = apply_beamsplitter(state, gate.s, gate.t, gate.reflectivity)
    return state


def _sample_layer_outcome(state: QuantumState, detectors: tuple[int, ...],
                          u: float) -> int | None:
    """Pick a click path or None from one uniform draw via the cumulative
    distribution over (clicks..., no-click)."""
    probs = [detector_click_probability(state, j) for j in detectors]
    no_click = max(0.0, 1.0 - sum(probs))
    total = sum(probs) + no_click
    acc = 0.0
    for j, p in zip(detectors, probs):
        acc += p / total
        if u < acc:
            return j
    return None


def run_quantum_shot(circuit: Circuit, init: QuantumState,
                     rng: np.random.Generator) -> tuple[OutcomeRecord, QuantumState]:
    """Execute one sampled run.

    Per layer: apply the unitary gates, then treat the layer's detectors as a
    single measurement event (at most one click, else joint no-click) and
    collapse accordingly. Consumes exactly one uniform draw per detector
    layer, so a shot's stream use is a function of the circuit alone.
    """
    if init.width != circuit.width:
        raise ValueError("initial state width does not match circuit")
    state = init
    events: list[tuple[int, int | None]] = []
    for layer_idx, layer in enumerate(circuit.layers):
        state = _apply_layer_unitaries(state, layer)
        detectors = tuple(sorted(layer.detector_paths()))
        if not detectors:
            continue
        clicked = _sample_layer_outcome(state, detectors, float(rng.random()))
        if clicked is None:
            state = project_no_click(state, detectors)
        else:
            state = QuantumState.basis(clicked, circuit.width)
        events.append((layer_idx, clicked))
    return OutcomeRecord(tuple(events)), state


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact probability for every reachable full outcome record."""

    probabilities: Mapping[OutcomeRecord, float]

    def __post_init__(self):
        total = sum(self.probabilities.values())
        if abs(total - 1.0) > 1e-9:
            raise AssertionError(f"branch probabilities sum to {total}, not 1")

    def by_key(self) -> dict[str, float]:
        return {record.key: p for record, p in self.probabilities.items()}

    def condition(self, constraints: tuple[tuple[int, int | None], ...]
                  ) -> "OutcomeDistribution":
        """Distribution conditioned on matching the ``(layer, result)``
        constraints, renormalized."""
        kept = {rec: p for rec, p in self.probabilities.items()
                if rec.matches(constraints)}
        total = sum(kept.values())
        if total <= 0.0:
            raise ImpossibleOutcomeError("conditioning event has probability 0")
        return OutcomeDistribution({rec: p / total for rec, p in kept.items()})


def exact_outcome_distribution(circuit: Circuit, init: QuantumState,
                               branch_cap: int = 10 ** 6) -> OutcomeDistribution:
    """Enumerate the full outcome tree with exact branch probabilities.

    Branches with probability at most ``IMPOSSIBLE_TOL`` are pruned, so a
    recorded outcome absent from the result is an impossible event. Raises
    :class:`BranchCapError` when the number of leaves would exceed
    ``branch_cap``.
    """
    if init.width != circuit.width:
        raise ValueError("initial state width does not match circuit")
    leaves: dict[OutcomeRecord, float] = {}
    count = 0

    def walk(state: QuantumState, layer_idx: int, prob: float,
             events: tuple[tuple[int, int | None], ...]) -> None:
        nonlocal count
        for idx in range(layer_idx, circuit.depth):
            layer = circuit.layers[idx]
            state = _apply_layer_unitaries(state, layer)
            detectors = tuple(sorted(layer.detector_paths()))
            if not detectors:
                continue
            probs = [detector_click_probability(state, j) for j in detectors]
            no_click = max(0.0, 1.0 - sum(probs))
            for j, p in zip(detectors, probs):
                if p > IMPOSSIBLE_TOL:
                    walk(QuantumState.basis(j, circuit.width), idx + 1,
                         prob * p, events + ((idx, j),))
            if no_click > IMPOSSIBLE_TOL:
                state = project_no_click(state, detectors)
                prob = prob * no_click
                events = events + ((idx, None),)
            else:
                return
        record = OutcomeRecord(events)
        leaves[record] = leaves.get(record, 0.0) + prob
        count += 1
        if count > branch_cap:
            raise BranchCapError(
                f"outcome enumeration exceeded {branch_cap} branches"
            )

    walk(init, 0, 1.0, ())
    return OutcomeDistribution(leaves)
