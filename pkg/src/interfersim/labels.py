"""Hidden-label analysis for the stochastic engine.

The amplitudes carried at the highest field strength encode a unit ray, the
state's *label*. Labels evolve under gates exactly as the quantum engine's
state vector does: unitarily through phase shifters and beam splitters,
projectively through detector outcomes. This module extracts labels from
engine states, tests membership in the family of labelled state classes,
evolves labels through layers, and verifies that traced trajectories stay
congruent with the predicted label at every step. It also materialises both
sides of the projection/update commutation identity that underlies the
congruence, for randomized checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuits import Circuit, Layer, validate_layer
from .ontic import DyadicStrength, OnticState, ZERO_STRENGTH
from .quantum import (
    ImpossibleOutcomeError,
    detector_complement,
    ray_overlap,
    unitary_part,
)
from .records import OutcomeRecord

RAY_TOL = 1e-9
PROJECTION_TOL = 1e-12


class CongruenceError(RuntimeError):
    """A traced trajectory diverged from its predicted label."""

    def __init__(self, layer: int, deviation: float, message: str):
        self.layer = layer
        self.deviation = deviation
        super().__init__(message)


@dataclass(frozen=True)
class ClassLabel:
    """Normalized complex vector compared as a ray."""

    vector: np.ndarray

    def __init__(self, vector: Iterable[complex]):
        v = np.array(tuple(vector), dtype=np.complex128)
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"label norm {norm} too far from 1")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def width(self) -> int:
        return self.vector.size

    def ray_equals(self, other: "ClassLabel", tol: float = RAY_TOL) -> bool:
        return ray_overlap(self.vector, other.vector) >= 1.0 - tol

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "ClassLabel":
        norm = float(np.linalg.norm(v))
        if norm <= PROJECTION_TOL:
            raise ValueError("cannot label a zero vector")
        return cls(np.asarray(v, dtype=np.complex128) / norm)

    @classmethod
    def basis(cls, path: int, width: int) -> "ClassLabel":
        v = np.zeros(width, dtype=np.complex128)
        v[path] = 1.0
        return cls(v)


def dominant_strength(state: OnticState) -> DyadicStrength:
    """Exact maximum of the strength vector; zero iff all strengths are zero."""
    return max(state.tau)


def delta_projection(state: OnticState) -> np.ndarray:
    """Amplitudes at the dominant strength, the rest zeroed (exact selection).

    Requires a non-zero dominant strength.
    """
    top = dominant_strength(state)
    if top.is_zero:
        raise ValueError("all field strengths are zero; nothing to project")
    keep = np.array([t == top for t in state.tau])
    return np.where(keep, state.u, 0.0j)


def extract_label(state: OnticState) -> ClassLabel | None:
    """Unit ray of the dominant-strength amplitudes, or None when the
    dominant strength is zero or the projected vector vanishes."""
    if dominant_strength(state).is_zero:
        return None
    projected = delta_projection(state)
    norm = float(np.linalg.norm(projected))
    if norm <= PROJECTION_TOL:
        return None
    return ClassLabel(projected / norm)


def in_class(state: OnticState, z: ClassLabel, i: int) -> bool:
    """Membership test for the labelled class anchored at path ``i``:
    the particle is at ``i``, path ``i`` carries the (non-zero) dominant
    strength, and the extracted label ray-equals ``z``.

    The first two conditions are exact dyadic comparisons; only the ray
    comparison uses a tolerance.
    """
    if state.q != i:
        return False
    top = dominant_strength(state)
    if top.is_zero or state.tau[i] != top:
        return False
    label = extract_label(state)
    if label is None:
        return False
    return label.ray_equals(z)


def predicted_label_update(z: ClassLabel, layer: Layer,
                           click: int | None) -> ClassLabel:
    """Label after one layer, given the layer's measurement outcome.

    A click at path ``j`` resets the label to the basis ray at ``j``. On a
    joint no-click (or with no detectors at all) the label evolves through
    the layer's unitary gates, the detector paths are projected out, and the
    result is renormalized; all the matrix factors act on disjoint paths, so
    their order is immaterial.
    """
    partition = validate_layer(layer, z.width)
    if click is not None:
        if click not in partition.detectors:
            raise ValueError(f"path {click} has no detector in this layer")
        return ClassLabel.basis(click, z.width)
    w = unitary_part(layer, z.width) @ z.vector
    for path in partition.detectors:
        w[path] = 0.0
    norm = float(np.linalg.norm(w))
    if norm <= PROJECTION_TOL:
        raise ImpossibleOutcomeError("joint no-click has probability 0 for this label")
    return ClassLabel(w / norm)


@dataclass(frozen=True)
class LayerCheck:
    """Congruence evidence for one layer of a traced shot."""

    layer: int
    deviation: float
    member: bool


@dataclass(frozen=True)
class CongruenceReport:
    """Per-layer deviations of a traced trajectory from its predicted labels."""

    checks: tuple[LayerCheck, ...]
    max_deviation: float
    passed: bool

    def to_json_dict(self, shot: int = 0) -> dict:
        return {
            "shot": shot,
            "layers": [{"deviation": c.deviation} for c in self.checks],
            "pass": self.passed,
        }


def verify_congruence(trajectory: Sequence[OnticState], record: OutcomeRecord,
                      circuit: Circuit, init_label: ClassLabel,
                      tol: float = RAY_TOL, strict: bool = False,
                      ) -> CongruenceReport:
    """Check a traced shot against the label update rules, layer by layer.

    ``trajectory`` must hold the initial state followed by the state after
    every layer (``run_ontic_shot`` with ``trace=True``). At each boundary
    the extracted label must ray-equal the label evolved under the same
    outcomes, and the state must belong to the labelled class anchored at
    its particle position. Deviations are ``1 - |overlap|``.

    With ``strict`` the first violation raises :class:`CongruenceError`;
    otherwise the report carries every layer's deviation.
    """
    if len(trajectory) != circuit.depth + 1:
        raise ValueError("trajectory must contain the state after every layer")
    checks: list[LayerCheck] = []
    max_dev = 0.0
    passed = True

    def judge(layer_idx: int, state: OnticState, label: ClassLabel) -> None:
        nonlocal max_dev, passed
        extracted = extract_label(state)
        deviation = 1.0 if extracted is None else \
            1.0 - ray_overlap(extracted.vector, label.vector)
        member = in_class(state, label, state.q)
        ok = deviation <= tol and member
        if layer_idx >= 0:
            checks.append(LayerCheck(layer_idx, deviation, member))
        max_dev = max(max_dev, deviation)
        if not ok:
            passed = False
            if strict:
                raise CongruenceError(
                    layer_idx, deviation,
                    f"layer {layer_idx}: deviation {deviation:.3e}, "
                    f"member={member}, state={state!r}",
                )

    label = init_label
    judge(-1, trajectory[0], label)
    for layer_idx, layer in enumerate(circuit.layers):
        click = record.result_for_layer(layer_idx) if record.has_layer(layer_idx) \
            else None
        label = predicted_label_update(label, layer, click)
        judge(layer_idx, trajectory[layer_idx + 1], label)
    return CongruenceReport(tuple(checks), max_dev, passed)


def check_delta_commutation(layer: Layer, tau_before: Sequence[DyadicStrength],
                            width: int, tol: float = 1e-12) -> bool:
    """Materialise both sides of the projection/update commutation identity
    for one layer and strength pattern and compare them entrywise.

    Left side: project onto the post-layer dominant strengths after applying
    the layer's unitary gates with per-splitter suppression. Right side:
    project onto the pre-layer dominant strengths first, then apply the
    unitary gates and zero the detector paths. The identity holds whenever
    the pre-layer maximum strength is non-zero and attained on at least one
    path without a detector; outside that domain the two sides genuinely
    differ and this check returns False.
    """
    partition = validate_layer(layer, width)
    tau_before = tuple(tau_before)
    if len(tau_before) != width:
        raise ValueError("strength vector does not match width")

    top = max(tau_before)
    delta_before = np.diag([1.0 if t == top else 0.0 for t in tau_before]
                           ).astype(np.complex128)

    # Strengths after the layer, by the engine's rules.
    after = list(tau_before)
    for path in partition.free:
        after[path] = after[path].halved()
    for path in partition.shifters:
        after[path] = after[path].halved()
    for path in partition.detectors:
        after[path] = ZERO_STRENGTH
    for s, t in partition.splitter_pairs:
        levelled = max(tau_before[s], tau_before[t]).halved()
        after[s] = after[t] = levelled
    top_after = max(after)
    delta_after = np.diag([1.0 if t == top_after else 0.0 for t in after]
                          ).astype(np.complex128)

    # Per-splitter suppression of the weaker incoming field.
    suppress = np.eye(width, dtype=np.complex128)
    for s, t in partition.splitter_pairs:
        pair_top = max(tau_before[s], tau_before[t])
        suppress[s, s] = 1.0 if tau_before[s] == pair_top else 0.0
        suppress[t, t] = 1.0 if tau_before[t] == pair_top else 0.0

    unitaries = unitary_part(layer, width)
    left = delta_after @ unitaries @ suppress
    right = detector_complement(partition.detectors, width) @ unitaries @ delta_before
    return bool(np.max(np.abs(left - right)) <= tol)
