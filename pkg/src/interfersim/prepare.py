"""Initial ensemble preparation for both engines.

Two routes to a single-particle start in a chosen path:

- *sieve*: push states from an arbitrary raw source through a full array of
  detectors and keep the runs where exactly the target path clicked;
- *source*: inject the particle directly with full field strength in its
  path while every other path carries zero strength and an arbitrary "junk"
  amplitude from a pluggable sampler.

Either way the prepared state has the particle at the target path with
amplitude 1 and strength 1 there, zero strength elsewhere, and unknown
leftover amplitudes elsewhere. The experiment statistics must not depend on
those leftovers, which the harness checks by swapping junk samplers.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import rng as streams
from .circuits import Detector, Layer
from .ontic import (
    FULL_STRENGTH,
    ZERO_LEVEL,
    ZERO_STRENGTH,
    DyadicStrength,
    OnticState,
    step_layer,
)
from .quantum import QuantumState

JunkSampler = Callable[[np.random.Generator, tuple[int, ...]], np.ndarray]


class PreparationError(RuntimeError):
    """The sieve could not reach its target acceptance."""


def junk_zero(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return np.zeros(shape, dtype=np.complex128)


def junk_disk(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Uniform modulus in [0, 1] and uniform phase, independently per entry."""
    modulus = gen.random(shape)
    phase = gen.random(shape) * (2.0 * math.pi)
    return modulus * np.exp(1j * phase)


JUNK_SAMPLERS: dict[str, JunkSampler] = {
    "zero": junk_zero,
    "disk": junk_disk,
}


def resolve_junk(junk: str | JunkSampler) -> JunkSampler:
    if callable(junk):
        return junk
    try:
        return JUNK_SAMPLERS[junk]
    except KeyError:
        raise ValueError(f"unknown junk sampler {junk!r}; "
                         f"expected one of {sorted(JUNK_SAMPLERS)}") from None


def quantum_init(path: int, width: int) -> QuantumState:
    """Basis state: the particle definitely in ``path``."""
    return QuantumState.basis(path, width)


def source_prepare(path: int, width: int, gen: np.random.Generator,
                   junk: str | JunkSampler = "zero") -> OnticState:
    """Blocked-path source: particle injected into ``path`` with a full-
    strength unit field there; all other paths get zero strength and a junk
    amplitude."""
    if not 0 <= path < width:
        raise IndexError(f"path {path} out of range for width {width}")
    u = resolve_junk(junk)(gen, (width,))
    u[path] = 1.0
    tau = [ZERO_STRENGTH] * width
    tau[path] = FULL_STRENGTH
    return OnticState(path, u, tau)


def sieve_prepare(raw_sampler: Callable[[np.random.Generator], OnticState],
                  target: int, gen: np.random.Generator,
                  floor: float = 1e-6) -> OnticState:
    """Rejection-sample raw states through a full detector array.

    Each draw is pushed through one layer of detectors on every path; the
    state is kept when exactly the target path clicked. Gives up with a
    diagnostic once enough draws have failed that an acceptance probability
    of at least ``floor`` is implausible.
    """
    if not 0.0 < floor <= 1.0:
        raise ValueError("acceptance floor must be in (0, 1]")
    max_attempts = max(1000, int(math.ceil(20.0 / floor)))
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        raw = raw_sampler(gen)
        sieve = Layer([Detector(j) for j in range(raw.width)])
        results, sieved = step_layer(raw, sieve, gen)
        clicked = [p for p, hit in results if hit]
        assert len(clicked) == 1  # one particle, one click
        if clicked[0] == target:
            return sieved
    raise PreparationError(
        f"sieve got no click at path {target} in {attempts} draws "
        f"(acceptance floor {floor})"
    )


def default_raw_sampler(width: int,
                        junk: str | JunkSampler = "disk",
                        ) -> Callable[[np.random.Generator], OnticState]:
    """An intentionally messy unknown source: uniform particle position,
    junk amplitudes everywhere, assorted field strengths."""
    sampler = resolve_junk(junk)

    def draw(gen: np.random.Generator) -> OnticState:
        q = int(gen.integers(width))
        u = sampler(gen, (width,))
        tau = []
        for _ in range(width):
            k = int(gen.integers(5))
            tau.append(ZERO_STRENGTH if k == 4 else DyadicStrength(k))
        return OnticState(q, u, tau)

    return draw


# --------------------------------------------------------------------------
# Vectorised preparation for the harness
# --------------------------------------------------------------------------

def prepare_ensemble(mode: str, path: int, width: int, shots: int, seed: int,
                     junk: str | JunkSampler = "zero",
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-shot ``(q, u, levels)`` arrays for an ensemble run.

    Both modes produce the same distribution by construction: the sieve's
    detector array leaves the non-target amplitudes untouched and zeroes
    their strengths, and the raw source's amplitude marginal is the junk
    distribution independently of the particle position, so conditioning on
    the target click is equivalent to direct injection. ``sieve_prepare``
    implements the literal rejection procedure for single states; here both
    modes build the accepted ensemble directly.
    """
    if not 0 <= path < width:
        raise IndexError(f"path {path} out of range for width {width}")
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if mode not in ("source", "sieve"):
        raise ValueError(f"unknown preparation mode {mode!r}")
    sampler = resolve_junk(junk)
    gen = streams.generator(seed, streams.PREPARE_FIELDS)
    u = sampler(gen, (shots, width))
    u[:, path] = 1.0
    q = np.full(shots, path, dtype=np.int64)
    levels = np.full((shots, width), ZERO_LEVEL, dtype=np.int64)
    levels[:, path] = 0
    return q, u, levels
