"""Deterministic random streams for reproducible parallel shot execution.

Everything random derives from one 64-bit experiment seed. Each consumer
("purpose") owns an independent counter-based Philox stream keyed by
``(seed, purpose)``, and within a purpose each shot owns a fixed slice of
the counter space, padded to the generator's four-word block size. The
whole ensemble can then be drawn in a single vectorised call while any
individual shot remains reproducible in isolation by advancing the counter
to the start of its slice.
"""

from __future__ import annotations

import numpy as np

# Purpose tags; each gets an independent stream for the same seed.
ONTIC_SHOTS = 0x01
QUANTUM_SHOTS = 0x02
PREPARE_FIELDS = 0x03
PREPARE_SIEVE = 0x04

_BLOCK = 4  # Philox emits four 64-bit words per counter increment


def _bit_generator(seed: int, purpose: int) -> np.random.Philox:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(purpose)],
                   dtype=np.uint64)
    return np.random.Philox(key=key)


def generator(seed: int, purpose: int) -> np.random.Generator:
    """Fresh generator for unstructured draws under one purpose."""
    return np.random.Generator(_bit_generator(seed, purpose))


def padded_width(draws_per_shot: int) -> int:
    """Per-shot slice width: ``draws_per_shot`` rounded up to a whole block."""
    if draws_per_shot <= 0:
        return 0
    return _BLOCK * ((draws_per_shot + _BLOCK - 1) // _BLOCK)


def ensemble_uniforms(seed: int, purpose: int, shots: int,
                      draws_per_shot: int) -> np.ndarray:
    """Uniforms for a whole ensemble, shape ``(shots, draws_per_shot)``.

    Row ``i`` equals the stream of :func:`shot_generator` for shot ``i``.
    """
    width = padded_width(draws_per_shot)
    if width == 0:
        return np.zeros((shots, 0))
    flat = np.random.Generator(_bit_generator(seed, purpose)).random(shots * width)
    return flat.reshape(shots, width)[:, :draws_per_shot]


def shot_generator(seed: int, purpose: int, shot: int,
                   draws_per_shot: int) -> np.random.Generator:
    """Generator positioned at shot ``shot``'s slice of the purpose stream.

    The first ``draws_per_shot`` doubles drawn from it are bit-identical to
    row ``shot`` of :func:`ensemble_uniforms`; consumers must not draw more.
    """
    width = padded_width(draws_per_shot)
    bg = _bit_generator(seed, purpose)
    if shot and width:
        # advance() counts whole counter blocks of four 64-bit draws
        bg = bg.advance(shot * width // _BLOCK)
    return np.random.Generator(bg)


def shot_uniforms(seed: int, purpose: int, shot: int,
                  draws_per_shot: int) -> np.ndarray:
    """The uniforms shot ``shot`` will consume, drawn in isolation."""
    if draws_per_shot <= 0:
        return np.zeros(0)
    return shot_generator(seed, purpose, shot, draws_per_shot).random(draws_per_shot)
