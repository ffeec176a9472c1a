"""Closed-form coherent-state algebra.

Coherent states are carried as their complex labels ``alpha``; nothing in this
module touches a Fock basis, so every function is exact at any photon number.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

CoherentLabel = complex


def _as_label(a) -> complex:
    a = complex(a)
    if not (math.isfinite(a.real) and math.isfinite(a.imag)):
        raise ValueError(f"coherent label must be finite, got {a!r}")
    return a


def mean_photon_number(a: CoherentLabel) -> float:
    return abs(a) ** 2


def coherent_overlap(a: CoherentLabel, b: CoherentLabel) -> complex:
    """<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b).

    Evaluated as exp(-|a - b|^2/2 + i Im(conj(a) b)), which is exact at any
    photon number (no overflow, no cancellation between large exponents).
    """
    a, b = _as_label(a), _as_label(b)
    return cmath.exp(-0.5 * abs(a - b) ** 2 + 1j * (a.conjugate() * b).imag)


def rotate_label(a: CoherentLabel, theta: float) -> complex:
    """Phase-space rotation |a> -> |a e^{i theta}>."""
    return _as_label(a) * cmath.exp(1j * theta)


def displace_label(a: CoherentLabel, beta: CoherentLabel) -> tuple[complex, complex]:
    """Apply D(beta) to |a>.

    Returns ``(a + beta, phase)`` with ``D(beta)|a> = phase * |a + beta>`` and
    ``phase = exp(i Im(beta conj(a)))``.
    """
    a, beta = _as_label(a), _as_label(beta)
    return a + beta, cmath.exp(1j * (beta * a.conjugate()).imag)


def parity_label(a: CoherentLabel) -> complex:
    """exp(-i pi a^dag a)|a> = |-a>."""
    return -_as_label(a)


def cat_normalization(alpha0: CoherentLabel) -> float:
    """Normalization N of N(|0> + |alpha0>)."""
    D = mean_photon_number(_as_label(alpha0))
    return 1.0 / math.sqrt(2.0 * (1.0 + math.exp(-D / 2.0)))


@dataclass(frozen=True)
class CatComponent:
    label: complex
    coefficient: complex


@dataclass(frozen=True)
class CatState:
    """Superposition sum_k coefficient_k |label_k>.

    ``coefficient`` already includes the normalization; ``norm_factor`` is kept
    for reference.
    """

    components: tuple[CatComponent, ...]
    norm_factor: float

    @property
    def labels(self) -> tuple[complex, ...]:
        return tuple(c.label for c in self.components)

    @property
    def coefficients(self) -> tuple[complex, ...]:
        return tuple(c.coefficient for c in self.components)

    def relative_phase(self) -> float:
        """arg(c_1 / c_0) for a two-component cat."""
        c0, c1 = self.coefficients[:2]
        return cmath.phase(c1 / c0)

    def map_labels(self, fn) -> "CatState":
        """Apply ``fn(label) -> (new_label, phase)`` to every component."""
        comps = []
        for c in self.components:
            label, phase = fn(c.label)
            comps.append(CatComponent(label, c.coefficient * phase))
        return CatState(tuple(comps), self.norm_factor)


def cat_overlap(left: CatState, right: CatState) -> complex:
    """<left|right> summed over all component pairs."""
    return sum(
        (
            l.coefficient.conjugate() * r.coefficient * coherent_overlap(l.label, r.label)
            for l in left.components
            for r in right.components
        ),
        0j,
    )


def apply_parity(cat: CatState) -> CatState:
    return cat.map_labels(lambda a: (parity_label(a), 1.0))


def parity_expectation(cat: CatState) -> complex:
    return cat_overlap(cat, apply_parity(cat))


def make_cat(labels: Sequence[complex], coefficients: Sequence[complex], norm_factor: float) -> CatState:
    return CatState(
        tuple(CatComponent(_as_label(a), complex(c)) for a, c in zip(labels, coefficients)),
        float(norm_factor),
    )
