"""Closed-form cat-state Ramsey protocol: P_g and signal-to-noise ratio.

Pipeline: N(|0> + |alpha0>) -> rotation by theta (optionally with photon loss
kappa*T) -> displacement D(-alpha0/2) -> pi/2 pulse, conditional parity, pi/2
pulse -> ground-state population of the qubit.

Angles are in radians. The relative phase produced by the displacement is
D sin(theta)/2; the small-angle form D theta/2 is available as
``mode="paper_literal"`` for the loss-free readout only.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from catsense.errors import DegenerateBias
from catsense.phase_space import (
    CatState,
    cat_normalization,
    coherent_overlap,
    displace_label,
    make_cat,
    rotate_label,
)

MODES = ("exact", "paper_literal")
DERIVATIVES = ("analytic", "central_difference")

# P_g(1 - P_g) below this makes R undefined
DEGENERATE_VARIANCE = 1e-15


@dataclass(frozen=True)
class ProtocolConfig:
    """Physical protocol parameters.

    ``theta = -epsilon * T`` and ``kappaT = kappa * T`` are derived, so they are
    consistent by construction. Use :meth:`from_angles` to work directly in the
    dimensionless variables (T is then 1).
    """

    alpha0: complex
    epsilon: float = 0.0
    T: float = 1.0
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        for name in ("epsilon", "T", "kappa"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if not (math.isfinite(self.alpha0.real) and math.isfinite(self.alpha0.imag)):
            raise ValueError("alpha0 must be finite")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")

    @classmethod
    def from_angles(cls, D=None, theta=0.0, kappaT=0.0, alpha0=None) -> "ProtocolConfig":
        if (D is None) == (alpha0 is None):
            raise ValueError("give exactly one of D or alpha0")
        if alpha0 is None:
            if D < 0:
                raise ValueError(f"D must be >= 0, got {D}")
            alpha0 = math.sqrt(D)
        return cls(alpha0=alpha0, epsilon=-float(theta), T=1.0, kappa=float(kappaT))

    @property
    def theta(self) -> float:
        return -self.epsilon * self.T

    @property
    def kappaT(self) -> float:
        return self.kappa * self.T

    @property
    def D(self) -> float:
        return abs(self.alpha0) ** 2

    def with_theta(self, theta: float) -> "ProtocolConfig":
        if self.T == 0:
            raise ValueError("cannot set theta with T = 0")
        return ProtocolConfig(self.alpha0, -theta / self.T, self.T, self.kappa)


@dataclass(frozen=True)
class DecoheredFieldState:
    """Field state after lossy rotation and displacement.

    rho = N^2 (|r><r| + |s><s| + K e^{-i phi} |r><s| + K e^{i phi} |s><r|)
    with r = ``label_ref`` and s = ``label_sig``.
    """

    label_ref: complex
    label_sig: complex
    cross_K: float
    cross_phi: float
    norm_factor: float

    def _weights(self):
        n2 = self.norm_factor**2
        off = n2 * self.cross_K * cmath.exp(-1j * self.cross_phi)
        # (bra label, ket label, weight) for weight |ket><bra|
        r, s = self.label_ref, self.label_sig
        return ((r, r, n2), (s, s, n2), (s, r, off), (r, s, off.conjugate()))

    def trace(self) -> float:
        return sum((w * coherent_overlap(bra, ket) for bra, ket, w in self._weights()), 0j).real

    def parity_expectation(self) -> complex:
        """Tr(Pi rho) from coherent overlaps: Tr(Pi |k><b|) = <b|-k>."""
        return sum((w * coherent_overlap(bra, -ket) for bra, ket, w in self._weights()), 0j)

    def to_cat(self) -> CatState:
        """Pure phase cat; only valid when ``cross_K == 1``."""
        if not math.isclose(self.cross_K, 1.0, rel_tol=0, abs_tol=1e-15):
            raise ValueError("state is mixed (cross_K < 1)")
        n = self.norm_factor
        return make_cat(
            (self.label_ref, self.label_sig), (n, n * cmath.exp(1j * self.cross_phi)), n
        )


def prepare_cat(alpha0: complex) -> CatState:
    """N(|0> + |alpha0>)."""
    n = cat_normalization(alpha0)
    return make_cat((0j, alpha0), (n, n), n)


def evolve_and_displace(cat: CatState, cfg: ProtocolConfig) -> CatState:
    """Loss-free rotation by ``cfg.theta`` followed by D(-alpha0/2)."""
    if cat.components[0].label != 0:
        raise ValueError("first cat component must be the vacuum reference")
    if cfg.kappaT != 0:
        raise ValueError("evolve_and_displace is the loss-free path; use damp_and_displace")
    beta = -cfg.alpha0 / 2
    return cat.map_labels(lambda a: (rotate_label(a, cfg.theta), 1.0)).map_labels(
        lambda a: displace_label(a, beta)
    )


def damp_and_displace(cfg: ProtocolConfig) -> DecoheredFieldState:
    if cfg.kappaT < 0:
        raise ValueError("kappaT must be >= 0")
    a0 = cfg.alpha0
    D = cfg.D
    shrink = math.exp(-cfg.kappaT / 2)
    decayed = rotate_label(a0, cfg.theta) * shrink
    beta = -a0 / 2
    label_sig, _ = displace_label(decayed, beta)
    # phase kept unwrapped
    phi = (beta * decayed.conjugate()).imag
    K = math.exp(-D * (1 - math.exp(-cfg.kappaT)) / 2)
    return DecoheredFieldState(
        label_ref=beta,
        label_sig=label_sig,
        cross_K=K,
        cross_phi=phi,
        norm_factor=cat_normalization(a0),
    )


def _signal_label(alpha0: complex, theta: float, kappaT: float) -> complex:
    # alpha0' (kappaT = 0) or alpha0'' : alpha0 (2 e^{i theta - kappaT/2} - 1)
    return alpha0 * (2 * cmath.exp(1j * theta - kappaT / 2) - 1)


def _cross_phase(D, theta, kappaT, mode):
    if mode == "paper_literal":
        return D * theta / 2, D / 2
    s = math.exp(-kappaT / 2)
    return D * s * math.sin(theta) / 2, D * s * math.cos(theta) / 2


def _pg_and_slope(alpha0: complex, theta: float, kappaT: float, mode: str):
    """P_g and dP_g/dtheta from the closed-form readout expression."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "paper_literal" and kappaT != 0:
        raise ValueError("paper_literal mode is defined only for kappaT = 0")
    alpha0 = complex(alpha0)
    D = abs(alpha0) ** 2
    n2 = cat_normalization(alpha0) ** 2
    K = math.exp(-D * (1 - math.exp(-kappaT)) / 2)
    sig = _signal_label(alpha0, theta, kappaT)
    Ds = abs(sig) ** 2
    phi, dphi = _cross_phase(D, theta, kappaT, mode)

    z = sig * alpha0.conjugate() / 4
    # -(D + Ds)/8 -+ z rewritten as -|alpha0 +- sig|^2/8 -+ i Im(z): no overflow, no cancellation
    em = cmath.exp(-abs(alpha0 + sig) ** 2 / 8 - 1j * z.imag)
    ep = cmath.exp(-abs(alpha0 - sig) ** 2 / 8 + 1j * z.imag)
    rot = cmath.exp(1j * phi)
    pg = n2 * (1 - (math.exp(-D / 2) + math.exp(-Ds / 2)) / 2 + K * (rot * (em - ep)).real)

    dsig = 2j * alpha0 * math.exp(-kappaT / 2) * cmath.exp(1j * theta)
    dDs = 2 * (sig.conjugate() * dsig).real
    dz = dsig * alpha0.conjugate() / 4
    dem = em * (-dDs / 8 - dz)
    dep = ep * (-dDs / 8 + dz)
    slope = n2 * (
        math.exp(-Ds / 2) * dDs / 4
        + K * (rot * (1j * dphi * (em - ep) + dem - dep)).real
    )
    return pg, slope


def ramsey_pg_ideal(alpha0: complex, theta: float, mode: str = "exact") -> float:
    """Loss-free ground-state population after the Ramsey sequence."""
    return _pg_and_slope(alpha0, theta, 0.0, mode)[0]


def ramsey_pg_damped(cfg: ProtocolConfig) -> float:
    """Ground-state population with photon loss during the rotation window."""
    if cfg.kappaT < 0:
        raise ValueError("kappaT must be >= 0")
    return _pg_and_slope(cfg.alpha0, cfg.theta, cfg.kappaT, "exact")[0]


def pg_approx_ideal(D: float, theta: float) -> float:
    return (1 - math.cos(D * theta)) / 2


def pg_approx_damped(D: float, theta: float, kappaT: float) -> float:
    return (1 - math.exp(-D * kappaT / 2) * math.cos(D * theta)) / 2


def bias_point(D: float) -> float:
    """Operating angle pi/(2D) where the approximate fringe has maximal slope."""
    if not D > 0:
        raise ValueError(f"D must be > 0, got {D}")
    return math.pi / (2 * D)


def _ratio(pg: float, slope: float) -> float:
    var = pg * (1 - pg)
    if var < DEGENERATE_VARIANCE:
        raise DegenerateBias(f"P_g = {pg!r}: P_g(1-P_g) = {var:.3e} too small, R undefined")
    return abs(slope) / math.sqrt(var)


def snr(
    cfg: ProtocolConfig,
    derivative: str = "analytic",
    h: float | None = None,
    mode: str = "exact",
) -> float:
    """R = |dP_g/dtheta| / sqrt(P_g (1 - P_g)) at ``cfg.theta``.

    ``derivative="central_difference"`` uses steps h and h/2 (default
    h = 1e-6/D) and returns the Richardson-extrapolated slope; a RuntimeWarning
    is emitted when the two estimates disagree by more than 1e-6 relative.
    """
    if derivative not in DERIVATIVES:
        raise ValueError(f"derivative must be one of {DERIVATIVES}, got {derivative!r}")
    pg, slope = _pg_and_slope(cfg.alpha0, cfg.theta, cfg.kappaT, mode)
    if derivative == "central_difference":
        if h is None:
            h = 1e-6 / max(cfg.D, 1.0)
        f = lambda t: _pg_and_slope(cfg.alpha0, t, cfg.kappaT, mode)[0]
        th = cfg.theta
        d1 = (f(th + h) - f(th - h)) / (2 * h)
        d2 = (f(th + h / 2) - f(th - h / 2)) / h
        slope = (4 * d2 - d1) / 3
        if abs(slope - d2) > 1e-6 * abs(slope) + 1e-12:
            warnings.warn(
                f"central difference not converged at h={h:g}: {d1!r} vs {d2!r}",
                RuntimeWarning,
                stacklevel=2,
            )
    return _ratio(pg, slope)


def snr_at_bias(D: float, kappaT: float = 0.0, **kwargs) -> float:
    return snr(ProtocolConfig.from_angles(D=D, theta=bias_point(D), kappaT=kappaT), **kwargs)
