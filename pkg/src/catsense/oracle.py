"""Brute-force truncated-Fock-space simulator of the Ramsey protocol.

Independent of the closed forms in :mod:`catsense.analytic`: states are dense
amplitude vectors, gates are dense matrices, and photon loss is integrated from
the master equation

    d rho/dt = -i[eps a^dag a, rho] + kappa (a rho a^dag - {a^dag a, rho}/2)

with fixed-step RK4 and a step-halving convergence check. Qubit index 0 is
|g>, index 1 is |e>; the qubit always starts in |g>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from catsense.analytic import DecoheredFieldState, ProtocolConfig, _ratio
from catsense.errors import InvariantViolation, ResourceLimit, StepSizeFailure, TruncationTooSmall
from catsense.phase_space import cat_normalization

DEFAULT_TAIL_TOL = 1e-14
DEFAULT_CEILING = 400
COHERENT_TAIL_LIMIT = 1e-12
UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
CUTOFF_MARGIN = 8

SIGMA_Y = np.array([[0, -1j], [1j, 0]])  # i|e><g| - i|g><e| in (g, e) order
HALF_PI_PULSE = scipy.linalg.expm(-1j * np.pi * SIGMA_Y / 4)


# -- truncation ---------------------------------------------------------------


def _poisson_tails(mean: float, n_max: int) -> np.ndarray:
    """tails[n] = P(X > n) for X ~ Poisson(mean), n = 0..n_max."""
    upper = n_max + 60 + int(10 * math.sqrt(mean + 1))
    k = np.arange(upper + 1)
    if mean == 0:
        logp = np.where(k == 0, 0.0, -np.inf)
    else:
        logp = -mean + k * math.log(mean) - gammaln(k + 1)
    p = np.exp(logp)
    # reverse cumsum from the far tail keeps small tails accurate
    tail_incl = np.cumsum(p[::-1])[::-1]
    return np.append(tail_incl[1:], 0.0)[: n_max + 1]


def poisson_tail(mean: float, n: int) -> float:
    return float(_poisson_tails(mean, n)[n])


def truncation_bound(alpha_max: float, tail_tol: float = DEFAULT_TAIL_TOL, ceiling: int = DEFAULT_CEILING) -> int:
    """Smallest cutoff N (at least 4) whose Poisson tail beyond N is below ``tail_tol``."""
    if alpha_max < 0:
        raise ValueError("alpha_max must be >= 0")
    if not 0 < tail_tol < 1:
        raise ValueError("tail_tol must lie in (0, 1)")
    mean = float(alpha_max) ** 2
    search = max(ceiling, int(mean + 12 * math.sqrt(mean) + 20))
    tails = _poisson_tails(mean, search)
    ok = np.nonzero(tails < tail_tol)[0]
    n = max(4, int(ok[0])) if ok.size else search + 1
    if n > ceiling:
        raise ResourceLimit(f"cutoff {n} for |alpha|^2 = {mean:g} exceeds ceiling {ceiling}")
    return n


# -- states and operators -----------------------------------------------------


def coherent_vector(alpha: complex, n_trunc: int) -> np.ndarray:
    """Amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..n_trunc (not renormalized)."""
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    tail = poisson_tail(mean, n_trunc)
    if tail >= COHERENT_TAIL_LIMIT:
        raise TruncationTooSmall(f"n_trunc={n_trunc} leaves tail {tail:.2e} for |alpha|^2={mean:g}")
    n = np.arange(n_trunc + 1)
    if alpha == 0:
        return (n == 0).astype(complex)
    logmag = -mean / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def cat_vector(alpha0: complex, n_trunc: int) -> np.ndarray:
    return cat_normalization(alpha0) * (coherent_vector(0, n_trunc) + coherent_vector(alpha0, n_trunc))


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray
    kind: str

    @property
    def n_trunc(self) -> int:
        return self.matrix.shape[0] - 1

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))

    def check(self) -> "FockOperator":
        if self.kind == "number":
            if np.any(self.matrix != np.diag(np.diag(self.matrix))):
                raise InvariantViolation("number operator not diagonal")
        elif self.unitarity_defect() > UNITARY_TOL:
            raise InvariantViolation(f"{self.kind} operator not unitary: {self.unitarity_defect():.2e}")
        return self

    def __matmul__(self, other):
        return self.matrix @ other


def annihilation_matrix(n_trunc: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_trunc + 1)), 1).astype(complex)


def number_matrix(n_trunc: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(n_trunc + 1)).astype(complex), "number").check()


def parity_matrix(n_trunc: int) -> FockOperator:
    return FockOperator(np.diag((-1.0) ** np.arange(n_trunc + 1)).astype(complex), "parity").check()


def rotation_matrix(theta: float, n_trunc: int) -> FockOperator:
    """exp(i theta a^dag a): |a> -> |a e^{i theta}>."""
    return FockOperator(np.diag(np.exp(1j * theta * np.arange(n_trunc + 1))), "rotation").check()


def displacement_matrix(beta: complex, n_trunc: int) -> FockOperator:
    """expm(beta a^dag - conj(beta) a) on the truncated space."""
    beta = complex(beta)
    if truncation_bound(abs(beta), COHERENT_TAIL_LIMIT, ceiling=max(DEFAULT_CEILING, n_trunc)) > n_trunc:
        raise TruncationTooSmall(f"n_trunc={n_trunc} too small for displacement by |beta|={abs(beta):.3g}")
    a = annihilation_matrix(n_trunc)
    gen = beta * a.conj().T - beta.conjugate() * a
    return FockOperator(scipy.linalg.expm(gen), "displacement").check()


@dataclass(frozen=True)
class DispersiveGateSpec:
    """H_I = -chi a^dag a |e><e| applied for ``gate_time = pi/chi``."""

    chi: float = 1.0

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError("chi must be > 0")

    @property
    def gate_time(self) -> float:
        return math.pi / self.chi

    def excited_branch_unitary(self, n_trunc: int) -> FockOperator:
        n = np.arange(n_trunc + 1)
        return FockOperator(np.diag(np.exp(1j * self.chi * self.gate_time * n)), "parity").check()


def sequence_cutoff(alpha0: complex, theta: float, kappaT: float = 0.0) -> int:
    """Cutoff covering every coherent amplitude met along the sequence."""
    alpha0 = complex(alpha0)
    amax = max(abs(alpha0), abs(alpha0 * (2 * np.exp(1j * theta - kappaT / 2) - 1)) / 2)
    return truncation_bound(amax) + CUTOFF_MARGIN


# -- hybrid qubit-field states ------------------------------------------------


@dataclass
class HybridState:
    """|g> (x) g + |e> (x) e."""

    g: np.ndarray
    e: np.ndarray

    def norm2(self) -> float:
        return float(np.vdot(self.g, self.g).real + np.vdot(self.e, self.e).real)

    def pulse(self) -> "HybridState":
        u = HALF_PI_PULSE
        return HybridState(u[0, 0] * self.g + u[0, 1] * self.e, u[1, 0] * self.g + u[1, 1] * self.e)

    def conditional(self, op: FockOperator) -> "HybridState":
        return HybridState(self.g, op @ self.e)

    def check(self, ref_norm2: float) -> "HybridState":
        if abs(self.norm2() - ref_norm2) > UNITARY_TOL:
            raise InvariantViolation(f"hybrid norm drifted to {self.norm2()!r}")
        return self


@dataclass
class HybridDensity:
    """Block density operator sum_{q,r} |q><r| (x) blocks[q][r]."""

    gg: np.ndarray
    ge: np.ndarray
    eg: np.ndarray
    ee: np.ndarray

    @classmethod
    def ground(cls, rho: np.ndarray) -> "HybridDensity":
        z = np.zeros_like(rho)
        return cls(rho, z, z.copy(), z.copy())

    def full(self) -> np.ndarray:
        return np.block([[self.gg, self.ge], [self.eg, self.ee]])

    def pulse(self) -> "HybridDensity":
        u = HALF_PI_PULSE
        b = [[self.gg, self.ge], [self.eg, self.ee]]
        out = [[sum(u[q, a] * b[a][c] * np.conj(u[r, c]) for a in range(2) for c in range(2)) for r in range(2)] for q in range(2)]
        return HybridDensity(out[0][0], out[0][1], out[1][0], out[1][1])

    def conditional(self, op: FockOperator) -> "HybridDensity":
        m = op.matrix
        return HybridDensity(self.gg, self.ge @ m.conj().T, m @ self.eg, m @ self.ee @ m.conj().T)

    def check(self, ref_trace: float) -> "HybridDensity":
        check_density(self.full(), ref_trace)
        return self


def check_density(rho: np.ndarray, ref_trace: float = 1.0, psd: bool = True) -> None:
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITIAN_TOL:
        raise InvariantViolation(f"density not Hermitian: {herm:.2e}")
    tr = np.trace(rho)
    if abs(tr - ref_trace) > TRACE_TOL:
        raise InvariantViolation(f"trace {tr!r} differs from {ref_trace!r}")
    if psd:
        lo = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
        if lo < -PSD_TOL:
            raise InvariantViolation(f"density has eigenvalue {lo:.2e}")


def _conditional_gate(gate: str, n_trunc: int, chi: float) -> FockOperator:
    if gate == "parity":
        return parity_matrix(n_trunc)
    if gate == "dispersive":
        return DispersiveGateSpec(chi).excited_branch_unitary(n_trunc)
    raise ValueError(f"gate must be 'parity' or 'dispersive', got {gate!r}")


# -- loss-free sequence -------------------------------------------------------


def ideal_output_state(alpha0: complex, theta: float, n_trunc: int | None = None, gate: str = "parity", chi: float = 1.0) -> HybridState:
    """Hybrid state at the output of the loss-free Ramsey sequence."""
    alpha0 = complex(alpha0)
    if n_trunc is None:
        n_trunc = sequence_cutoff(alpha0, theta)
    field_ = cat_vector(alpha0, n_trunc)
    field_ = rotation_matrix(theta, n_trunc) @ field_
    field_ = displacement_matrix(-alpha0 / 2, n_trunc) @ field_
    psi = HybridState(field_, np.zeros_like(field_))
    ref = psi.norm2()
    cond = _conditional_gate(gate, n_trunc, chi)
    psi = psi.pulse().check(ref)
    psi = psi.conditional(cond).check(ref)
    return psi.pulse().check(ref)


def run_ideal_sequence(alpha0: complex, theta: float, n_trunc: int | None = None, gate: str = "parity", chi: float = 1.0) -> float:
    """P_g: squared norm of the |g> branch after the loss-free sequence."""
    psi = ideal_output_state(alpha0, theta, n_trunc, gate, chi)
    return float(np.vdot(psi.g, psi.g).real)


# -- Lindblad integration -----------------------------------------------------


@dataclass(frozen=True)
class StepControl:
    """Fixed-step RK4 settings.

    ``n_steps=None`` picks the step so that h times the generator scale is
    ``h_lambda``. With ``check`` on, each run is repeated at half the step; if
    any entry moves by more than ``tol`` the step is halved again, up to
    ``max_doublings`` times, then :class:`StepSizeFailure` is raised.
    """

    n_steps: int | None = None
    check: bool = True
    tol: float = 1e-8
    max_doublings: int = 3
    h_lambda: float = 0.05
    min_steps: int = 16


def lindblad_rhs(rho: np.ndarray, epsilon: float, kappa: float) -> np.ndarray:
    n = np.arange(rho.shape[0])
    out = -1j * epsilon * (n[:, None] - n[None, :]) * rho
    if kappa:
        sq = np.sqrt(n[1:])
        jump = np.zeros_like(rho)
        # (a rho a^dag)[m, k] = sqrt(m+1) sqrt(k+1) rho[m+1, k+1]
        jump[:-1, :-1] = sq[:, None] * sq[None, :] * rho[1:, 1:]
        out += kappa * (jump - 0.5 * (n[:, None] + n[None, :]) * rho)
    return out


def _rk4(rho, epsilon, kappa, T, n_steps, on_step, ref_trace):
    h = T / n_steps
    f = lambda r: lindblad_rhs(r, epsilon, kappa)
    for i in range(n_steps):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        tr_dev = abs(np.trace(rho) - ref_trace)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        if tr_dev > TRACE_TOL or herm > HERMITIAN_TOL:
            raise InvariantViolation(f"step {i}: trace drift {tr_dev:.2e}, hermiticity {herm:.2e}")
        if on_step is not None:
            on_step((i + 1) * h, rho)
    return rho


def default_steps(n_trunc: int, epsilon: float, kappa: float, T: float, ctrl: StepControl) -> int:
    scale = T * (abs(epsilon) + kappa) * n_trunc
    return max(ctrl.min_steps, math.ceil(scale / ctrl.h_lambda))


def lindblad_evolve(
    rho: np.ndarray,
    epsilon: float,
    kappa: float,
    T: float,
    step_control: StepControl | None = None,
    on_step: Callable[[float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Integrate single-mode rotation plus photon loss for time T.

    ``on_step(t, rho)`` is called after every RK4 step of every pass.
    """
    ctrl = step_control or StepControl()
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    rho = np.asarray(rho, dtype=complex)
    ref_trace = complex(np.trace(rho))
    if abs(ref_trace - 1) > TRACE_TOL:
        raise ValueError(f"input trace {ref_trace!r} is not 1")
    check_density(rho, ref_trace, psd=False)
    if T == 0:
        return rho.copy()
    n_trunc = rho.shape[0] - 1
    n_steps = ctrl.n_steps or default_steps(n_trunc, epsilon, kappa, T, ctrl)
    result = _rk4(rho, epsilon, kappa, T, n_steps, on_step, ref_trace)
    if ctrl.check:
        for _ in range(ctrl.max_doublings + 1):
            n_steps *= 2
            finer = _rk4(rho, epsilon, kappa, T, n_steps, on_step, ref_trace)
            change = float(np.max(np.abs(finer - result)))
            result = finer
            if change <= ctrl.tol:
                break
        else:
            raise StepSizeFailure(f"step halving still changes rho by {change:.2e} at {n_steps} steps")
    check_density(result, ref_trace)
    return result


# -- lossy sequence -----------------------------------------------------------


def damped_cutoff(cfg: ProtocolConfig) -> int:
    return sequence_cutoff(cfg.alpha0, cfg.theta, cfg.kappaT)


def displaced_field_after_loss(cfg: ProtocolConfig, n_trunc: int | None = None, step_control=None, on_step=None) -> np.ndarray:
    """Field density after lossy free evolution and D(-alpha0/2)."""
    if n_trunc is None:
        n_trunc = damped_cutoff(cfg)
    psi = cat_vector(cfg.alpha0, n_trunc)
    rho = np.outer(psi, psi.conj())
    rho = rho / np.trace(rho).real
    rho = lindblad_evolve(rho, cfg.epsilon, cfg.kappa, cfg.T, step_control, on_step)
    disp = displacement_matrix(-cfg.alpha0 / 2, n_trunc).matrix
    return disp @ rho @ disp.conj().T


def run_damped_sequence(
    cfg: ProtocolConfig,
    n_trunc: int | None = None,
    step_control: StepControl | None = None,
    gate: str = "parity",
    chi: float = 1.0,
    on_step=None,
) -> float:
    """P_g = Tr <g|rho_out|g> with photon loss during the rotation window only."""
    if n_trunc is None:
        n_trunc = damped_cutoff(cfg)
    rho = displaced_field_after_loss(cfg, n_trunc, step_control, on_step)
    state = HybridDensity.ground(rho)
    ref = complex(np.trace(state.full()))
    cond = _conditional_gate(gate, n_trunc, chi)
    state = state.pulse().check(ref)
    state = state.conditional(cond).check(ref)
    state = state.pulse().check(ref)
    return float(np.trace(state.gg).real)


def decohered_field_matrix(state: DecoheredFieldState, n_trunc: int) -> np.ndarray:
    """Fock-basis matrix of the closed-form decohered field state."""
    r = coherent_vector(state.label_ref, n_trunc)
    s = coherent_vector(state.label_sig, n_trunc)
    n2 = state.norm_factor**2
    off = n2 * state.cross_K * np.exp(-1j * state.cross_phi) * np.outer(r, s.conj())
    return n2 * (np.outer(r, r.conj()) + np.outer(s, s.conj())) + off + off.conj().T


def oracle_snr(cfg: ProtocolConfig, h: float | None = None, n_trunc: int | None = None) -> float:
    """R from oracle P_g with a Richardson-extrapolated central difference."""
    if h is None:
        h = 1e-3 / max(cfg.D, 1.0)
    if n_trunc is None:
        n_trunc = max(damped_cutoff(cfg.with_theta(cfg.theta + h)), damped_cutoff(cfg.with_theta(cfg.theta - h)))
    f = lambda t: run_damped_sequence(cfg.with_theta(t), n_trunc)
    th = cfg.theta
    d1 = (f(th + h) - f(th - h)) / (2 * h)
    d2 = (f(th + h / 2) - f(th - h / 2)) / h
    pg = f(th)
    return _ratio(pg, (4 * d2 - d1) / 3)
