"""Dense state-vector simulation of the amplitude-estimation registers.

Qubit ordering, most significant first::

    [phase register (QPE only)] [index register] [payoff scratch] [ancilla]

so the ancilla is the lowest bit of the flat basis index and ``amps[1::2]``
are exactly the ancilla-``|1>`` amplitudes. Operations named ``apply_*``
mutate the state in place and return it.

The Grover iterate is ``Q = U V U V`` with ``V = I - 2 I (x) |1><1|`` and
``U = I - 2 |chi><chi|``. On the plane spanned by ``chi`` and ``V chi`` it is
a rotation whose eigenphases ``+-theta`` satisfy ``1 - 2 mu = cos(theta / 2)``;
``theta / 2`` is the angle between ``chi`` and ``V chi``. The half iterate
``G = -U V`` (one ``U`` and one ``V``) has eigenphases ``+-theta / 2`` and
``G @ G == Q``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distribution import DiscreteDist, grover_rudolph_amplitudes, level_probs, split_angles
from .errors import DomainError, ResourceError
from .payoff import QuantizedPayoff

MAX_QUBITS = 24


def check_qubits(total: int, cap: int = MAX_QUBITS) -> None:
    if total > cap:
        raise ResourceError(f"{total} qubits exceed the configured cap of {cap}")


@dataclass(frozen=True)
class RegisterLayout:
    index_qubits: int
    payoff_scratch_qubits: int = 0
    phase_qubits: int = 0

    @property
    def total_qubits(self) -> int:
        return self.phase_qubits + self.index_qubits + self.payoff_scratch_qubits + 1

    @property
    def dimension(self) -> int:
        return 1 << self.total_qubits

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (1 << self.phase_qubits, 1 << self.index_qubits, 1 << self.payoff_scratch_qubits, 2)


@dataclass
class QuantumState:
    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.amps.shape != (self.layout.dimension,):
            raise DomainError("amplitude vector does not match the register layout")

    @classmethod
    def zeros(cls, layout: RegisterLayout, cap: int = MAX_QUBITS) -> "QuantumState":
        check_qubits(layout.total_qubits, cap)
        amps = np.zeros(layout.dimension, dtype=complex)
        amps[0] = 1.0
        return cls(layout, amps)

    def copy(self) -> "QuantumState":
        return QuantumState(self.layout, self.amps.copy())

    def tensor(self) -> np.ndarray:
        """View shaped ``(phase, index, scratch, ancilla)``."""
        return self.amps.reshape(self.layout.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def to_csv(self, path: str | Path, threshold: float = 0.0) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["basis_index", "real", "imag"])
            for i, a in enumerate(self.amps):
                if abs(a) > threshold:
                    w.writerow([i, repr(float(a.real)), repr(float(a.imag))])


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-12) -> bool:
    """True when ``a == exp(i phi) b`` componentwise within ``atol`` for some phi."""
    a, b = np.asarray(a), np.asarray(b)
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return bool(np.max(np.abs(a - phase * b)) <= atol)


def _ancilla_rotation(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.sqrt(1.0 - values), np.sqrt(values)


def chi_from_amplitudes(index_amps: np.ndarray, values: np.ndarray) -> QuantumState:
    """``sum_j a_j |j> (sqrt(1 - v_j)|0> + sqrt(v_j)|1>)`` for an index register of any size."""
    index_amps = np.asarray(index_amps)
    values = np.asarray(values, dtype=float)
    if index_amps.shape != values.shape:
        raise DomainError("payoff table and distribution live on different grids")
    if np.any(values < 0) or np.any(values > 1):
        raise DomainError("oracle values must lie in [0, 1]")
    n = int(round(math.log2(index_amps.size)))
    if (1 << n) != index_amps.size:
        raise DomainError("index register size must be a power of two")
    layout = RegisterLayout(index_qubits=n)
    check_qubits(layout.total_qubits)
    c, s = _ancilla_rotation(values)
    amps = np.empty(layout.dimension, dtype=complex)
    amps[0::2] = index_amps * c
    amps[1::2] = index_amps * s
    return QuantumState(layout, amps)


def _same_grid(dist: DiscreteDist, payoff: QuantizedPayoff) -> None:
    if payoff.size != dist.probs.size:
        raise DomainError("payoff table and distribution live on different grids")
    if payoff.grid is not None and payoff.grid != dist.grid:
        raise DomainError("payoff table and distribution live on different grids")


def prepare_chi(dist: DiscreteDist, payoff: QuantizedPayoff) -> QuantumState:
    """Load the distribution and rotate the payoff onto the ancilla."""
    _same_grid(dist, payoff)
    return chi_from_amplitudes(grover_rudolph_amplitudes(dist), payoff.values)


def exact_mu(state: QuantumState) -> float:
    """Probability of reading the ancilla as ``|1>``."""
    return float(np.sum(np.abs(state.amps[1::2]) ** 2))


def apply_V(state: QuantumState) -> QuantumState:
    state.amps[1::2] *= -1
    return state


def apply_Z(state: QuantumState) -> QuantumState:
    """Reflection about the all-zero basis state."""
    state.amps[0] *= -1
    return state


def _check_pair(state: QuantumState, chi: QuantumState) -> None:
    if state.layout != chi.layout:
        raise DomainError("state and chi have different register layouts")


def apply_U(state: QuantumState, chi: QuantumState) -> QuantumState:
    """``psi -> psi - 2 <chi|psi> chi``."""
    _check_pair(state, chi)
    state.amps -= 2.0 * np.vdot(chi.amps, state.amps) * chi.amps
    return state


def apply_Q(state: QuantumState, chi: QuantumState) -> QuantumState:
    """``Q = U V U V``: rightmost factor acts first."""
    _check_pair(state, chi)
    for _ in range(2):
        apply_V(state)
        apply_U(state, chi)
    return state


def mu_to_theta(mu: float) -> float:
    """``theta = 2 arccos(1 - 2 mu)`` in ``[0, 2 pi]``."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"mu must lie in [0, 1], got {mu!r}")
    return 2.0 * math.acos(1.0 - 2.0 * mu)


def theta_to_mu(theta: float) -> float:
    if not 0.0 <= theta <= 2.0 * math.pi:
        raise DomainError(f"theta must lie in [0, 2 pi], got {theta!r}")
    return 0.5 * (1.0 - math.cos(theta / 2.0))


# ---------------------------------------------------------------------------
# circuit route: F = R (A x I) applied to arbitrary states


@dataclass
class ChiCircuit:
    """Unitary ``F`` with ``F|0...0> = chi``, built gate-layer by gate-layer.

    ``A`` is the Grover-Rudolph cascade (level ``m`` rotates index qubit
    ``m`` conditioned on the ``m`` more significant qubits) and ``R`` rotates
    the ancilla conditioned on the index. Used to cross-check the projector
    form of ``U`` against ``F Z F^dagger``.
    """

    level_angles: list[np.ndarray]
    values: np.ndarray

    @classmethod
    def build(cls, dist: DiscreteDist, payoff: QuantizedPayoff) -> "ChiCircuit":
        _same_grid(dist, payoff)
        n = dist.grid.qubits
        angles = []
        for m in range(n):
            children = level_probs(dist, m + 1)
            angles.append(split_angles(children[0::2], children[1::2]))
        return cls(level_angles=angles, values=np.asarray(payoff.values, dtype=float))

    @property
    def index_qubits(self) -> int:
        return len(self.level_angles)

    def _cascade(self, amps: np.ndarray, inverse: bool) -> np.ndarray:
        n = self.index_qubits
        t = amps.reshape(1 << n, 2).copy()
        levels = range(n - 1, -1, -1) if inverse else range(n)
        for m in levels:
            view = t.reshape(1 << m, 2, 1 << (n - m - 1), 2)
            c = np.cos(self.level_angles[m])[:, None, None]
            s = np.sin(self.level_angles[m])[:, None, None]
            if inverse:
                s = -s
            a0, a1 = view[:, 0].copy(), view[:, 1].copy()
            view[:, 0] = c * a0 - s * a1
            view[:, 1] = s * a0 + c * a1
        return t.reshape(-1)

    def _rotate(self, amps: np.ndarray, inverse: bool) -> np.ndarray:
        c, s = _ancilla_rotation(self.values)
        if inverse:
            s = -s
        a0, a1 = amps[0::2].copy(), amps[1::2].copy()
        out = np.empty_like(amps)
        out[0::2] = c * a0 - s * a1
        out[1::2] = s * a0 + c * a1
        return out

    def apply_F(self, state: QuantumState) -> QuantumState:
        state.amps[:] = self._rotate(self._cascade(state.amps, inverse=False), inverse=False)
        return state

    def apply_F_dagger(self, state: QuantumState) -> QuantumState:
        state.amps[:] = self._cascade(self._rotate(state.amps, inverse=True), inverse=True)
        return state

    def chi(self) -> QuantumState:
        return self.apply_F(QuantumState.zeros(RegisterLayout(self.index_qubits)))


def apply_U_circuit(state: QuantumState, circuit: ChiCircuit) -> QuantumState:
    """``U = F Z F^dagger`` evaluated gate by gate."""
    circuit.apply_F_dagger(state)
    apply_Z(state)
    return circuit.apply_F(state)


# ---------------------------------------------------------------------------
# payoff register route for the ancilla rotation


def _xor_scratch(t: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """``|j>|s> -> |j>|s xor code_j>`` on a ``(phase, index, scratch, ancilla)`` tensor."""
    n_scratch = t.shape[2]
    target = np.arange(n_scratch)[None, :] ^ codes[:, None]
    out = np.empty_like(t)
    out[:, np.arange(t.shape[1])[:, None], target, :] = t
    return out


def apply_R_with_register(state: QuantumState, payoff: QuantizedPayoff) -> QuantumState:
    """Rotate the ancilla by way of an explicit payoff register.

    Computes ``|j>|0> -> |j>|code_j>``, rotates the ancilla conditioned on the
    register contents, then uncomputes the register with the same XOR.
    """
    if payoff.fp is None or payoff.codes is None:
        raise DomainError("the register route needs a quantized payoff")
    lay = state.layout
    if payoff.size != 1 << lay.index_qubits:
        raise DomainError("payoff table and index register sizes differ")
    if (1 << lay.payoff_scratch_qubits) <= int(payoff.codes.max(initial=0)):
        raise DomainError("scratch register too narrow for the payoff codes")
    t = state.tensor()
    outside = float(np.sum(np.abs(t[:, :, 1:, :]) ** 2))
    if outside > 1e-12:
        raise DomainError("payoff scratch register must start in |0...0>")

    codes = np.asarray(payoff.codes, dtype=np.int64)
    t = _xor_scratch(t, codes)
    reg_values = np.arange(t.shape[2]) / payoff.fp.denominator
    c, s = _ancilla_rotation(np.clip(reg_values, 0.0, 1.0))
    a0, a1 = t[..., 0].copy(), t[..., 1].copy()
    t[..., 0] = c * a0 - s * a1
    t[..., 1] = s * a0 + c * a1
    t = _xor_scratch(t, codes)
    state.amps[:] = t.reshape(-1)
    return state


def scratch_leakage(state: QuantumState) -> float:
    """Probability mass outside the zero-scratch subspace."""
    return float(np.sum(np.abs(state.tensor()[:, :, 1:, :]) ** 2))


def reduced_purity(state: QuantumState) -> float:
    """Purity of the (phase, index, ancilla) marginal after tracing out the scratch register."""
    t = state.tensor()
    m = np.moveaxis(t, 2, -1).reshape(-1, t.shape[2])
    gram = m.conj().T @ m
    return float(np.real(np.sum(np.abs(gram) ** 2)))


def drop_scratch(state: QuantumState) -> QuantumState:
    """Project onto scratch ``|0...0>`` and return the state without that register."""
    lay = state.layout
    t = state.tensor()[:, :, 0, :]
    out = RegisterLayout(lay.index_qubits, 0, lay.phase_qubits)
    return QuantumState(out, t.reshape(-1).copy())


# ---------------------------------------------------------------------------
# Grover iterate as an operator handle on batches of states


@dataclass
class GroverIterate:
    """Applies ``Q = U V U V`` (or the half iterate ``G = -U V``) to rows of a block.

    Counts every use of ``U`` and ``V`` so callers can audit resource use.
    """

    chi: QuantumState
    half: bool = False
    uses_u: int = field(default=0, init=False)
    uses_v: int = field(default=0, init=False)

    @property
    def dimension(self) -> int:
        return self.chi.amps.size

    def _uv(self, block: np.ndarray) -> np.ndarray:
        block[..., 1::2] *= -1
        chi = self.chi.amps
        block -= 2.0 * (block @ chi.conj())[..., None] * chi
        self.uses_u += 1
        self.uses_v += 1
        return block

    def apply(self, block: np.ndarray) -> np.ndarray:
        """In-place on a ``(rows, dim)`` or ``(dim,)`` array."""
        if self.half:
            self._uv(block)
            block *= -1
        else:
            self._uv(block)
            self._uv(block)
        return block

    def apply_power(self, block: np.ndarray, power: int) -> np.ndarray:
        for _ in range(power):
            self.apply(block)
        return block

    def reset_counts(self) -> None:
        self.uses_u = self.uses_v = 0


@dataclass(frozen=True)
class PlaneDiagnostics:
    """Geometry of ``Q`` restricted to span{chi, V chi}.

    ``theta`` is the canonical eigenphase (recovered from the oriented 2x2
    restriction, so ``theta_to_mu(theta) == mu``); ``half_angle`` is the
    angle between ``chi`` and ``V chi`` (``theta / 2``). ``phi`` is the phase
    of the ``chi_perp`` component of ``V chi`` in the chosen basis.
    """

    mu: float
    overlap: float
    half_angle: float
    theta: float
    eigenphases: tuple[float, float]
    phi: float
    closure_residual: float
    restricted: np.ndarray


def plane_diagnostics(chi: QuantumState) -> PlaneDiagnostics:
    """Restrict ``Q`` to span{chi, V chi} and read off its rotation angle."""
    e1 = chi.amps / np.linalg.norm(chi.amps)
    v_chi = e1.copy()
    v_chi[1::2] *= -1
    overlap = np.vdot(e1, v_chi)
    w = v_chi - overlap * e1
    w_norm = np.linalg.norm(w)
    mu = exact_mu(chi)
    if w_norm < 1e-14:
        # V chi = +-chi: the plane collapses and Q acts as the identity on chi
        theta = 0.0 if overlap.real > 0 else 2 * math.pi
        r = np.eye(2, dtype=complex)
        return PlaneDiagnostics(mu, float(overlap.real), theta / 2, theta, (0.0, 0.0), 0.0, 0.0, r)
    e2 = w / w_norm
    op = GroverIterate(QuantumState(chi.layout, e1.astype(complex)))
    basis = np.stack([e1, e2]).astype(complex)
    images = op.apply(basis.copy())
    r = basis.conj() @ images.T
    residual = float(np.max(np.linalg.norm(images - (r.T @ basis), axis=1)))
    alpha = math.atan2(r[1, 0].real, r[0, 0].real)
    theta = (-alpha) % (2 * math.pi)
    eig = np.angle(np.linalg.eigvals(r))
    return PlaneDiagnostics(
        mu=mu,
        overlap=float(overlap.real),
        half_angle=math.acos(max(-1.0, min(1.0, overlap.real))),
        theta=theta,
        eigenphases=tuple(sorted(float(e) for e in eig)),
        phi=float(np.angle(np.vdot(e2, v_chi))),
        closure_residual=residual,
        restricted=r,
    )
