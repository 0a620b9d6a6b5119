"""Channel models: memoryless laws, finite-state channels, quantum-state channels.

Three model families live here.

* ``Dmc``: a memoryless law W(y|x) as a row-stochastic matrix.
* ``ClassicalFsmc``: a finite-state channel with kernel
  ``W(s_next, y | s_prev, x)``, stored as ``kernel[s_prev, x, s_next, y]``.
* ``QuantumMemoryChannel``: per-use interaction of a transmit system with
  a persistent quantum memory, given by Kraus operators on the joint
  (state slow, transmit fast) space, input encodings, measurement
  operators on the transmit system, an optional inter-use unitary on the
  memory, and an initial memory state.

A ``QuantumMemoryChannel`` is compiled once into a ``TransferOperatorSet``:
for every input/output pair (x, y) a positive semidefinite matrix over
doubled memory indices that advances the doubled-state recursion by one
channel use.  Rows and columns of each transfer operator are indexed by
pairs (previous state, next state) with the previous index slow.  The set
must satisfy two conditions:

* each transfer operator is p.s.d. (as a matrix over the doubled index);
* summing over outputs and closing the next-state indices against each
  other returns the identity on the previous-state indices
  (trace consistency; this is what makes output probabilities normalize).

The classical kernel embeds exactly as the diagonal special case of a
transfer-operator set, which gives a cross-validation bridge between the
classical and quantum recursions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ModelValidationError
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_operator,
    expm_skew_hermitian,
    is_psd,
    unitarity_residue,
)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Default evolution generators for the quantum Gilbert-Elliott builders.
# These are repo-chosen reference values (any fixed Hermitian matrix
# defines a valid channel); the two-qubit one has four distinct
# eigenvalues so the inter-use evolution mixes all memory levels.
DEFAULT_SINGLE_QUBIT_H = PAULI_X
DEFAULT_TWO_QUBIT_H = np.array(
    [
        [0.9, 0.4 - 0.2j, 0.1 + 0.3j, 0.0],
        [0.4 + 0.2j, -0.6, 0.2j, 0.1],
        [0.1 - 0.3j, -0.2j, 0.3, 0.5 - 0.1j],
        [0.0, 0.1, 0.5 + 0.1j, -0.8],
    ],
    dtype=complex,
)


def _check_probability(p: float, name: str) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0) or not np.isfinite(p):
        raise ValueError(f"{name} must be a probability in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class Dmc:
    """Memoryless channel law; ``w[x, y]`` is the probability of y given x."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 2 or min(w.shape) < 1:
            raise ValueError(f"channel law must be a 2-D matrix, got shape {w.shape}")
        object.__setattr__(self, "w", w)

    @property
    def x_size(self) -> int:
        return self.w.shape[0]

    @property
    def y_size(self) -> int:
        return self.w.shape[1]


@dataclass(frozen=True)
class InputLaw:
    """Per-symbol input distribution of an i.i.d. input process."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("input law must be a 1-D probability vector")
        if p.min() < 0 or abs(p.sum() - 1.0) > DEFAULT_TOL.eps_trace:
            raise ValueError(
                f"input law must be a pmf (min {p.min():.3e}, sum {p.sum()!r})"
            )
        object.__setattr__(self, "p", p)

    @property
    def x_size(self) -> int:
        return self.p.size


def uniform_input(x_size: int = 2) -> InputLaw:
    return InputLaw(np.full(x_size, 1.0 / x_size))


@dataclass(frozen=True)
class ClassicalFsmc:
    """Finite-state channel, kernel indexed ``[s_prev, x, s_next, y]``."""

    kernel: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        p0 = np.asarray(self.initial, dtype=float)
        if k.ndim != 4 or k.shape[0] != k.shape[2]:
            raise ValueError(
                f"kernel must have shape (S, X, S, Y), got {k.shape}"
            )
        if p0.shape != (k.shape[0],):
            raise ValueError(
                f"initial state pmf has length {p0.shape}, expected ({k.shape[0]},)"
            )
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "initial", p0)

    @property
    def state_count(self) -> int:
        return self.kernel.shape[0]

    @property
    def x_size(self) -> int:
        return self.kernel.shape[1]

    @property
    def y_size(self) -> int:
        return self.kernel.shape[3]


@dataclass(frozen=True)
class QuantumMemoryChannel:
    """Quantum-memory channel specification before compilation.

    ``kraus`` operators act on the joint (state slow, transmit fast)
    space and must be square: the transmit system is measured in a space
    of the same dimension it is sent in.  ``encodings[x]`` is the density
    matrix Alice prepares for input symbol x, ``measurements[y]`` the
    measurement operator for outcome y, ``inter_use_unitary`` the memory
    evolution applied between uses, ``initial_state`` the memory state
    before the first use.
    """

    state_dim: int
    encodings: np.ndarray
    kraus: np.ndarray
    measurements: np.ndarray
    inter_use_unitary: np.ndarray
    initial_state: np.ndarray

    def __post_init__(self):
        enc = np.asarray(self.encodings, dtype=complex)
        kr = np.asarray(self.kraus, dtype=complex)
        meas = np.asarray(self.measurements, dtype=complex)
        u = np.asarray(self.inter_use_unitary, dtype=complex)
        rho0 = np.asarray(self.initial_state, dtype=complex)
        s = int(self.state_dim)
        if s < 1:
            raise ValueError("state_dim must be >= 1")
        if enc.ndim != 3 or enc.shape[1] != enc.shape[2]:
            raise ValueError(f"encodings must have shape (X, d, d), got {enc.shape}")
        d = enc.shape[1]
        if kr.ndim != 3 or kr.shape[1] != kr.shape[2]:
            raise ValueError(
                "kraus operators must be square (equal input and output "
                f"transmit dimensions are assumed), got shape {kr.shape}"
            )
        if kr.shape[1] != d * s:
            raise ValueError(
                f"kraus operators act on dimension {kr.shape[1]}, expected "
                f"transmit_dim * state_dim = {d * s}"
            )
        if meas.ndim != 3 or meas.shape[1:] != (d, d):
            raise ValueError(f"measurements must have shape (Y, {d}, {d}), got {meas.shape}")
        if u.shape != (s, s):
            raise ValueError(f"inter-use unitary must be {s}x{s}, got {u.shape}")
        if rho0.shape != (s, s):
            raise ValueError(f"initial state must be {s}x{s}, got {rho0.shape}")
        object.__setattr__(self, "encodings", enc)
        object.__setattr__(self, "kraus", kr)
        object.__setattr__(self, "measurements", meas)
        object.__setattr__(self, "inter_use_unitary", u)
        object.__setattr__(self, "initial_state", rho0)

    @property
    def transmit_dim(self) -> int:
        return self.encodings.shape[1]

    @property
    def x_size(self) -> int:
        return self.encodings.shape[0]

    @property
    def y_size(self) -> int:
        return self.measurements.shape[0]


@dataclass(frozen=True)
class TransferOperatorSet:
    """Compiled per-use transfer operators of a quantum-memory channel.

    ``operators[x, y]`` is the p.s.d. matrix over doubled memory indices,
    rows labelled (s_prev, s_next) with s_prev slow, columns the primed
    copy.  ``initial_state`` is the memory density matrix the recursion
    starts from.
    """

    operators: np.ndarray
    initial_state: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        rho0 = np.asarray(self.initial_state, dtype=complex)
        if ops.ndim != 4 or ops.shape[2] != ops.shape[3]:
            raise ValueError(f"operators must have shape (X, Y, S^2, S^2), got {ops.shape}")
        s = int(round(np.sqrt(ops.shape[2])))
        if s * s != ops.shape[2]:
            raise ValueError(f"operator dimension {ops.shape[2]} is not a perfect square")
        if rho0.shape != (s, s):
            raise ValueError(f"initial state must be {s}x{s}, got {rho0.shape}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "initial_state", rho0)

    @property
    def state_dim(self) -> int:
        return self.initial_state.shape[0]

    @property
    def x_size(self) -> int:
        return self.operators.shape[0]

    @property
    def y_size(self) -> int:
        return self.operators.shape[1]

    @cached_property
    def tensors(self) -> np.ndarray:
        """Six-axis view ``[x, y, s_prev, s_next, s'_prev, s'_next]``."""
        s = self.state_dim
        return self.operators.reshape(self.x_size, self.y_size, s, s, s, s)

    @cached_property
    def chain_operators(self) -> np.ndarray:
        """Chain layout ``[x, y, (s_prev, s'_prev), (s_next, s'_next)]``.

        Advances the doubled-state recursion by plain vector-matrix
        products: ``next_vec = vec @ chain_operators[x, y]`` where ``vec``
        is the row-major flattening of the doubled-state operator.
        """
        s = self.state_dim
        z = self.tensors.transpose(0, 1, 2, 4, 3, 5)
        return np.ascontiguousarray(z.reshape(self.x_size, self.y_size, s * s, s * s))


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_bsc(p: float) -> Dmc:
    """Binary symmetric channel with crossover probability p."""
    p = _check_probability(p, "crossover probability")
    return Dmc(np.array([[1.0 - p, p], [p, 1.0 - p]]))


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary pmf of a row-stochastic matrix; uniform when not unique."""
    t = np.asarray(transition, dtype=float)
    n = t.shape[0]
    w, v = np.linalg.eig(t.T)
    near_one = np.abs(w - 1.0) < 1e-9
    if near_one.sum() != 1:
        return np.full(n, 1.0 / n)
    vec = np.real(v[:, near_one.argmax()])
    vec = np.clip(vec, 0.0, None)
    if vec.sum() <= 0:
        return np.full(n, 1.0 / n)
    return vec / vec.sum()


def build_gilbert_elliott(
    p_g: float,
    p_b: float,
    transition: np.ndarray,
    initial: np.ndarray | None = None,
) -> ClassicalFsmc:
    """Two-state burst-noise channel: BSC(p_g) in the "good" state (index
    0), BSC(p_b) in the "bad" state (index 1).

    The state chain evolves independently of the input; the emitted bit
    is flipped with the probability of the *previous* state, i.e.
    ``kernel[s, x, t, y] = transition[s, t] * BSC(p_s)(y | x)``.
    ``initial`` defaults to the stationary distribution of ``transition``.
    """
    p_g = _check_probability(p_g, "p_g")
    p_b = _check_probability(p_b, "p_b")
    t = np.asarray(transition, dtype=float)
    if t.shape != (2, 2):
        raise ValueError(f"transition must be 2x2, got {t.shape}")
    if t.min() < 0 or np.abs(t.sum(axis=1) - 1.0).max() > DEFAULT_TOL.eps_trace:
        raise ValueError("transition rows must be pmfs")
    flip = np.array(
        [
            [[1.0 - p_g, p_g], [p_g, 1.0 - p_g]],
            [[1.0 - p_b, p_b], [p_b, 1.0 - p_b]],
        ]
    )  # (s, x, y)
    kernel = t[:, None, :, None] * flip[:, :, None, :]
    p0 = stationary_distribution(t) if initial is None else np.asarray(initial, dtype=float)
    return ClassicalFsmc(kernel, p0)


def fsmc_from_dmc(dmc: Dmc) -> ClassicalFsmc:
    """Embed a memoryless law as a single-state finite-state channel."""
    kernel = dmc.w[None, :, None, :]
    return ClassicalFsmc(kernel, np.array([1.0]))


def _quantum_ge_kraus(p_g: float, p_b: float) -> np.ndarray:
    """The two 4x4 interaction operators of the quantum Gilbert-Elliott
    channel on the joint (memory qubit slow, transmit qubit fast) space:
    identity-or-flip on the transmit qubit with amplitude selected by the
    memory level."""
    rg, rb = np.sqrt(1.0 - p_g), np.sqrt(1.0 - p_b)
    fg, fb = np.sqrt(p_g), np.sqrt(p_b)
    e0 = np.diag([rg, rg, rb, rb]).astype(complex)
    e1 = np.zeros((4, 4), dtype=complex)
    e1[0, 1] = e1[1, 0] = fg
    e1[2, 3] = e1[3, 2] = fb
    return np.stack([e0, e1])


def build_quantum_gilbert_elliott(
    p_g: float,
    p_b: float,
    h: np.ndarray | None = None,
    alpha: float = 0.0,
    initial_state: np.ndarray | None = None,
) -> QuantumMemoryChannel:
    """Quantum Gilbert-Elliott channel.

    Classical bits are encoded in the computational basis of a transmit
    qubit and measured in the same basis; the transmit qubit is flipped
    with amplitude sqrt(p_g) or sqrt(p_b) depending on the memory level;
    the memory evolves by exp(-i * alpha * h) between uses.

    ``h`` of dimension 2 gives the single-qubit-memory channel (default
    generator: Pauli-X).  ``h`` of dimension 4 gives the two-qubit-memory
    variant in which only the second (fast-index) memory qubit interacts
    with the transmit system while the evolution acts on both.
    ``initial_state`` defaults to the maximally mixed memory state.
    """
    p_g = _check_probability(p_g, "p_g")
    p_b = _check_probability(p_b, "p_b")
    gen = DEFAULT_SINGLE_QUBIT_H if h is None else as_operator(h, "evolution generator")
    if gen.shape[0] not in (2, 4):
        raise ValueError(
            f"evolution generator must be 2x2 or 4x4, got {gen.shape[0]}x{gen.shape[0]}"
        )
    kraus = _quantum_ge_kraus(p_g, p_b)
    state_dim = gen.shape[0]
    if state_dim == 4:
        kraus = np.stack([np.kron(np.eye(2), e) for e in kraus])
    unitary = expm_skew_hermitian(gen, alpha)
    if initial_state is None:
        rho0 = np.eye(state_dim, dtype=complex) / state_dim
    else:
        rho0 = as_operator(initial_state, "initial state")
    basis = np.stack(
        [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    )
    return QuantumMemoryChannel(
        state_dim=state_dim,
        encodings=basis,
        kraus=kraus,
        measurements=basis,
        inter_use_unitary=unitary,
        initial_state=rho0,
    )


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def compile_transfer_operators(
    ch: QuantumMemoryChannel, tol: Tolerance = DEFAULT_TOL
) -> TransferOperatorSet:
    """Close the per-use interaction into transfer operators.

    The inter-use unitary is folded into the interaction operators first
    (which preserves their completeness relation), then for every (x, y)
    the measurement, interaction, encoding and their conjugates are
    contracted over the transmit indices.  The compiled set is checked
    for positive semidefiniteness and trace consistency; violations
    raise ``ModelValidationError`` naming the condition and witness.
    """
    require_valid(ch, tol)
    d, s = ch.transmit_dim, ch.state_dim
    fold = np.kron(ch.inter_use_unitary, np.eye(d, dtype=complex))
    tilde = np.einsum("ab,kbc->kac", fold, ch.kraus)
    n_x, n_y = ch.x_size, ch.y_size
    ops = np.empty((n_x, n_y, s * s, s * s), dtype=complex)
    eye_s = np.eye(s, dtype=complex)
    for y in range(n_y):
        measured = np.einsum("ab,kbc->kac", np.kron(eye_s, ch.measurements[y]), tilde)
        f4 = measured.reshape(-1, s, d, s, d)
        for x in range(n_x):
            w4 = np.einsum("kucia,ab,kvcjb->iujv", f4, ch.encodings[x], f4.conj())
            ops[x, y] = w4.reshape(s * s, s * s)
    out = TransferOperatorSet(ops, ch.initial_state.copy())
    for x in range(n_x):
        for y in range(n_y):
            check = is_psd(ops[x, y], tol)
            if not check:
                raise ModelValidationError(
                    "transfer operator positive semidefiniteness",
                    check.witness,
                    f"input {x}, output {y}: {check.reason}",
                )
    _check_trace_consistency(out, tol)
    return out


def _check_trace_consistency(t: TransferOperatorSet, tol: Tolerance) -> None:
    s = t.state_dim
    eye = np.eye(s)
    for x in range(t.x_size):
        closure = np.einsum("yiuju->ij", t.tensors[x])
        resid = float(np.abs(closure - eye).max())
        if resid > tol.eps_trace:
            raise ModelValidationError(
                "transfer trace consistency", resid, f"input {x}"
            )


def embed_classical_as_quantum(f: ClassicalFsmc) -> TransferOperatorSet:
    """Diagonal transfer-operator set reproducing a classical kernel.

    The doubled-state recursion on the embedded set mirrors the classical
    forward recursion exactly (state operators stay diagonal and their
    diagonals are the classical state metrics).
    """
    require_valid(f)
    s, n_x, n_y = f.state_count, f.x_size, f.y_size
    ops = np.zeros((n_x, n_y, s * s, s * s), dtype=complex)
    for x in range(n_x):
        for y in range(n_y):
            ops[x, y] = np.diag(f.kernel[:, x, :, y].reshape(s * s))
    return TransferOperatorSet(ops, np.diag(f.initial).astype(complex))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    model_kind: str
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def summary(self) -> str:
        lines = [f"{self.model_kind}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            detail = f" ({c.detail})" if c.detail else ""
            lines.append(f"  [{mark}] {c.name}: witness {c.witness:.3e}{detail}")
        return "\n".join(lines)


def _pmf_checks(p: np.ndarray, name: str, tol: Tolerance) -> list[CheckResult]:
    lo = float(p.min())
    dev = float(abs(p.sum() - 1.0))
    return [
        CheckResult(f"{name} nonnegative", lo >= 0.0, lo),
        CheckResult(f"{name} sums to one", dev <= tol.eps_trace, dev),
    ]


def _density_checks(rho: np.ndarray, name: str, tol: Tolerance) -> list[CheckResult]:
    check = is_psd(rho, tol)
    dev = float(abs(np.trace(rho) - 1.0))
    return [
        CheckResult(f"{name} positive semidefinite", check.ok, check.witness, check.reason),
        CheckResult(f"{name} unit trace", dev <= tol.eps_trace, dev),
    ]


def validate(model, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    """Check every defining condition of a model; never raises.

    Returns a report with one pass/fail entry and numeric witness per
    condition.
    """
    if isinstance(model, Dmc):
        checks = []
        lo = float(model.w.min())
        checks.append(CheckResult("law entries nonnegative", lo >= 0.0, lo))
        dev = float(np.abs(model.w.sum(axis=1) - 1.0).max())
        checks.append(CheckResult("law rows sum to one", dev <= tol.eps_trace, dev))
        return ValidationReport("memoryless law", tuple(checks))

    if isinstance(model, InputLaw):
        return ValidationReport("input law", tuple(_pmf_checks(model.p, "input pmf", tol)))

    if isinstance(model, ClassicalFsmc):
        checks = []
        lo = float(model.kernel.min())
        checks.append(CheckResult("kernel entries nonnegative", lo >= 0.0, lo))
        sums = model.kernel.sum(axis=(2, 3))
        dev = float(np.abs(sums - 1.0).max())
        worst = np.unravel_index(np.abs(sums - 1.0).argmax(), sums.shape)
        checks.append(
            CheckResult(
                "kernel rows sum to one",
                dev <= tol.eps_trace,
                dev,
                f"worst at (state {worst[0]}, input {worst[1]})",
            )
        )
        checks.extend(_pmf_checks(model.initial, "initial state pmf", tol))
        return ValidationReport("classical finite-state channel", tuple(checks))

    if isinstance(model, QuantumMemoryChannel):
        checks = []
        for x in range(model.x_size):
            checks.extend(_density_checks(model.encodings[x], f"encoding {x}", tol))
        gram = np.einsum("kba,kbc->ac", model.kraus.conj(), model.kraus)
        dev = float(np.abs(gram - np.eye(gram.shape[0])).max())
        checks.append(
            CheckResult("kraus completeness (sum E^H E = I)", dev <= tol.eps_trace, dev)
        )
        gram = np.einsum("yba,ybc->ac", model.measurements.conj(), model.measurements)
        dev = float(np.abs(gram - np.eye(gram.shape[0])).max())
        checks.append(
            CheckResult("measurement completeness (sum M^H M = I)", dev <= tol.eps_trace, dev)
        )
        resid = unitarity_residue(model.inter_use_unitary)
        checks.append(CheckResult("inter-use unitary", resid <= tol.eps_unitary, resid))
        checks.extend(_density_checks(model.initial_state, "initial memory state", tol))
        return ValidationReport("quantum memory channel", tuple(checks))

    if isinstance(model, TransferOperatorSet):
        checks = []
        psd = CheckResult("transfer operators positive semidefinite", True, np.inf)
        for x in range(model.x_size):
            for y in range(model.y_size):
                c = is_psd(model.operators[x, y], tol)
                keep = (not c.ok and psd.passed) or (c.ok and psd.passed and c.witness < psd.witness)
                if keep:
                    psd = CheckResult(
                        "transfer operators positive semidefinite",
                        c.ok,
                        c.witness,
                        f"input {x}, output {y}: {c.reason}",
                    )
        checks.append(psd)
        eye = np.eye(model.state_dim)
        resid = 0.0
        for x in range(model.x_size):
            closure = np.einsum("yiuju->ij", model.tensors[x])
            resid = max(resid, float(np.abs(closure - eye).max()))
        checks.append(
            CheckResult("transfer trace consistency", resid <= tol.eps_trace, resid)
        )
        checks.extend(_density_checks(model.initial_state, "initial memory state", tol))
        return ValidationReport("transfer operator set", tuple(checks))

    raise TypeError(f"no validator for {type(model).__name__}")


def require_valid(model, tol: Tolerance = DEFAULT_TOL) -> None:
    """Raise ``ModelValidationError`` on the first failed condition."""
    report = validate(model, tol)
    if not report.ok:
        bad = report.failures()
        first = bad[0]
        names = ", ".join(c.name for c in bad)
        raise ModelValidationError(first.name, first.witness, f"failed checks: {names}")


# ---------------------------------------------------------------------------
# Random valid models (property-test generators)
# ---------------------------------------------------------------------------

def random_classical_fsmc(
    rng: np.random.Generator, state_count: int = 2, x_size: int = 2, y_size: int = 2
) -> ClassicalFsmc:
    """Random kernel with rows normalized to pmfs."""
    kernel = rng.random((state_count, x_size, state_count, y_size))
    kernel /= kernel.sum(axis=(2, 3), keepdims=True)
    initial = rng.random(state_count)
    initial /= initial.sum()
    return ClassicalFsmc(kernel, initial)


def _random_isometry_blocks(rng: np.random.Generator, blocks: int, dim: int) -> np.ndarray:
    """QR-based completion: stacked blocks whose gram sum is the identity."""
    g = rng.standard_normal((blocks * dim, dim)) + 1j * rng.standard_normal((blocks * dim, dim))
    q, _ = np.linalg.qr(g)
    return q.reshape(blocks, dim, dim)


def _random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def _random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_quantum_memory_channel(
    rng: np.random.Generator,
    state_dim: int = 2,
    transmit_dim: int = 2,
    n_kraus: int = 2,
    x_size: int = 2,
    y_size: int = 2,
) -> QuantumMemoryChannel:
    """Random channel that satisfies every model condition by construction."""
    joint = transmit_dim * state_dim
    kraus = _random_isometry_blocks(rng, n_kraus, joint)
    measurements = _random_isometry_blocks(rng, y_size, transmit_dim)
    encodings = np.stack([_random_density(rng, transmit_dim) for _ in range(x_size)])
    return QuantumMemoryChannel(
        state_dim=state_dim,
        encodings=encodings,
        kraus=kraus,
        measurements=measurements,
        inter_use_unitary=_random_unitary(rng, state_dim),
        initial_state=_random_density(rng, state_dim),
    )
