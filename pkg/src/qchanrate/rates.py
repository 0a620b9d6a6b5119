"""Information-rate estimation from sampled trajectories.

The estimators follow the classic scaled-forward scheme: advance an
unnormalized conditional description of the channel memory one
observation at a time, renormalize after every step, and accumulate the
logs of the normalizers.  The sum of those logs is exactly minus the log
probability of the conditioned observations, so

    (1/n) * sum(log lambda)  ==  -(1/n) * log p(observations).

Two recursion flavours share this structure:

* classical state metric: a probability vector over latent states,
  normalized to unit sum;
* quantum state operator: a density-like matrix over the doubled memory
  index, normalized to unit trace (its Hermiticity is repaired each step
  against bounded roundoff drift, with a residue guard that turns drift
  beyond roundoff into a hard error).

Running the output-only recursion gives the output entropy rate; running
it with the inputs pinned (input-law factors included) gives the joint
entropy rate; the input entropy rate of an i.i.d. process is evaluated
in closed form.  Logs are natural internally and converted to bits at
the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .channels import (
    ClassicalFsmc,
    Dmc,
    InputLaw,
    QuantumMemoryChannel,
    TransferOperatorSet,
    compile_transfer_operators,
    fsmc_from_dmc,
)
from .errors import ImpossibleObservationError, NumericalCorruptionError
from .linalg import hermiticity_residue
from .sampling import (
    PMF_IMAG_GUARD,
    STATE_HERMITICITY_GUARD,
    Trajectory,
)

LN2 = math.log(2.0)


def dmc_information_rate(q: InputLaw, w: Dmc) -> float:
    """Exact information rate of a memoryless law, in bits per use.

    Terms with zero joint probability contribute nothing; a positive
    transition into an output of zero marginal probability is impossible
    for consistent inputs and would indicate a broken law.
    """
    if q.x_size != w.x_size:
        raise ValueError(
            f"input law has {q.x_size} symbols but the law expects {w.x_size}"
        )
    qy = q.p @ w.w
    joint = q.p[:, None] * w.w
    mask = joint > 0
    if np.any(mask & (qy[None, :] <= 0)):
        raise NumericalCorruptionError(
            "positive joint probability with zero output marginal"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mask, w.w / qy[None, :], 1.0)
    return float((joint[mask] * np.log2(ratio[mask])).sum())


@dataclass
class StateMetric:
    """Normalized forward vector over latent states plus accumulated scale logs."""

    mu: np.ndarray
    log_scale_accum: float = 0.0


@dataclass
class StateOperator:
    """Normalized forward operator over the memory plus accumulated scale logs."""

    sigma: np.ndarray
    log_scale_accum: float = 0.0


class PerStepScales(NamedTuple):
    """Natural logs of the per-step normalizers of the two recursions."""

    output: np.ndarray
    joint: np.ndarray


@dataclass(frozen=True)
class RateEstimate:
    """Entropy-rate estimates (bits per use) and their combination."""

    n: int
    hx: float
    hy: float
    hxy: float
    ir: float
    per_step_log_scales: Optional[PerStepScales] = field(default=None, repr=False)


def initial_state_metric(f: ClassicalFsmc) -> StateMetric:
    return StateMetric(f.initial.astype(float).copy(), 0.0)


def initial_state_operator(t: TransferOperatorSet) -> StateOperator:
    return StateOperator(t.initial_state.astype(complex).copy(), 0.0)


def forward_step_classical(
    f: ClassicalFsmc,
    q: InputLaw,
    m: StateMetric,
    y_obs: int,
    x_obs: int | None = None,
) -> StateMetric:
    """Advance the classical forward vector by one observed output.

    Without ``x_obs`` the input is marginalized under the input law;
    with ``x_obs`` the input-law factor of the observed symbol is
    included, so the accumulated scale logs track the joint rather than
    the output-only sequence probability.
    """
    ker_y = f.kernel[:, :, :, y_obs]  # (S, X, S)
    if x_obs is None:
        raw = np.einsum("s,x,sxt->t", m.mu, q.p, ker_y)
    else:
        raw = q.p[x_obs] * (m.mu @ ker_y[:, x_obs, :])
    total = float(raw.sum())
    if total <= 0.0:
        raise ImpossibleObservationError(
            f"output {y_obs} has zero probability under the model"
        )
    return StateMetric(raw / total, m.log_scale_accum - math.log(total))


def forward_step_quantum(
    t: TransferOperatorSet,
    q: InputLaw,
    s: StateOperator,
    y_obs: int,
    x_obs: int | None = None,
) -> StateOperator:
    """Advance the quantum forward operator by one observed output."""
    w_y = t.tensors[:, y_obs]  # (X, S, S, S, S)
    if x_obs is None:
        raw = np.einsum("ij,x,xiujv->uv", s.sigma, q.p, w_y)
    else:
        raw = q.p[x_obs] * np.einsum("ij,iujv->uv", s.sigma, w_y[x_obs])
    trace = raw.trace()
    if abs(trace.imag) > PMF_IMAG_GUARD:
        raise NumericalCorruptionError(
            f"forward operator trace carries imaginary residue {abs(trace.imag):.3e}"
        )
    if trace.real <= 0.0:
        raise ImpossibleObservationError(
            f"output {y_obs} has zero probability under the model"
        )
    sigma = raw / trace.real
    res = hermiticity_residue(sigma)
    if res > STATE_HERMITICITY_GUARD:
        raise NumericalCorruptionError(
            f"forward operator Hermiticity residue {res:.3e} beyond guard"
        )
    sigma = 0.5 * (sigma + sigma.conj().T)
    return StateOperator(sigma, s.log_scale_accum - math.log(trace.real))


def _check_symbols(seq: np.ndarray, size: int, name: str) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.int64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D sequence")
    if arr.min() < 0 or arr.max() >= size:
        raise ValueError(f"{name} contains symbols outside [0, {size})")
    return arr


def scaled_forward_classical(
    f: ClassicalFsmc,
    q: InputLaw,
    ys: np.ndarray,
    xs: np.ndarray | None = None,
) -> np.ndarray:
    """Per-step natural scale logs of the classical forward recursion.

    The sum of the returned array is -log p(ys) (xs marginalized) or
    -log p(xs, ys) (xs pinned, input-law factors included).
    """
    ys = _check_symbols(ys, f.y_size, "output sequence")
    if xs is None:
        mats = np.einsum("x,sxty->yst", q.p, f.kernel)
    else:
        xs = _check_symbols(xs, f.x_size, "input sequence")
        if xs.size != ys.size:
            raise ValueError("input and output sequences differ in length")
        mats = q.p[:, None, None, None] * f.kernel.transpose(1, 3, 0, 2)
    mu = f.initial.astype(float).copy()
    logs = np.empty(ys.size)
    for step in range(ys.size):
        m = mats[ys[step]] if xs is None else mats[xs[step], ys[step]]
        raw = mu @ m
        total = raw.sum()
        if total <= 0.0:
            raise ImpossibleObservationError(
                f"observation at step {step} has zero probability under the model"
            )
        mu = raw / total
        logs[step] = -math.log(total)
    return logs


def scaled_forward_quantum(
    t: TransferOperatorSet,
    q: InputLaw,
    ys: np.ndarray,
    xs: np.ndarray | None = None,
) -> np.ndarray:
    """Per-step natural scale logs of the quantum forward recursion."""
    ys = _check_symbols(ys, t.y_size, "output sequence")
    chain = t.chain_operators
    if xs is None:
        mats = np.einsum("x,xyab->yab", q.p, chain)
    else:
        xs = _check_symbols(xs, t.x_size, "input sequence")
        if xs.size != ys.size:
            raise ValueError("input and output sequences differ in length")
        mats = q.p[:, None, None, None] * chain
    s = t.state_dim
    diag = np.arange(0, s * s, s + 1)
    vec = t.initial_state.reshape(s * s).astype(complex).copy()
    logs = np.empty(ys.size)
    for step in range(ys.size):
        m = mats[ys[step]] if xs is None else mats[xs[step], ys[step]]
        nxt = vec @ m
        trace = nxt[diag].sum()
        if abs(trace.imag) > PMF_IMAG_GUARD:
            raise NumericalCorruptionError(
                f"forward trace carries imaginary residue {abs(trace.imag):.3e} "
                f"at step {step}"
            )
        if trace.real <= 0.0:
            raise ImpossibleObservationError(
                f"observation at step {step} has zero probability under the model"
            )
        vec = nxt / trace.real
        sig = vec.reshape(s, s)
        res = hermiticity_residue(sig)
        if res > STATE_HERMITICITY_GUARD:
            raise NumericalCorruptionError(
                f"forward operator Hermiticity residue {res:.3e} at step {step}"
            )
        vec = (0.5 * (sig + sig.conj().T)).reshape(s * s)
        logs[step] = -math.log(trace.real)
    return logs


def input_log_loss(q: InputLaw, xs: np.ndarray) -> np.ndarray:
    """Per-step -log p_X(x) of an i.i.d. input sequence (natural logs)."""
    xs = _check_symbols(xs, q.x_size, "input sequence")
    probs = q.p[xs]
    if probs.min() <= 0.0:
        raise ImpossibleObservationError(
            "input sequence contains a symbol of zero input probability"
        )
    return -np.log(probs)


def as_recursion_model(model):
    """Coerce any channel model to one the forward recursions accept."""
    if isinstance(model, Dmc):
        return fsmc_from_dmc(model)
    if isinstance(model, QuantumMemoryChannel):
        return compile_transfer_operators(model)
    if isinstance(model, (ClassicalFsmc, TransferOperatorSet)):
        return model
    raise TypeError(f"unsupported model type {type(model).__name__}")


def entropy_rate_estimates(
    model,
    q: InputLaw,
    traj: Trajectory,
    burn_in: int = 0,
    keep_scales: bool = False,
) -> RateEstimate:
    """Estimate the entropy rates and information rate from one trajectory.

    ``burn_in`` discards the first steps from all three per-step series
    before averaging (none by default).  With ``keep_scales`` the raw
    per-step scale logs of both recursions ride along on the result.
    """
    model = as_recursion_model(model)
    if burn_in < 0 or burn_in >= traj.n:
        raise ValueError(f"burn_in must lie in [0, n), got {burn_in}")
    log_px = input_log_loss(q, traj.x)
    if isinstance(model, ClassicalFsmc):
        ly = scaled_forward_classical(model, q, traj.y)
        lxy = scaled_forward_classical(model, q, traj.y, traj.x)
    else:
        ly = scaled_forward_quantum(model, q, traj.y)
        lxy = scaled_forward_quantum(model, q, traj.y, traj.x)
    steps = traj.n - burn_in
    hx = float(log_px[burn_in:].sum()) / (steps * LN2)
    hy = float(ly[burn_in:].sum()) / (steps * LN2)
    hxy = float(lxy[burn_in:].sum()) / (steps * LN2)
    return RateEstimate(
        n=traj.n,
        hx=hx,
        hy=hy,
        hxy=hxy,
        ir=hx + hy - hxy,
        per_step_log_scales=PerStepScales(ly, lxy) if keep_scales else None,
    )
