"""Single-modality restricted Boltzmann machine.

Binary visible and hidden units joined by a D x K weight matrix. Provides
the sigmoid conditionals, block Gibbs sampling, contrastive-divergence
gradient estimates, free energy, and an exact enumeration gradient usable
as a testing oracle on small models. Parameters are float64 throughout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .errors import CapacityError, DataError, DimensionError, FormatError, TruncationError, WriteError

# Conditionals are clipped into the open interval so downstream logs and the
# strict (0,1) range contract survive extreme pre-activations.
_P_EPS = 1e-12

CKPT_MAGIC = b"CRBM"
CKPT_VERSION = 1
_CKPT_HEADER = struct.Struct("<4sIII")


@dataclass
class Rbm:
    """Model parameters: weights (D x K), hidden_bias (K,), visible_bias (D,)."""

    weights: np.ndarray
    hidden_bias: np.ndarray
    visible_bias: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.hidden_bias = np.asarray(self.hidden_bias, dtype=np.float64)
        self.visible_bias = np.asarray(self.visible_bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionError(f"weights must be 2-D, got shape {self.weights.shape}")
        d, k = self.weights.shape
        if self.hidden_bias.shape != (k,):
            raise DimensionError(f"hidden_bias shape {self.hidden_bias.shape} != ({k},)")
        if self.visible_bias.shape != (d,):
            raise DimensionError(f"visible_bias shape {self.visible_bias.shape} != ({d},)")
        for arr in (self.weights, self.hidden_bias, self.visible_bias):
            if not np.isfinite(arr).all():
                raise DataError("RBM parameters must be finite")

    @property
    def n_visible(self) -> int:
        return self.weights.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "Rbm":
        return Rbm(self.weights.copy(), self.hidden_bias.copy(), self.visible_bias.copy())


@dataclass(frozen=True)
class GradientEstimate:
    """Log-likelihood ascent direction, shaped like the Rbm that produced it."""

    d_weights: np.ndarray
    d_hidden_bias: np.ndarray
    d_visible_bias: np.ndarray
    method: str  # "cd" or "exact"


def init_rbm(n_visible: int, n_hidden: int, rng: np.random.Generator, sigma: float = 0.01) -> Rbm:
    """Gaussian(0, sigma) weights, zero biases."""
    w = sigma * rng.standard_normal((n_visible, n_hidden))
    return Rbm(w, np.zeros(n_hidden), np.zeros(n_visible))


def _as_batch(v, n: int, name: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(v, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise DimensionError(f"{name} must have {n} columns, got shape {np.asarray(v).shape}")
    return arr, single


def _check_unit_range(batch: np.ndarray, name: str) -> None:
    if batch.size and (batch.min() < 0.0 or batch.max() > 1.0):
        raise DataError(f"{name} entries must lie in [0, 1]")


def hidden_probs(rbm: Rbm, v) -> np.ndarray:
    """P(h_k = 1 | v) = sigmoid(W^T v + hidden_bias), rows of v are frames."""
    batch, single = _as_batch(v, rbm.n_visible, "v")
    _check_unit_range(batch, "v")
    p = expit(batch @ rbm.weights + rbm.hidden_bias)
    np.clip(p, _P_EPS, 1.0 - _P_EPS, out=p)
    return p[0] if single else p


def visible_probs(rbm: Rbm, h) -> np.ndarray:
    """P(v_d = 1 | h) = sigmoid(W h + visible_bias)."""
    batch, single = _as_batch(h, rbm.n_hidden, "h")
    _check_unit_range(batch, "h")
    p = expit(batch @ rbm.weights.T + rbm.visible_bias)
    np.clip(p, _P_EPS, 1.0 - _P_EPS, out=p)
    return p[0] if single else p


def free_energy(rbm: Rbm, v) -> np.ndarray | float:
    """F(v) = -visible_bias . v - sum_k softplus(w_k . v + hidden_bias_k).

    Stable for pre-activations up to a few hundred in magnitude; the visible
    marginal satisfies log P(v) = -F(v) - log Z.
    """
    batch, single = _as_batch(v, rbm.n_visible, "v")
    pre = batch @ rbm.weights + rbm.hidden_bias
    f = -batch @ rbm.visible_bias - np.logaddexp(0.0, pre).sum(axis=1)
    return float(f[0]) if single else f


def gibbs_chain(
    rbm: Rbm, v0, steps: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Run `steps` rounds of block Gibbs sampling from v0.

    Each round samples hidden units at their conditional probabilities, then
    visible units at theirs. Returns the final visible sample and the hidden
    conditionals given that sample. Bitwise deterministic for a given rng.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    v, single = _as_batch(v0, rbm.n_visible, "v0")
    for _ in range(steps):
        ph = hidden_probs(rbm, v)
        h = (rng.random(ph.shape) < ph).astype(np.float64)
        pv = visible_probs(rbm, h)
        v = (rng.random(pv.shape) < pv).astype(np.float64)
    ph_final = hidden_probs(rbm, v)
    if single:
        return v[0], ph_final[0]
    return v, ph_final


def cd_gradient(rbm: Rbm, batch, steps: int, rng: np.random.Generator) -> GradientEstimate:
    """Contrastive-divergence estimate of the log-likelihood gradient.

    Positive phase uses data-clamped hidden probabilities; the negative
    phase uses the visible sample after `steps` Gibbs rounds together with
    its hidden probabilities, a standard variance-reduction convention.
    """
    x, _ = _as_batch(batch, rbm.n_visible, "batch")
    if x.min() < 0.0 or x.max() > 1.0:
        raise DataError("batch entries must lie in [0, 1]")
    b = x.shape[0]
    h_data = hidden_probs(rbm, x)
    v_model, h_model = gibbs_chain(rbm, x, steps, rng)
    dw = (x.T @ h_data - v_model.T @ h_model) / b
    dbh = (h_data - h_model).mean(axis=0)
    dbv = (x - v_model).mean(axis=0)
    return GradientEstimate(dw, dbh, dbv, method="cd")


def all_visible_states(n_visible: int) -> np.ndarray:
    """All 2^D binary visible configurations, one per row."""
    count = 1 << n_visible
    bits = (np.arange(count)[:, None] >> np.arange(n_visible)) & 1
    return bits.astype(np.float64)


def _check_enumerable(rbm: Rbm) -> None:
    if rbm.n_visible + rbm.n_hidden > 20:
        raise CapacityError(
            f"enumeration supports D + K <= 20, got {rbm.n_visible + rbm.n_hidden}"
        )


def exact_log_likelihood(rbm: Rbm, batch) -> float:
    """Mean log P(v) over the batch, partition function by enumeration."""
    _check_enumerable(rbm)
    x, _ = _as_batch(batch, rbm.n_visible, "batch")
    log_z = logsumexp(-free_energy(rbm, all_visible_states(rbm.n_visible)))
    return float((-free_energy(rbm, x) - log_z).mean())


def exact_gradient(rbm: Rbm, batch) -> GradientEstimate:
    """Exact gradient of the mean log-likelihood of a binary batch.

    The model expectation sums over all 2^D visible states with hidden
    units marginalized analytically, so it is exact up to float64 rounding.
    """
    _check_enumerable(rbm)
    x, _ = _as_batch(batch, rbm.n_visible, "batch")
    if not np.isin(x, (0.0, 1.0)).all():
        raise DataError("exact_gradient expects a binary batch")
    b = x.shape[0]

    states = all_visible_states(rbm.n_visible)
    neg_f = -free_energy(rbm, states)
    p = np.exp(neg_f - logsumexp(neg_f))
    h_states = hidden_probs(rbm, states)

    h_data = hidden_probs(rbm, x)
    dw = x.T @ h_data / b - states.T @ (p[:, None] * h_states)
    dbh = h_data.mean(axis=0) - p @ h_states
    dbv = x.mean(axis=0) - p @ states
    return GradientEstimate(dw, dbh, dbv, method="exact")


def rbm_to_bytes(rbm: Rbm) -> bytes:
    """Serialize to a CRBM checkpoint block (f64 parameters, little-endian)."""
    head = _CKPT_HEADER.pack(CKPT_MAGIC, CKPT_VERSION, rbm.n_visible, rbm.n_hidden)
    return (
        head
        + rbm.weights.astype("<f8", copy=False).tobytes()
        + rbm.hidden_bias.astype("<f8", copy=False).tobytes()
        + rbm.visible_bias.astype("<f8", copy=False).tobytes()
    )


def rbm_from_bytes(buf: bytes, offset: int = 0, origin: str = "checkpoint") -> tuple[Rbm, int]:
    """Parse one CRBM block starting at offset; returns (rbm, next offset)."""
    if len(buf) < offset + _CKPT_HEADER.size:
        raise TruncationError(f"{origin}: checkpoint block shorter than header")
    magic, version, d, k = _CKPT_HEADER.unpack_from(buf, offset)
    if magic != CKPT_MAGIC:
        raise FormatError(f"{origin}: bad checkpoint magic {magic!r}")
    if version != CKPT_VERSION:
        raise FormatError(f"{origin}: unsupported checkpoint version {version}")
    if d < 1 or k < 1:
        raise FormatError(f"{origin}: invalid checkpoint dimensions D={d}, K={k}")
    pos = offset + _CKPT_HEADER.size
    need = (d * k + k + d) * 8
    if len(buf) < pos + need:
        raise TruncationError(f"{origin}: checkpoint payload truncated")
    params = np.frombuffer(buf, dtype="<f8", count=d * k + k + d, offset=pos)
    w = params[: d * k].reshape(d, k)
    bh = params[d * k : d * k + k]
    bv = params[d * k + k :]
    return Rbm(w.copy(), bh.copy(), bv.copy()), pos + need


def save_rbm(rbm: Rbm, path) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(rbm_to_bytes(rbm))
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def load_rbm(path) -> Rbm:
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    rbm, end = rbm_from_bytes(buf, 0, str(path))
    if end != len(buf):
        raise FormatError(f"{path}: {len(buf) - end} trailing bytes")
    return rbm
