"""From-scratch LSTM regressor mapping a design-matrix window to one growth rate.

Single layer with a linear head.  Gates use the standard formulation:
i, f, o are logistic, g is a tanh candidate, c_t = f*c_{t-1} + i*g,
h_t = o*tanh(c_t), and the prediction is w_out . h_T + b_out.  Gradients
are exact backpropagation through time; training is full-batch Adam and is
bit-deterministic given the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    InsufficientData,
    LengthMismatch,
    ShapeMismatch,
    VariableOrderMismatch,
)
from .series import YearRange
from .transform import DesignMatrix, StandardizationParams

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class Hyperparams:
    n_timesteps: int
    hidden_size: int
    learning_rate: float
    epochs: int
    seed: int = 0
    l2_penalty: float = 0.0

    def __post_init__(self):
        if self.n_timesteps < 1:
            raise ValueError("n_timesteps must be >= 1")
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")

    def grid_key(self) -> str:
        """Canonical identity of the searched settings (seed excluded)."""
        return (
            f"t={self.n_timesteps},h={self.hidden_size},"
            f"lr={self.learning_rate!r},e={self.epochs},l2={self.l2_penalty!r}"
        )


@dataclass(frozen=True)
class LstmParams:
    """Gate rows are stacked blocks: input, forget, output, candidate.

    The three logistic gates sit in the first 3*hidden rows so one fused
    activation covers them; the tanh candidate takes the last block.
    """

    w_in: np.ndarray   # (4*hidden, n_vars)
    w_rec: np.ndarray  # (4*hidden, hidden)
    bias: np.ndarray   # (4*hidden,)
    w_out: np.ndarray  # (hidden,)
    b_out: float

    @property
    def hidden_size(self) -> int:
        return self.w_rec.shape[1]

    @property
    def n_vars(self) -> int:
        return self.w_in.shape[1]

    def weight_norm_sq(self) -> float:
        return float(
            np.sum(self.w_in ** 2) + np.sum(self.w_rec ** 2) + np.sum(self.w_out ** 2)
        )


@dataclass(frozen=True)
class AdamState:
    m: LstmParams
    v: LstmParams
    t: int


@dataclass(frozen=True)
class TrainedModel:
    params: LstmParams
    hyper: Hyperparams
    variable_ids: tuple[str, ...]
    standardization: Mapping[str, StandardizationParams] = field(default_factory=dict)
    training_loss_curve: tuple[float, ...] = ()


def init_params(hyper: Hyperparams, n_vars: int) -> LstmParams:
    """Weights i.i.d. uniform on [-r, r] with r = 1/sqrt(hidden_size), biases 0
    except the forget-gate bias at 1.0.  Deterministic given hyper.seed."""
    if n_vars < 1:
        raise ValueError("n_vars must be >= 1")
    h = hyper.hidden_size
    r = 1.0 / np.sqrt(h)
    rng = np.random.default_rng(hyper.seed)
    w_in = rng.uniform(-r, r, size=(4 * h, n_vars))
    w_rec = rng.uniform(-r, r, size=(4 * h, h))
    w_out = rng.uniform(-r, r, size=h)
    bias = np.zeros(4 * h)
    bias[h:2 * h] = 1.0
    return LstmParams(w_in=w_in, w_rec=w_rec, bias=bias, w_out=w_out, b_out=0.0)


def zeros_like_params(params: LstmParams) -> LstmParams:
    return LstmParams(
        w_in=np.zeros_like(params.w_in),
        w_rec=np.zeros_like(params.w_rec),
        bias=np.zeros_like(params.bias),
        w_out=np.zeros_like(params.w_out),
        b_out=0.0,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # overflow-free logistic via the tanh identity
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _forward_batch(params: LstmParams, windows: np.ndarray):
    """Run the recurrence over a (batch, timesteps, n_vars) stack.

    Returns predictions (batch,) and the per-timestep caches needed by
    backpropagation.  The input projection is hoisted out of the time loop.
    """
    if windows.ndim != 3 or windows.shape[2] != params.n_vars:
        raise ShapeMismatch(
            f"windows shape {windows.shape} incompatible with "
            f"{params.n_vars} model variables"
        )
    batch, n_steps, _ = windows.shape
    hidden = params.hidden_size
    projected = windows @ params.w_in.T + params.bias
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    caches = []
    for t in range(n_steps):
        z = projected[:, t, :] + h @ params.w_rec.T
        gates = _sigmoid(z[:, :3 * hidden])
        i = gates[:, :hidden]
        f = gates[:, hidden:2 * hidden]
        o = gates[:, 2 * hidden:]
        g = np.tanh(z[:, 3 * hidden:])
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        caches.append((h, c_prev, i, f, g, o, tanh_c))
    preds = h @ params.w_out + params.b_out
    return preds, caches


def forward(params: LstmParams, window: np.ndarray) -> float:
    """Prediction for one window of shape (n_timesteps, n_vars)."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[1] != params.n_vars:
        raise ShapeMismatch(
            f"window shape {window.shape} incompatible with "
            f"{params.n_vars} model variables"
        )
    preds, _ = _forward_batch(params, window[None, :, :])
    return float(preds[0])


def loss(
    predictions: Sequence[float],
    actuals: Sequence[float],
    params: LstmParams | None = None,
    l2_penalty: float = 0.0,
) -> float:
    """Mean squared error plus l2_penalty * squared weight norm."""
    preds = np.asarray(predictions, dtype=float)
    acts = np.asarray(actuals, dtype=float)
    if preds.shape != acts.shape:
        raise LengthMismatch(
            f"{preds.shape[0]} predictions vs {acts.shape[0]} actuals")
    mse = float(np.mean((preds - acts) ** 2))
    if l2_penalty and params is not None:
        mse += l2_penalty * params.weight_norm_sq()
    return mse


def _backward_arrays(
    params: LstmParams,
    windows: np.ndarray,
    targets: np.ndarray,
    l2_penalty: float = 0.0,
    forward_state=None,
) -> LstmParams:
    """Exact gradient of loss() w.r.t. every parameter, batched.

    forward_state, when given, is the (preds, caches) pair of a forward
    pass already run on these windows.
    """
    hidden = params.hidden_size
    batch, n_steps, _ = windows.shape
    preds, caches = forward_state if forward_state is not None \
        else _forward_batch(params, windows)

    dy = 2.0 * (preds - targets) / batch          # (batch,)
    h_last = caches[-1][0]
    g_w_out = dy @ h_last
    g_b_out = float(dy.sum())

    dz_stack = np.empty((n_steps, batch, 4 * hidden))
    dh = np.outer(dy, params.w_out)               # (batch, hidden)
    dc = np.zeros((batch, hidden))
    for t in range(n_steps - 1, -1, -1):
        _h, c_prev, i, f, g, o, tanh_c = caches[t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c ** 2)
        dz = dz_stack[t]
        dz[:, :hidden] = (dc * g) * i * (1.0 - i)
        dz[:, hidden:2 * hidden] = (dc * c_prev) * f * (1.0 - f)
        dz[:, 2 * hidden:3 * hidden] = do * o * (1.0 - o)
        dz[:, 3 * hidden:] = (dc * i) * (1.0 - g ** 2)
        dh = dz @ params.w_rec
        dc = dc * f

    flat_dz = dz_stack.transpose(1, 0, 2).reshape(batch * n_steps, 4 * hidden)
    flat_x = windows.reshape(batch * n_steps, -1)
    g_w_in = flat_dz.T @ flat_x
    h_prev_stack = np.empty((n_steps, batch, hidden))
    h_prev_stack[0] = 0.0
    for t in range(1, n_steps):
        h_prev_stack[t] = caches[t - 1][0]
    flat_h_prev = h_prev_stack.transpose(1, 0, 2).reshape(batch * n_steps, hidden)
    g_w_rec = flat_dz.T @ flat_h_prev
    g_bias = flat_dz.sum(axis=0)

    if l2_penalty:
        g_w_in += 2.0 * l2_penalty * params.w_in
        g_w_rec += 2.0 * l2_penalty * params.w_rec
        g_w_out = g_w_out + 2.0 * l2_penalty * params.w_out
    return LstmParams(
        w_in=g_w_in, w_rec=g_w_rec, bias=g_bias, w_out=g_w_out, b_out=g_b_out)


def backward(
    params: LstmParams,
    batch: Sequence[tuple[np.ndarray, float]],
    l2_penalty: float = 0.0,
) -> LstmParams:
    """Gradient for a batch of (window, actual) pairs."""
    if not batch:
        raise LengthMismatch("empty batch")
    windows = np.stack([np.asarray(w, dtype=float) for w, _ in batch])
    targets = np.array([y for _, y in batch], dtype=float)
    if windows.shape[2] != params.n_vars:
        raise ShapeMismatch(
            f"windows have {windows.shape[2]} variables, model has {params.n_vars}")
    return _backward_arrays(params, windows, targets, l2_penalty)


def adam_step(
    params: LstmParams,
    grads: LstmParams,
    state: AdamState,
    lr: float,
) -> tuple[LstmParams, AdamState]:
    """Bias-corrected Adam update, element-wise, returning new params and state."""
    t = state.t + 1
    corr1 = 1.0 - ADAM_BETA1 ** t
    corr2 = 1.0 - ADAM_BETA2 ** t

    def update(p, g, m, v):
        m_new = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * g
        v_new = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * g * g
        step = lr * (m_new / corr1) / (np.sqrt(v_new / corr2) + ADAM_EPS)
        return p - step, m_new, v_new

    new_fields = {}
    m_fields = {}
    v_fields = {}
    for name in ("w_in", "w_rec", "bias", "w_out"):
        p, m_new, v_new = update(
            getattr(params, name), getattr(grads, name),
            getattr(state.m, name), getattr(state.v, name),
        )
        new_fields[name] = p
        m_fields[name] = m_new
        v_fields[name] = v_new
    b, mb, vb = update(
        np.float64(params.b_out), np.float64(grads.b_out),
        np.float64(state.m.b_out), np.float64(state.v.b_out),
    )
    new_params = LstmParams(b_out=float(b), **new_fields)
    new_state = AdamState(
        m=LstmParams(b_out=float(mb), **m_fields),
        v=LstmParams(b_out=float(vb), **v_fields),
        t=t,
    )
    return new_params, new_state


def train(
    dataset: Sequence[tuple[DesignMatrix, float]],
    hyper: Hyperparams,
    standardization: Mapping[str, StandardizationParams] | None = None,
) -> TrainedModel:
    """Full-batch Adam over the whole dataset for hyper.epochs epochs.

    The recorded loss curve has one entry per epoch (loss before that
    epoch's update).  Fully deterministic given hyper.seed.
    """
    if len(dataset) < 2:
        raise InsufficientData(
            f"{len(dataset)} training pairs; need at least 2")
    variable_ids = dataset[0][0].variable_ids
    for matrix, _ in dataset:
        if matrix.variable_ids != variable_ids:
            raise VariableOrderMismatch(
                f"training matrices disagree on variable order: "
                f"{matrix.variable_ids} vs {variable_ids}"
            )
        if matrix.window.shape != dataset[0][0].window.shape:
            raise ShapeMismatch("training windows have inconsistent shapes")

    windows = np.stack([m.window for m, _ in dataset]).astype(float)
    targets = np.array([y for _, y in dataset], dtype=float)
    params = init_params(hyper, n_vars=windows.shape[2])
    state = AdamState(m=zeros_like_params(params), v=zeros_like_params(params), t=0)
    curve: list[float] = []
    for _ in range(hyper.epochs):
        forward_state = _forward_batch(params, windows)
        curve.append(loss(forward_state[0], targets, params, hyper.l2_penalty))
        grads = _backward_arrays(
            params, windows, targets, hyper.l2_penalty, forward_state)
        params, state = adam_step(params, grads, state, hyper.learning_rate)
    return TrainedModel(
        params=params,
        hyper=hyper,
        variable_ids=variable_ids,
        standardization=dict(standardization or {}),
        training_loss_curve=tuple(curve),
    )


def predict(model: TrainedModel, matrix: DesignMatrix) -> float:
    """Forward pass on a design matrix whose variable order matches the model."""
    if matrix.variable_ids != model.variable_ids:
        raise VariableOrderMismatch(
            f"matrix variables {matrix.variable_ids} do not match "
            f"model variables {model.variable_ids}"
        )
    return forward(model.params, matrix.window)


def model_to_json(model: TrainedModel) -> str:
    """Single JSON document with round-trip float rendering; byte-stable."""
    doc = {
        "hyperparams": {
            "n_timesteps": model.hyper.n_timesteps,
            "hidden_size": model.hyper.hidden_size,
            "learning_rate": model.hyper.learning_rate,
            "epochs": model.hyper.epochs,
            "seed": model.hyper.seed,
            "l2_penalty": model.hyper.l2_penalty,
        },
        "variable_ids": list(model.variable_ids),
        "standardization": {
            var: {
                "mean": p.mean,
                "sd": p.sd,
                "fitted_on": [p.fitted_on.start, p.fitted_on.end],
            }
            for var, p in sorted(model.standardization.items())
        },
        "params": {
            "w_in": model.params.w_in.tolist(),
            "w_rec": model.params.w_rec.tolist(),
            "bias": model.params.bias.tolist(),
            "w_out": model.params.w_out.tolist(),
            "b_out": model.params.b_out,
        },
        "training_loss_curve": list(model.training_loss_curve),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_json(text: str) -> TrainedModel:
    doc = json.loads(text)
    hp = doc["hyperparams"]
    hyper = Hyperparams(
        n_timesteps=hp["n_timesteps"],
        hidden_size=hp["hidden_size"],
        learning_rate=hp["learning_rate"],
        epochs=hp["epochs"],
        seed=hp["seed"],
        l2_penalty=hp["l2_penalty"],
    )
    params = LstmParams(
        w_in=np.array(doc["params"]["w_in"], dtype=float),
        w_rec=np.array(doc["params"]["w_rec"], dtype=float),
        bias=np.array(doc["params"]["bias"], dtype=float),
        w_out=np.array(doc["params"]["w_out"], dtype=float),
        b_out=float(doc["params"]["b_out"]),
    )
    standardization = {
        var: StandardizationParams(
            mean=entry["mean"],
            sd=entry["sd"],
            fitted_on=YearRange(entry["fitted_on"][0], entry["fitted_on"][1]),
        )
        for var, entry in doc["standardization"].items()
    }
    return TrainedModel(
        params=params,
        hyper=hyper,
        variable_ids=tuple(doc["variable_ids"]),
        standardization=standardization,
        training_loss_curve=tuple(doc["training_loss_curve"]),
    )
