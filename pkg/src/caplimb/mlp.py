"""From-scratch MLP regressor mapping capacitance windows to local limb pose.

Fixed architecture 300-400-400-400-400-4 with ReLU hidden activations and an
identity output, trained with Adam on mean squared error. Inputs are
z-scored per channel with statistics stored alongside the weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

LAYER_SIZES = (300, 400, 400, 400, 400, 4)
STD_FLOOR = 1e-8


class NonFiniteInput(ValueError):
    pass


class EmptyDataset(ValueError):
    pass


@dataclass
class MlpParams:
    weights: list[np.ndarray]  # weights[i]: (n_in, n_out)
    biases: list[np.ndarray]  # biases[i]: (n_out,)
    x_mean: np.ndarray  # (n_input,)
    x_std: np.ndarray  # (n_input,), floored at STD_FLOOR

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[0]] + [w.shape[1] for w in self.weights])

    def copy(self) -> "MlpParams":
        return MlpParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.x_mean.copy(),
            self.x_std.copy(),
        )

    def astype(self, dtype) -> "MlpParams":
        return MlpParams(
            [w.astype(dtype) for w in self.weights],
            [b.astype(dtype) for b in self.biases],
            self.x_mean.astype(dtype),
            self.x_std.astype(dtype),
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 128
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    val_fraction: float = 0.1  # split by collection iteration, not by record
    dtype: str = "float32"

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


def init_params(
    seed: int, sizes: tuple[int, ...] = LAYER_SIZES, dtype=np.float32
) -> MlpParams:
    """He-style uniform fan-in initialization with a fixed seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / n_in)
        weights.append(rng.uniform(-limit, limit, size=(n_in, n_out)).astype(dtype))
        biases.append(np.zeros(n_out, dtype=dtype))
    return MlpParams(
        weights,
        biases,
        np.zeros(sizes[0], dtype=dtype),
        np.ones(sizes[0], dtype=dtype),
    )


def normalize(params: MlpParams, X: np.ndarray) -> np.ndarray:
    return (X - params.x_mean) / params.x_std


def forward(params: MlpParams, X: np.ndarray) -> np.ndarray:
    """Forward pass on already-normalized inputs, (n, n_in) -> (n, 4)."""
    a = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ W + b
        if i < last:
            a = np.maximum(a, 0.0)
    return a


def predict(params: MlpParams, window: np.ndarray) -> np.ndarray:
    """Estimate (p_y, p_z, theta_y, theta_z) from one flattened window."""
    x = np.asarray(window, dtype=params.weights[0].dtype)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("window contains non-finite values")
    return forward(params, normalize(params, x[None, :]))[0]


def _forward_cached(params: MlpParams, X: np.ndarray):
    """Returns (output, activations, pre_activations) for backprop."""
    acts = [X]
    pres = []
    a = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W + b
        pres.append(z)
        a = np.maximum(z, 0.0) if i < last else z
        acts.append(a)
    return a, acts, pres


def _backward(params: MlpParams, acts, pres, dout):
    """Gradients of the loss wrt weights/biases given d(loss)/d(output)."""
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    delta = dout
    for i in range(len(params.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (pres[i - 1] > 0)
    return grads_w, grads_b


def mse_loss_and_grads(params: MlpParams, X: np.ndarray, Y: np.ndarray):
    """Mean squared error over all outputs, with parameter gradients."""
    out, acts, pres = _forward_cached(params, X)
    diff = out - Y
    loss = float(np.mean(diff * diff))
    dout = (2.0 / diff.size) * diff
    gw, gb = _backward(params, acts, pres, dout.astype(out.dtype))
    return loss, gw, gb


def train(
    X: np.ndarray,
    Y: np.ndarray,
    cfg: TrainConfig,
    groups: np.ndarray | None = None,
    progress=None,
):
    """Train on (X, Y) and return (best-validation MlpParams, history).

    groups, when given, assigns each record to a collection iteration; the
    validation split holds out whole groups to avoid window leakage.
    history is a list of (epoch, train_loss, val_loss) tuples.
    """
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape[0] == 0:
        raise EmptyDataset("no training records")
    dtype = np.dtype(cfg.dtype)
    if groups is None:
        groups = np.arange(X.shape[0])
    val_mask = _val_mask(np.asarray(groups), cfg.val_fraction)
    if val_mask.all() or not val_mask.any():
        val_mask = np.zeros(X.shape[0], dtype=bool)
        val_mask[-max(1, X.shape[0] // 10):] = True

    mean = X[~val_mask].mean(axis=0, dtype=np.float64)
    std = np.maximum(X[~val_mask].std(axis=0, dtype=np.float64), STD_FLOOR)

    params = init_params(cfg.seed, (X.shape[1],) + LAYER_SIZES[1:], dtype=dtype)
    params.x_mean = mean.astype(dtype)
    params.x_std = std.astype(dtype)

    Xtr = ((X[~val_mask] - mean) / std).astype(dtype)
    Ytr = Y[~val_mask].astype(dtype)
    Xva = ((X[val_mask] - mean) / std).astype(dtype)
    Yva = Y[val_mask].astype(dtype)

    m = [np.zeros_like(w) for w in params.weights + params.biases]
    v = [np.zeros_like(w) for w in params.weights + params.biases]
    shuffle_rng = np.random.default_rng(cfg.seed + 1)
    n = Xtr.shape[0]
    history = []
    best = (np.inf, params.copy())
    step = 0
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        train_loss = 0.0
        nb = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, gw, gb = mse_loss_and_grads(params, Xtr[idx], Ytr[idx])
            train_loss += loss
            nb += 1
            step += 1
            flat_params = params.weights + params.biases
            bc1 = 1 - cfg.beta1**step
            bc2 = 1 - cfg.beta2**step
            for k, g in enumerate(gw + gb):
                # in-place moment updates, same arithmetic as the textbook
                # form m = b1*m + (1-b1)*g (bitwise-identical rounding)
                m[k] *= cfg.beta1
                m[k] += (1 - cfg.beta1) * g
                v[k] *= cfg.beta2
                v[k] += (1 - cfg.beta2) * g * g
                mh = m[k] / bc1
                vh = v[k] / bc2
                np.sqrt(vh, out=vh)
                vh += cfg.eps
                mh *= cfg.learning_rate
                mh /= vh
                flat_params[k] -= mh
        train_loss /= max(nb, 1)
        val_loss = _eval_loss(params, Xva, Yva) if Xva.shape[0] else train_loss
        history.append((epoch, train_loss, val_loss))
        if val_loss < best[0]:
            best = (val_loss, params.copy())
        if progress is not None:
            progress(epoch, train_loss, val_loss)
    return best[1], history


def _val_mask(groups: np.ndarray, frac: float) -> np.ndarray:
    uniq = np.unique(groups)
    n_val = int(round(len(uniq) * frac))
    val_groups = set(uniq[len(uniq) - n_val :].tolist())
    return np.array([g in val_groups for g in groups.tolist()])


def _eval_loss(params: MlpParams, X: np.ndarray, Y: np.ndarray, batch=4096) -> float:
    se = 0.0
    n = 0
    for start in range(0, X.shape[0], batch):
        out = forward(params, X[start : start + batch])
        diff = out - Y[start : start + batch]
        se += float(np.sum(diff * diff))
        n += diff.size
    return se / max(n, 1)


def validation_rmse(params: MlpParams, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Per-output RMSE of the model on raw (unnormalized) inputs."""
    Xn = normalize(params.astype(np.float64), np.asarray(X, dtype=np.float64))
    out = forward(params.astype(np.float64), Xn)
    return np.sqrt(np.mean((out - Y) ** 2, axis=0))


def grad_check(
    params: MlpParams,
    X: np.ndarray,
    Y: np.ndarray,
    n_samples: int = 200,
    fd_step: float = 1e-5,
    kink_tol: float = 1e-4,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-FD gradients over
    randomly sampled parameters.

    Batch rows with any hidden pre-activation within kink_tol of zero are
    excluded (ReLU is not differentiable there, and the FD perturbation
    could cross the kink). If no rows survive, the check falls back to the
    full batch restricted to output-layer parameters, which sit after the
    last ReLU.
    """
    p64 = params.astype(np.float64)
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    _, _, pres = _forward_cached(p64, X)
    row_ok = np.ones(X.shape[0], dtype=bool)
    for z in pres[:-1]:
        row_ok &= np.all(np.abs(z) >= kink_tol, axis=1)

    n_layers = len(p64.weights)
    if row_ok.any():
        X, Y = X[row_ok], Y[row_ok]
        tensor_ids = list(range(2 * n_layers))
    else:
        tensor_ids = [n_layers - 1, 2 * n_layers - 1]  # output W and b only

    _, gw, gb = mse_loss_and_grads(p64, X, Y)
    tensors = list(p64.weights) + list(p64.biases)
    grads = list(gw) + list(gb)
    rng = np.random.default_rng(seed)

    max_rel = 0.0
    for _ in range(n_samples):
        k = tensor_ids[int(rng.integers(len(tensor_ids)))]
        tensor = tensors[k]
        idx = tuple(int(rng.integers(s)) for s in tensor.shape)
        orig = tensor[idx]
        tensor[idx] = orig + fd_step
        lp = _eval_loss_full(p64, X, Y)
        tensor[idx] = orig - fd_step
        lm = _eval_loss_full(p64, X, Y)
        tensor[idx] = orig
        fd = (lp - lm) / (2 * fd_step)
        an = grads[k][idx]
        denom = max(abs(fd), abs(an), 1e-8)
        max_rel = max(max_rel, abs(fd - an) / denom)
    return max_rel


def _eval_loss_full(params: MlpParams, X: np.ndarray, Y: np.ndarray) -> float:
    out = forward(params, X)
    diff = out - Y
    return float(np.mean(diff * diff))
