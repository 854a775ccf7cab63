"""
TinyDenoiser - Two-layer tanh network predicting diffusion noise
Forward pass, hand-written backprop and the flat parameter file format

Input features per row: [z_t, t/T, sqrt(abar_t), sqrt(1 - abar_t), condition
embedding (zeros when dropped), null flag].
"""

import os
from typing import Dict, Optional, Tuple, Union

import numpy as np

from ..errors import ConfigurationError, ShapeError
from ..schedule import NoiseSchedule
from .base_denoiser import BaseDenoiser, Condition

PARAMS_MAGIC = 7319.0
PARAMS_VERSION = 1.0
HEADER_SIZE = 6
TIME_FEATURES = 3


class TinyDenoiser(BaseDenoiser):
    """Small MLP noise predictor trained with classifier-free condition dropout"""

    def __init__(self, schedule: NoiseSchedule, dim: int, cond_dim: int, hidden: int,
                 params: Optional[Dict[str, np.ndarray]] = None,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(schedule, dim)
        if dim < 1 or cond_dim < 0 or hidden < 1:
            raise ConfigurationError("tiny network needs dim >= 1, cond_dim >= 0, hidden >= 1")
        self.cond_dim = cond_dim
        self.hidden = hidden
        self.input_dim = dim + TIME_FEATURES + cond_dim + 1

        if params is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            params = {
                "W1": rng.standard_normal((hidden, self.input_dim)) / np.sqrt(self.input_dim),
                "b1": np.zeros(hidden),
                "W2": rng.standard_normal((dim, hidden)) / np.sqrt(hidden),
                "b2": np.zeros(dim),
            }
        self.params = {name: np.asarray(value, dtype=np.float64) for name, value in params.items()}
        for name, shape in self.param_shapes().items():
            if self.params[name].shape != shape:
                raise ShapeError(f"parameter {name} must have shape {shape}")

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {
            "W1": (self.hidden, self.input_dim),
            "b1": (self.hidden,),
            "W2": (self.dim, self.hidden),
            "b2": (self.dim,),
        }

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.params[name].ravel() for name in self.param_shapes()])

    @theta.setter
    def theta(self, flat: np.ndarray):
        flat = np.asarray(flat, dtype=np.float64)
        offset = 0
        for name, shape in self.param_shapes().items():
            size = int(np.prod(shape))
            if offset + size > flat.size:
                raise ShapeError("flat parameter vector is too short")
            self.params[name] = flat[offset:offset + size].reshape(shape).copy()
            offset += size
        if offset != flat.size:
            raise ShapeError("flat parameter vector is too long")

    # ------------------------------------------------------------------
    # Features and forward/backward
    # ------------------------------------------------------------------

    def features(self, z_t: np.ndarray, t: np.ndarray, embeddings: Optional[np.ndarray],
                 null: np.ndarray) -> np.ndarray:
        """Stack network inputs for a batch of rows"""
        z_t = np.asarray(z_t, dtype=np.float64)
        rows = z_t.shape[0]
        t = np.broadcast_to(np.asarray(t), (rows,))
        abar = self.schedule.alpha_bars[t]
        time = np.stack([t / self.schedule.steps, np.sqrt(abar), np.sqrt(1.0 - abar)], axis=1)

        null = np.broadcast_to(np.asarray(null, dtype=bool), (rows,))
        if embeddings is None:
            emb = np.zeros((rows, self.cond_dim))
        else:
            emb = np.broadcast_to(np.asarray(embeddings, dtype=np.float64), (rows, self.cond_dim))
        emb = np.where(null[:, None], 0.0, emb)
        return np.concatenate([z_t, time, emb, null[:, None].astype(np.float64)], axis=1)

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        hidden = np.tanh(x @ self.params["W1"].T + self.params["b1"])
        return hidden @ self.params["W2"].T + self.params["b2"], hidden

    def loss_and_grad(self, x: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
        """Mean squared error over all outputs and its gradient w.r.t. theta"""
        out, hidden = self.forward(x)
        residual = out - target
        loss = float(np.mean(residual ** 2))

        d_out = 2.0 * residual / residual.size
        g_w2 = d_out.T @ hidden
        g_b2 = d_out.sum(axis=0)
        d_pre = (d_out @ self.params["W2"]) * (1.0 - hidden ** 2)
        g_w1 = d_pre.T @ x
        g_b1 = d_pre.sum(axis=0)
        grad = np.concatenate([g_w1.ravel(), g_b1, g_w2.ravel(), g_b2])
        return loss, grad

    # ------------------------------------------------------------------
    # Denoiser interface
    # ------------------------------------------------------------------

    def _predict(self, z_t: np.ndarray, t: int, embedding: Optional[np.ndarray],
                 null: bool) -> np.ndarray:
        lead = z_t.shape[:-1]
        flat = z_t.reshape(-1, self.dim)
        x = self.features(flat, np.full(flat.shape[0], t), embedding, np.full(flat.shape[0], null))
        out, _ = self.forward(x)
        return out.reshape(lead + (self.dim,))

    def predict_conditional(self, z_t, t, cond: Condition):
        if cond.embedding is None:
            raise ConfigurationError("tiny network conditions on embeddings only")
        embedding = np.asarray(cond.embedding, dtype=np.float64)
        if embedding.shape != (self.cond_dim,):
            raise ShapeError(f"condition embedding must have size {self.cond_dim}")
        return self._predict(z_t, t, embedding, False)

    def predict_unconditional(self, z_t, t):
        return self._predict(z_t, t, None, True)


def _npy_path(path: Union[str, os.PathLike]) -> str:
    path = os.fspath(path)
    return path if path.endswith(".npy") else path + ".npy"


def save_denoiser(net: TinyDenoiser, path: Union[str, os.PathLike]) -> str:
    path = _npy_path(path)
    header = np.array([PARAMS_MAGIC, PARAMS_VERSION, net.dim, net.cond_dim, net.hidden,
                       net.schedule.steps], dtype=np.float64)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    np.save(path, np.concatenate([header, net.theta]))
    return path


def load_denoiser(path: Union[str, os.PathLike], schedule: NoiseSchedule) -> TinyDenoiser:
    path = _npy_path(path)
    flat = np.load(path)
    if flat.ndim != 1 or flat.size < HEADER_SIZE or flat[0] != PARAMS_MAGIC:
        raise ConfigurationError(f"{path} is not a tiny denoiser parameter file")
    if flat[1] != PARAMS_VERSION:
        raise ConfigurationError(f"unsupported parameter file version {flat[1]}")
    dim, cond_dim, hidden, steps = (int(v) for v in flat[2:HEADER_SIZE])
    if steps != schedule.steps:
        raise ConfigurationError(
            f"network was trained for T={steps} but the schedule has T={schedule.steps}")
    net = TinyDenoiser(schedule, dim, cond_dim, hidden)
    net.theta = flat[HEADER_SIZE:]
    return net
