"""Small dense feedforward network with plain SGD backpropagation.

Hidden layers are ReLU; the output layer is identity or tanh. The loss
is squared error summed over output units and averaged over the batch,
so a 1-output net on a single sample returns exactly (target - out)^2.
Everything runs in float64 numpy; no momentum, no GPU.
"""

from __future__ import annotations

import numpy as np

from typing import Sequence

OUTPUT_ACTIVATIONS = ("identity", "tanh")


class NumericError(RuntimeError):
    """A training step produced NaN or Inf parameters, loss, or gradients."""


class Mlp:
    def __init__(
        self,
        layer_dims: Sequence[int],
        output: str = "identity",
        rng: np.random.Generator | None = None,
        seed: int | None = None,
    ):
        if len(layer_dims) < 2:
            raise ValueError("need at least input and output dims")
        if any(d <= 0 for d in layer_dims):
            raise ValueError("layer dims must be positive")
        if output not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"output must be one of {OUTPUT_ACTIVATIONS}")
        self.layer_dims = list(layer_dims)
        self.output = output
        self.seed = seed
        if rng is None:
            rng = np.random.default_rng(seed)
        # uniform(-s, s), s = 1 / sqrt(fan_in); biases start at zero
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            s = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-s, s, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    # ------------------------------------------------------------------
    def forward(self, x: np.ndarray) -> np.ndarray:
        """Feedforward; x has shape (d_in,) or (batch, d_in)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.layer_dims[0]:
            raise ValueError(f"input dim {h.shape[1]} != {self.layer_dims[0]}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                np.maximum(h, 0.0, out=h)
            elif self.output == "tanh":
                h = np.tanh(h)
        return h[0] if single else h

    def gradients(self, inputs: np.ndarray, targets: np.ndarray):
        """Loss and parameter gradients for one full batch."""
        x, t = self._check_batch(inputs, targets)
        batch = x.shape[0]
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
            elif self.output == "tanh":
                h = np.tanh(h)
            acts.append(h)
        out = acts[-1]
        err = out - t
        loss = float(np.sum(err * err) / batch)
        # dL/d(out) for loss = mean over batch of sum over dims of err^2
        delta = 2.0 * err / batch
        if self.output == "tanh":
            delta = delta * (1.0 - out * out)
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(last, -1, -1):
            grads_w[i] = acts[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0.0)
        return loss, grads_w, grads_b

    def sgd_step(self, inputs: np.ndarray, targets: np.ndarray, lr: float) -> float:
        """One full-batch gradient step; returns the pre-step loss."""
        if lr < 0:
            raise ValueError("lr must be >= 0")
        loss, grads_w, grads_b = self.gradients(inputs, targets)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite loss {loss}")
        for w, b, gw, gb in zip(self.weights, self.biases, grads_w, grads_b):
            w -= lr * gw
            b -= lr * gb
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise NumericError("non-finite parameters after step")
        return loss

    def grad_check(self, inputs: np.ndarray, targets: np.ndarray, h: float = 1e-5) -> float:
        """Max relative error between backprop and central finite differences."""
        if not 1e-6 <= h <= 1e-3:
            raise ValueError("h must be in [1e-6, 1e-3]")
        _, grads_w, grads_b = self.gradients(inputs, targets)
        worst = 0.0
        for params, grads in ((self.weights, grads_w), (self.biases, grads_b)):
            for p, g in zip(params, grads):
                flat = p.reshape(-1)
                gflat = g.reshape(-1)
                for i in range(flat.size):
                    orig = flat[i]
                    flat[i] = orig + h
                    lp = self._loss(inputs, targets)
                    flat[i] = orig - h
                    lm = self._loss(inputs, targets)
                    flat[i] = orig
                    fd = (lp - lm) / (2 * h)
                    denom = max(abs(gflat[i]), abs(fd), 1e-8)
                    worst = max(worst, abs(gflat[i] - fd) / denom)
        return worst

    def _loss(self, inputs, targets) -> float:
        x, t = self._check_batch(inputs, targets)
        out = self.forward(x)
        return float(np.sum((out - t) ** 2) / x.shape[0])

    def _check_batch(self, inputs, targets):
        x = np.atleast_2d(np.asarray(inputs, dtype=float))
        t = np.atleast_2d(np.asarray(targets, dtype=float))
        if x.shape[0] != t.shape[0]:
            raise ValueError("inputs and targets must have equal length")
        if x.shape[1] != self.layer_dims[0] or t.shape[1] != self.layer_dims[-1]:
            raise ValueError("batch dims do not match the network")
        return x, t

    # ------------------------------------------------------------------
    def copy(self) -> "Mlp":
        out = Mlp.__new__(Mlp)
        out.layer_dims = list(self.layer_dims)
        out.output = self.output
        out.seed = self.seed
        out.weights = [w.copy() for w in self.weights]
        out.biases = [b.copy() for b in self.biases]
        return out

    def save(self, path) -> None:
        """Versioned text format: header, then row-major numbers per layer."""
        with open(path, "w", newline="\n") as fh:
            fh.write("mlp-v1\n")
            fh.write("dims " + " ".join(str(d) for d in self.layer_dims) + "\n")
            fh.write(f"output {self.output}\n")
            fh.write(f"seed {self.seed if self.seed is not None else 'none'}\n")
            for w, b in zip(self.weights, self.biases):
                fh.write(" ".join(repr(v) for v in w.reshape(-1)) + "\n")
                fh.write(" ".join(repr(v) for v in b) + "\n")

    @classmethod
    def load(cls, path) -> "Mlp":
        from .artifacts import ArtifactFormatError

        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != "mlp-v1":
            raise ArtifactFormatError(f"{path}: line 1: expected 'mlp-v1' header")
        try:
            dims = [int(v) for v in lines[1].split()[1:]]
            output = lines[2].split()[1]
            seed_tok = lines[3].split()[1]
        except IndexError as exc:
            raise ArtifactFormatError(f"{path}: malformed header (lines 1-4)") from exc
        net = cls.__new__(cls)
        net.layer_dims = dims
        net.output = output
        net.seed = None if seed_tok == "none" else int(seed_tok)
        net.weights = []
        net.biases = []
        lineno = 5
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            for shape, store in (((fan_in, fan_out), net.weights), ((fan_out,), net.biases)):
                if lineno - 1 >= len(lines):
                    raise ArtifactFormatError(f"{path}: line {lineno}: truncated file")
                vals = np.array([float(v) for v in lines[lineno - 1].split()])
                if vals.size != int(np.prod(shape)):
                    raise ArtifactFormatError(
                        f"{path}: line {lineno}: expected {int(np.prod(shape))} values, got {vals.size}"
                    )
                store.append(vals.reshape(shape))
                lineno += 1
        return net
