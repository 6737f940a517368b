"""Per-agent position approximator and its error metrics.

One hidden layer of logistic sigmoid units, linear outputs. Inputs and
targets are scaled per dimension from the training split's min/max into
[-1, 1]; without this the sigmoids saturate immediately on a 105x68 m field.
Training is full-batch Levenberg-Marquardt on the sum of squared residuals:
each epoch solves (J'J + mu*I) step = J'r, accepts the step only if the
training SSE drops (mu shrinks), otherwise retries with a larger mu.
Early stopping watches the validation SSE and restores the best-validation
parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, TrainingError
from .geometry import DataSplit, Point2


@dataclass(frozen=True)
class MlpSpec:
    n_in: int
    n_hidden: int = 36
    n_out: int = 2

    def __post_init__(self):
        if min(self.n_in, self.n_hidden, self.n_out) < 1:
            raise InvariantViolation("all network dimensions must be >= 1")

    @property
    def n_params(self) -> int:
        return self.n_hidden * self.n_in + self.n_hidden + self.n_out * self.n_hidden + self.n_out


@dataclass
class AffineScaler:
    """Per-dimension map [lo, hi] -> [-1, 1]; degenerate dimensions (hi <= lo)
    pass through unscaled."""
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, data: np.ndarray) -> "AffineScaler":
        data = np.asarray(data, dtype=float)
        return cls(lo=data.min(axis=0), hi=data.max(axis=0))

    def _span(self) -> np.ndarray:
        active = self.hi > self.lo
        return np.where(active, self.hi - self.lo, 2.0), active

    def transform(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        span, active = self._span()
        return np.where(active, 2.0 * (v - self.lo) / span - 1.0, v)

    def inverse(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        span, active = self._span()
        return np.where(active, self.lo + (t + 1.0) * span / 2.0, t)


@dataclass
class MlpModel:
    spec: MlpSpec
    w1: np.ndarray  # (n_hidden, n_in)
    b1: np.ndarray  # (n_hidden,)
    w2: np.ndarray  # (n_out, n_hidden)
    b2: np.ndarray  # (n_out,)
    input_norm: AffineScaler
    output_norm: AffineScaler


@dataclass
class TrainConfig:
    max_epochs: int = 300
    mu0: float = 1e-3
    mu_up: float = 10.0
    mu_down: float = 0.1
    mu_max: float = 1e10
    patience: int = 5
    val_check_every: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_epochs < 1 or self.patience < 1 or self.val_check_every < 1:
            raise InvariantViolation("epoch, patience and check-interval counts must be positive")
        if not (0 < self.mu_down < 1 < self.mu_up):
            raise InvariantViolation("need mu_down < 1 < mu_up")
        if not (0 < self.mu0 <= self.mu_max):
            raise InvariantViolation("need 0 < mu0 <= mu_max")


@dataclass
class TrainReport:
    epochs_run: int
    stop_reason: str  # "early_stop" | "max_epochs" | "mu_overflow"
    train_sse: list[float]
    val_sse: list[float]
    test_E: float = math.nan
    test_sse: float = math.nan
    test_max_error: float = math.nan
    test_error_std: float = math.nan


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _unpack(theta: np.ndarray, spec: MlpSpec):
    h, d, o = spec.n_hidden, spec.n_in, spec.n_out
    i = 0
    w1 = theta[i:i + h * d].reshape(h, d); i += h * d
    b1 = theta[i:i + h]; i += h
    w2 = theta[i:i + o * h].reshape(o, h); i += o * h
    b2 = theta[i:i + o]
    return w1, b1, w2, b2


def _pack(w1, b1, w2, b2) -> np.ndarray:
    return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


def _forward_normalized(theta: np.ndarray, spec: MlpSpec, xn: np.ndarray):
    w1, b1, w2, b2 = _unpack(theta, spec)
    hid = _sigmoid(xn @ w1.T + b1)
    return hid @ w2.T + b2, hid


def model_jacobian(theta: np.ndarray, spec: MlpSpec, xn: np.ndarray) -> np.ndarray:
    """d(output)/d(parameters), rows ordered sample-major then output-dim.

    Shape (n_samples * n_out, n_params); parameter order matches ``_pack``.
    """
    h, d, o = spec.n_hidden, spec.n_in, spec.n_out
    n = xn.shape[0]
    w1, b1, w2, b2 = _unpack(theta, spec)
    hid = _sigmoid(xn @ w1.T + b1)               # (n, h)
    s = hid * (1.0 - hid)                        # sigmoid slope at each unit
    g = s[:, None, :] * w2[None, :, :]           # (n, o, h): dy_o / dz1_k
    jac = np.zeros((n, o, spec.n_params))
    jac[:, :, : h * d] = np.einsum("nok,nd->nokd", g, xn).reshape(n, o, h * d)
    jac[:, :, h * d: h * d + h] = g
    off = h * d + h
    for oo in range(o):
        jac[:, oo, off + oo * h: off + (oo + 1) * h] = hid
    jac[:, :, off + o * h:] = np.eye(o)[None, :, :]
    return jac.reshape(n * o, spec.n_params)


def lm_step(jacobian: np.ndarray, residual: np.ndarray, mu: float) -> np.ndarray:
    """Solve (J'J + mu*I) step = J'r. As mu -> 0 this is the Gauss-Newton /
    normal-equations step; as mu grows it bends toward scaled gradient descent."""
    jtj = jacobian.T @ jacobian
    jtr = jacobian.T @ residual
    a = jtj + mu * np.eye(jtj.shape[0])
    return np.linalg.solve(a, jtr)


def init_params(spec: MlpSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform [-0.5, 0.5] scaled by 1/sqrt(fan-in), per layer."""
    w1 = rng.uniform(-0.5, 0.5, (spec.n_hidden, spec.n_in)) / math.sqrt(spec.n_in)
    b1 = rng.uniform(-0.5, 0.5, spec.n_hidden) / math.sqrt(spec.n_in)
    w2 = rng.uniform(-0.5, 0.5, (spec.n_out, spec.n_hidden)) / math.sqrt(spec.n_hidden)
    b2 = rng.uniform(-0.5, 0.5, spec.n_out) / math.sqrt(spec.n_hidden)
    return _pack(w1, b1, w2, b2)


def forward_batch(m: MlpModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != m.spec.n_in:
        raise InvariantViolation(f"expected {m.spec.n_in} inputs, got {x.shape[1]}")
    xn = m.input_norm.transform(x)
    yn = _sigmoid(xn @ m.w1.T + m.b1) @ m.w2.T + m.b2
    return m.output_norm.inverse(yn)


def forward(m: MlpModel, p) -> Point2:
    """Target position for one feature vector."""
    if m.spec.n_out != 2:
        raise InvariantViolation("forward() returns a Point2, model output is not 2-D")
    vec = np.asarray(getattr(p, "values", p), dtype=float).ravel()
    if vec.shape[0] != m.spec.n_in:
        raise InvariantViolation(f"expected {m.spec.n_in} inputs, got {vec.shape[0]}")
    y = forward_batch(m, vec[None, :])[0]
    return Point2(float(y[0]), float(y[1]))


def train(spec: MlpSpec, X, Y, split: DataSplit, cfg: TrainConfig) -> tuple[MlpModel, TrainReport]:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise InvariantViolation("X and Y must be 2-D with matching sample counts")
    if X.shape[0] < 3:
        raise InvariantViolation("need at least 3 samples")
    if X.shape[1] != spec.n_in or Y.shape[1] != spec.n_out:
        raise InvariantViolation("data width does not match the network spec")
    n = X.shape[0]
    for name, idx in (("train", split.train_idx), ("val", split.val_idx), ("test", split.test_idx)):
        if any(i < 0 or i >= n for i in idx):
            raise InvariantViolation(f"{name} split index out of range")
    tr = list(split.train_idx)
    if not tr:
        raise InvariantViolation("empty training split")
    if np.ptp(X[tr], axis=0).max() == 0.0:
        raise TrainingError("degenerate data: all training inputs identical")

    input_norm = AffineScaler.fit(X[tr])
    output_norm = AffineScaler.fit(Y[tr])
    xn = input_norm.transform(X[tr])
    tn = output_norm.transform(Y[tr])
    has_val = len(split.val_idx) > 0
    if has_val:
        xv = input_norm.transform(X[list(split.val_idx)])
        tv = output_norm.transform(Y[list(split.val_idx)])

    rng = np.random.default_rng(cfg.seed)
    theta = init_params(spec, rng)

    def train_residual(th):
        yn, _ = _forward_normalized(th, spec, xn)
        return (tn - yn).ravel()

    def val_sse_of(th):
        yn, _ = _forward_normalized(th, spec, xv)
        r = (tv - yn).ravel()
        return float(r @ r)

    mu = cfg.mu0
    eye = np.eye(spec.n_params)
    train_curve: list[float] = []
    val_curve: list[float] = []
    best_val = math.inf
    best_theta: np.ndarray | None = None
    bad_checks = 0
    ever_accepted = False
    stop_reason = "max_epochs"
    epochs_run = 0

    for _epoch in range(cfg.max_epochs):
        r = train_residual(theta)
        sse0 = float(r @ r)
        jac = model_jacobian(theta, spec, xn)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        sse_new = sse0
        while mu <= cfg.mu_max:
            try:
                delta = np.linalg.solve(jtj + mu * eye, jtr)
            except np.linalg.LinAlgError:
                delta = None
            if delta is not None and np.all(np.isfinite(delta)):
                r_try = train_residual(theta + delta)
                sse_try = float(r_try @ r_try)
                if sse_try < sse0:
                    theta = theta + delta
                    sse_new = sse_try
                    mu = max(mu * cfg.mu_down, 1e-20)
                    accepted = True
                    break
            mu *= cfg.mu_up
        if not accepted:
            if not ever_accepted:
                raise TrainingError("mu overflowed before any step was accepted")
            stop_reason = "mu_overflow"
            break
        ever_accepted = True
        epochs_run += 1
        assert sse_new < sse0  # accepted steps never increase training SSE
        train_curve.append(sse_new)
        vsse = math.nan
        if has_val:
            check = epochs_run % cfg.val_check_every == 0
            if check:
                vsse = val_sse_of(theta)
            elif val_curve:
                vsse = val_curve[-1]
            val_curve.append(vsse)
            if check:
                if vsse < best_val:
                    best_val = vsse
                    best_theta = theta.copy()
                    bad_checks = 0
                else:
                    bad_checks += 1
                    if bad_checks >= cfg.patience:
                        stop_reason = "early_stop"
                        break
        else:
            val_curve.append(vsse)

    if best_theta is not None:
        theta = best_theta

    w1, b1, w2, b2 = (a.copy() for a in _unpack(theta, spec))
    model = MlpModel(spec, w1, b1, w2, b2, input_norm, output_norm)
    report = TrainReport(epochs_run, stop_reason, train_curve, val_curve)
    if split.test_idx:
        te = list(split.test_idx)
        pred = forward_batch(model, X[te])
        dist = np.linalg.norm(Y[te] - pred, axis=1)
        report.test_E = float(dist.mean())
        report.test_sse = float(((Y[te] - pred) ** 2).sum())
        report.test_max_error = float(dist.max())
        report.test_error_std = float(dist.std())
    return model, report


def _as_xy(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = points.astype(float)
    else:
        seq = list(points)
        if seq and isinstance(seq[0], Point2):
            arr = np.array([[p.x, p.y] for p in seq], dtype=float)
        else:
            arr = np.asarray(seq, dtype=float)
    if arr.ndim != 2:
        raise InvariantViolation("expected a sequence of 2-D points")
    return arr


def _paired(targets, predictions) -> tuple[np.ndarray, np.ndarray]:
    t = _as_xy(targets)
    p = _as_xy(predictions)
    if t.shape != p.shape:
        raise InvariantViolation(f"length/shape mismatch: {t.shape} vs {p.shape}")
    if t.shape[0] == 0:
        raise InvariantViolation("empty point lists")
    return t, p


def metric_E(targets, predictions) -> float:
    """Mean Euclidean distance between demonstrated and predicted positions."""
    t, p = _paired(targets, predictions)
    return float(np.linalg.norm(t - p, axis=1).mean())


def metric_SSE(targets, predictions) -> float:
    """Sum over samples and coordinates of squared differences."""
    t, p = _paired(targets, predictions)
    return float(((t - p) ** 2).sum())


def metric_max_error(targets, predictions) -> float:
    """Largest per-pair Euclidean distance."""
    t, p = _paired(targets, predictions)
    return float(np.linalg.norm(t - p, axis=1).max())


def model_to_json(m: MlpModel) -> dict:
    return {
        "spec": {"n_in": m.spec.n_in, "n_hidden": m.spec.n_hidden, "n_out": m.spec.n_out},
        "w1": [[float(v) for v in row] for row in m.w1],
        "b1": [float(v) for v in m.b1],
        "w2": [[float(v) for v in row] for row in m.w2],
        "b2": [float(v) for v in m.b2],
        "input_norm": {"lo": [float(v) for v in m.input_norm.lo],
                       "hi": [float(v) for v in m.input_norm.hi]},
        "output_norm": {"lo": [float(v) for v in m.output_norm.lo],
                        "hi": [float(v) for v in m.output_norm.hi]},
    }


def model_from_json(obj) -> MlpModel:
    spec = MlpSpec(int(obj["spec"]["n_in"]), int(obj["spec"]["n_hidden"]), int(obj["spec"]["n_out"]))
    m = MlpModel(
        spec=spec,
        w1=np.array(obj["w1"], dtype=float),
        b1=np.array(obj["b1"], dtype=float),
        w2=np.array(obj["w2"], dtype=float),
        b2=np.array(obj["b2"], dtype=float),
        input_norm=AffineScaler(np.array(obj["input_norm"]["lo"], dtype=float),
                                np.array(obj["input_norm"]["hi"], dtype=float)),
        output_norm=AffineScaler(np.array(obj["output_norm"]["lo"], dtype=float),
                                 np.array(obj["output_norm"]["hi"], dtype=float)),
    )
    if m.w1.shape != (spec.n_hidden, spec.n_in) or m.w2.shape != (spec.n_out, spec.n_hidden):
        raise InvariantViolation("weight matrix shapes do not match the spec")
    if not all(np.all(np.isfinite(a)) for a in (m.w1, m.b1, m.w2, m.b2)):
        raise InvariantViolation("non-finite model parameters")
    return m
