"""Unrolled solver with learned per-layer parameters.

The conjugate-gradient solver is treated as a fixed K-layer network whose
per-layer scalars (alpha_red, the denoiser alpha, and rho for the PnP
variant) are trained with full-batch Adam.  Positivity is kept by storing
unconstrained values theta and decoding with softplus.  Supervised training
minimizes MSE against clean targets; the Noise2Noise mode re-noises each
observation and uses the original observation as the target, so no clean
signals are needed.

Gradients come from central finite differences over the decoded parameters
(denoiser-agnostic) or, for the LR denoiser, from an exact forward-mode
sweep through the solver recursion in the spectral domain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit as _sigmoid

from .denoisers import DEFAULT_PNP_ITERS, Denoiser
from .exceptions import ConfigError, TrainingError
from .graphs import Laplacian, SpectralDecomp, eigendecompose, gft
from .red import RedProblem, red_cg_solve

FD_STEP = 1e-6
_N2N_STREAM = 3  # RNG stream tag for re-noising draws


def softplus(theta):
    return np.logaddexp(0.0, np.asarray(theta, dtype=float))


def softplus_inv(alpha):
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("softplus inverse needs strictly positive values")
    return alpha + np.log1p(-np.exp(-alpha))


def _layer_array(values, K, name) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (K + 1,):
        raise ValueError(f"{name} must have length K+1 = {K + 1}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class UnrolledParams:
    """Per-layer solver parameters, indices 0..K.

    Index 0 parameterizes the solver's initialization lines and indices
    1..K the loop bodies; with the zero initial iterate the index-0 values
    never influence the output, but they are kept so the layer count and
    the serialized parameter count stay aligned with the unrolled depth
    (2(K+1) values for the LR variant, 3(K+1) for PnP).

    Alphas may be zero in the container; the training path goes through the
    softplus encoding and therefore only ever produces strictly positive
    values.
    """

    K: int
    denoiser_kind: str
    alpha_red_layers: np.ndarray
    alpha_denoiser_layers: np.ndarray
    pnp_rho_layers: np.ndarray | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.denoiser_kind not in ("lr", "pnp"):
            raise ValueError(f"unknown denoiser kind {self.denoiser_kind!r}")
        a_red = _layer_array(self.alpha_red_layers, self.K, "alpha_red_layers")
        a_den = _layer_array(self.alpha_denoiser_layers, self.K, "alpha_denoiser_layers")
        if np.any(a_red < 0) or np.any(a_den < 0):
            raise ValueError("alpha layers must be nonnegative")
        object.__setattr__(self, "alpha_red_layers", a_red)
        object.__setattr__(self, "alpha_denoiser_layers", a_den)
        if self.denoiser_kind == "pnp":
            if self.pnp_rho_layers is None:
                raise ValueError("pnp variant needs pnp_rho_layers")
            rho = _layer_array(self.pnp_rho_layers, self.K, "pnp_rho_layers")
            if np.any(rho <= 0):
                raise ValueError("pnp_rho_layers must be strictly positive")
            object.__setattr__(self, "pnp_rho_layers", rho)
        elif self.pnp_rho_layers is not None:
            raise ValueError("pnp_rho_layers only applies to the pnp variant")

    @property
    def n_params(self) -> int:
        per_layer = 3 if self.denoiser_kind == "pnp" else 2
        return per_layer * (self.K + 1)

    @classmethod
    def constant(cls, K, denoiser_kind, alpha_red, alpha_denoiser, rho=None):
        """All layers set to the same (flat) scalars."""
        fill = lambda v: np.full(K + 1, float(v))
        return cls(
            K=K,
            denoiser_kind=denoiser_kind,
            alpha_red_layers=fill(alpha_red),
            alpha_denoiser_layers=fill(alpha_denoiser),
            pnp_rho_layers=fill(rho) if denoiser_kind == "pnp" else None,
        )

    def to_theta(self) -> np.ndarray:
        """Unconstrained encoding (softplus inverse); needs positive values."""
        parts = [self.alpha_red_layers, self.alpha_denoiser_layers]
        if self.denoiser_kind == "pnp":
            parts.append(self.pnp_rho_layers)
        return np.concatenate([softplus_inv(p) for p in parts])

    @classmethod
    def from_theta(cls, K, denoiser_kind, theta):
        theta = np.asarray(theta, dtype=float)
        per_layer = 3 if denoiser_kind == "pnp" else 2
        if theta.shape != (per_layer * (K + 1),):
            raise ValueError(f"theta must have {per_layer * (K + 1)} entries")
        n = K + 1
        return cls(
            K=K,
            denoiser_kind=denoiser_kind,
            alpha_red_layers=softplus(theta[:n]),
            alpha_denoiser_layers=softplus(theta[n : 2 * n]),
            pnp_rho_layers=softplus(theta[2 * n :]) if per_layer == 3 else None,
        )

    def to_json_dict(self) -> dict:
        out = {
            "K": self.K,
            "denoiser_kind": self.denoiser_kind,
            "alpha_red_layers": self.alpha_red_layers.tolist(),
            "alpha_denoiser_layers": self.alpha_denoiser_layers.tolist(),
        }
        if self.pnp_rho_layers is not None:
            out["pnp_rho_layers"] = self.pnp_rho_layers.tolist()
        return out

    @classmethod
    def from_json_dict(cls, data: dict):
        allowed = {"K", "denoiser_kind", "alpha_red_layers", "alpha_denoiser_layers", "pnp_rho_layers"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown parameter-file keys: {sorted(unknown)}")
        missing = {"K", "denoiser_kind", "alpha_red_layers", "alpha_denoiser_layers"} - set(data)
        if missing:
            raise ConfigError(f"parameter file missing keys: {sorted(missing)}")
        return cls(
            K=int(data["K"]),
            denoiser_kind=data["denoiser_kind"],
            alpha_red_layers=np.asarray(data["alpha_red_layers"], dtype=float),
            alpha_denoiser_layers=np.asarray(data["alpha_denoiser_layers"], dtype=float),
            pnp_rho_layers=(
                np.asarray(data["pnp_rho_layers"], dtype=float)
                if data.get("pnp_rho_layers") is not None
                else None
            ),
        )


def save_params(params: UnrolledParams, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(params.to_json_dict(), fh, indent=2)
        fh.write("\n")


def load_params(path) -> UnrolledParams:
    with open(path, "r", encoding="ascii") as fh:
        return UnrolledParams.from_json_dict(json.load(fh))


def save_loss_history(history, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("epoch,loss\n")
        for e, v in enumerate(history):
            fh.write(f"{e},{v:.17g}\n")


@dataclass(frozen=True)
class TrainSample:
    """One training signal; ``target`` is the clean signal in supervised
    mode and is ignored by Noise2Noise.  ``y`` may be (N,) or (N, S) with
    columns counting as independent realizations."""

    y: np.ndarray
    target: np.ndarray | None = None


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "supervised"
    learning_rate: float = 0.01
    epochs: int = 200
    sigma_n2n_range: tuple | None = None
    seed: int = 0
    gradient_method: str = "finite_difference"

    def __post_init__(self):
        if self.mode not in ("supervised", "noise2noise"):
            raise ValueError(f"unknown training mode {self.mode!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.gradient_method not in ("finite_difference", "analytic_linear"):
            raise ValueError(f"unknown gradient method {self.gradient_method!r}")
        if self.sigma_n2n_range is not None:
            lo, hi = self.sigma_n2n_range
            if lo < 0 or hi < lo:
                raise ValueError("sigma_n2n_range must satisfy 0 <= lo <= hi")


def unrolled_forward(
    lap: Laplacian,
    y: np.ndarray,
    params: UnrolledParams,
    decomp: SpectralDecomp | None = None,
    pnp_iters: int = DEFAULT_PNP_ITERS,
) -> np.ndarray:
    """K-layer solver pass with ``params``; the trained forward model."""
    denoiser = Denoiser(
        kind=params.denoiser_kind,
        alpha=float(params.alpha_denoiser_layers[0]),
        rho=float(params.pnp_rho_layers[0]) if params.denoiser_kind == "pnp" else None,
        iters=pnp_iters,
    )
    prob = RedProblem(
        y=y,
        alpha_red=float(params.alpha_red_layers[0]),
        denoiser=denoiser,
        lap=lap,
        decomp=decomp,
    )
    report = red_cg_solve(
        prob,
        params.K,
        alpha_red_layers=params.alpha_red_layers,
        alpha_denoiser_layers=params.alpha_denoiser_layers,
        pnp_rho_layers=params.pnp_rho_layers,
    )
    return report.x


def mse(x_hat: np.ndarray, x_star: np.ndarray) -> float:
    x_hat = np.asarray(x_hat, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if x_hat.shape != x_star.shape:
        raise ValueError(f"shape mismatch: {x_hat.shape} vs {x_star.shape}")
    return float(np.mean((x_hat - x_star) ** 2))


def rmse(x_hat: np.ndarray, x_star: np.ndarray) -> float:
    return float(np.sqrt(mse(x_hat, x_star)))


def make_n2n_pair(y: np.ndarray, sigma_range, rng: np.random.Generator):
    """Re-noised input and original observation as the (input, target) pair.

    The noise level is drawn uniformly from ``sigma_range`` (one draw per
    column for batched input; the upper bound may be a per-column array).
    """
    y = np.asarray(y, dtype=float)
    lo, hi = sigma_range
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo < 0) or np.any(hi < lo):
        raise ValueError("sigma_range must satisfy 0 <= lo <= hi")
    if y.ndim == 1:
        sigma = rng.uniform(lo, hi)
    else:
        sigma = rng.uniform(np.broadcast_to(lo, (y.shape[1],)), np.broadcast_to(hi, (y.shape[1],)))
    return y + sigma * rng.standard_normal(y.shape), y


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int

    @classmethod
    def fresh(cls, n: int):
        return cls(m=np.zeros(n), v=np.zeros(n), t=0)


def adam_step(theta, grad, state=None, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam update; returns the new point and state."""
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if grad.shape != theta.shape:
        raise ValueError("grad shape must match theta")
    if state is None:
        state = AdamState.fresh(theta.size)
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    theta_next = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
    return theta_next, AdamState(m=m, v=v, t=t)


def _epoch_pairs(samples, config: TrainConfig, epoch: int):
    """(input, target) arrays for one epoch.

    Noise2Noise draws are keyed on the absolute epoch index and sample
    index, so a resumed run re-creates the exact draws of the original.
    """
    pairs = []
    for idx, sample in enumerate(samples):
        y = np.asarray(sample.y, dtype=float)
        if config.mode == "supervised":
            if sample.target is None:
                raise ValueError("supervised training needs clean targets")
            pairs.append((y, np.asarray(sample.target, dtype=float)))
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence([config.seed, _N2N_STREAM, epoch, idx])
            )
            if config.sigma_n2n_range is not None:
                rng_range = config.sigma_n2n_range
            else:
                rng_range = (0.0, 0.4 * np.max(np.abs(y), axis=0))
            pairs.append(make_n2n_pair(y, rng_range, rng))
    return pairs


def _dataset_loss(pairs, lap, decomp, K, kind, theta):
    params = UnrolledParams.from_theta(K, kind, theta)
    total = 0.0
    for y, target in pairs:
        total += mse(unrolled_forward(lap, y, params, decomp=decomp), target)
    return total / len(pairs)


def _fd_loss_grad(pairs, lap, decomp, K, kind, theta):
    loss = _dataset_loss(pairs, lap, decomp, K, kind, theta)
    grad = np.zeros_like(theta)
    for j in range(theta.size):
        h = FD_STEP * max(1.0, abs(theta[j]))
        plus = theta.copy()
        plus[j] += h
        minus = theta.copy()
        minus[j] -= h
        grad[j] = (
            _dataset_loss(pairs, lap, decomp, K, kind, plus)
            - _dataset_loss(pairs, lap, decomp, K, kind, minus)
        ) / (2.0 * h)
    return loss, grad


def _analytic_loss_grad(pairs, decomp, K, theta):
    """Exact gradient for the LR variant by forward-mode differentiation.

    The whole unrolled recursion is diagonal in the eigenbasis, so the pass
    runs on GFT coefficients; tangents w.r.t. every theta entry are carried
    alongside each intermediate quantity.  Matches the solver's arithmetic
    (no early-exit guards), which is exact whenever no column converges
    early.
    """
    lam = decomp.eigenvalues
    n_layer = K + 1
    P = 2 * n_layer
    th_red, th_lr = theta[:n_layer], theta[n_layer:]
    a_red = softplus(th_red)
    a_lr = softplus(th_lr)
    sig_red = _sigmoid(th_red)
    sig_lr = _sigmoid(th_lr)

    # Per-layer spectral shortfalls s = 1 - 1/(1 + a λ) and their theta-derivatives.
    f = 1.0 / (1.0 + a_lr[:, None] * lam[None, :])  # (K+1, N)
    s = 1.0 - f
    ds_lr = lam[None, :] * f * f * sig_lr[:, None]

    total_loss = 0.0
    total_grad = np.zeros(P)
    for y_node, t_node in pairs:
        z = gft(decomp, y_node)
        t = gft(decomp, t_node)
        squeeze = z.ndim == 1
        if squeeze:
            z = z[:, None]
            t = t[:, None]
        N, S = z.shape

        x = np.zeros_like(z)
        dx = np.zeros((P, N, S))
        g = -z
        dg = np.zeros((P, N, S))
        p = z.copy()
        dp = np.zeros((P, N, S))
        gsq = np.sum(g * g, axis=0)
        dgsq = np.zeros((P, S))
        for k in range(1, K + 1):
            jr, jl = k, n_layer + k
            sk = s[k][:, None]
            ar = a_red[k]
            sp = sk * p
            ap = p + ar * sp
            dap = dp + ar * (sk * dp)
            dap[jr] += sig_red[k] * sp
            dap[jl] += ar * (ds_lr[k][:, None] * p)
            denom = np.sum(p * ap, axis=0)
            ddenom = np.sum(dp * ap + p * dap, axis=1)
            num = -np.sum(p * g, axis=0)
            dnum = -np.sum(dp * g + p * dg, axis=1)
            tau = num / denom
            dtau = (dnum * denom - num * ddenom) / (denom * denom)
            x = x + tau * p
            dx = dx + dtau[:, None, :] * p + tau * dp
            sx = sk * x
            g = x - z + ar * sx
            dg = dx + ar * (sk * dx)
            dg[jr] += sig_red[k] * sx
            dg[jl] += ar * (ds_lr[k][:, None] * x)
            gsq_new = np.sum(g * g, axis=0)
            dgsq_new = 2.0 * np.sum(g * dg, axis=1)
            gamma = gsq_new / gsq
            dgamma = (dgsq_new * gsq - gsq_new * dgsq) / (gsq * gsq)
            p, dp = -g + gamma * p, -dg + dgamma[:, None, :] * p + gamma * dp
            gsq, dgsq = gsq_new, dgsq_new

        resid = x - t
        total_loss += float(np.sum(resid * resid)) / resid.size
        total_grad += 2.0 * np.sum(resid[None, :, :] * dx, axis=(1, 2)) / resid.size
    n = len(pairs)
    return total_loss / n, total_grad / n


def train(
    samples,
    config: TrainConfig,
    init: UnrolledParams,
    lap: Laplacian,
    decomp: SpectralDecomp | None = None,
    start_epoch: int = 0,
):
    """Full-batch Adam over the unrolled parameters.

    Returns the final parameters and the per-epoch loss history; each entry
    is the loss at the parameters *before* that epoch's update, so a run
    resumed from serialized parameters reproduces the next epoch's loss.
    Raises :class:`TrainingError` when the loss stops being finite.
    """
    if not samples:
        raise ValueError("training needs at least one sample")
    if decomp is None:
        decomp = eigendecompose(lap)
    if config.gradient_method == "analytic_linear" and init.denoiser_kind != "lr":
        raise ValueError("analytic gradients are only available for the lr denoiser")

    theta = init.to_theta()
    state = AdamState.fresh(theta.size)
    history = []
    for epoch in range(start_epoch, start_epoch + config.epochs):
        pairs = _epoch_pairs(samples, config, epoch)
        if config.gradient_method == "analytic_linear":
            loss, grad = _analytic_loss_grad(pairs, decomp, init.K, theta)
        else:
            loss, grad = _fd_loss_grad(pairs, lap, decomp, init.K, init.denoiser_kind, theta)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise TrainingError(f"non-finite loss at epoch {epoch}", epoch=epoch)
        history.append(float(loss))
        theta, state = adam_step(theta, grad, state, lr=config.learning_rate)
    return UnrolledParams.from_theta(init.K, init.denoiser_kind, theta), history
