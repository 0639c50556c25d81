"""Autoregressive input-output hidden Markov models, trained by EM.

One model is fitted per event class.  The latent chain h_t moves under
log-linear transitions driven by the outside stream,

    P(h_t = j | h_{t-1} = i, x_t) = exp(w_ij . x_t) / sum_l exp(w_il . x_t),

and each state emits the inside observation through a Gaussian whose mean
is scaled by the current input and the previous observation:

    z_t | h_t = i  ~  N((1 + a_i . x_t + b_i . z_{t-1}) mu_i, Sigma_i).

The ``io`` variant pins b_i = 0 (no autoregression); the ``hmm`` variant
additionally pins a_i = 0 and replaces the transition input by a constant
bias coordinate, making transitions input-independent.

The E-step is a scaled forward-backward pass over the inhomogeneous chain;
the M-step solves the coupled mean parameters by alternating exact weighted
least squares, updates each covariance from posterior-weighted residuals
(eigenvalue-floored), refits the initial distribution from the t=1
posteriors, and improves the transition weights by gradient ascent with
backtracking.  Every piece either maximizes or never decreases the expected
complete-data log-likelihood, so the training log-likelihood trace is
non-decreasing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .numerics import make_rng, softmax_rows

log = logging.getLogger(__name__)

VARIANT_AIO = "aio"
VARIANT_IO = "io"
VARIANT_HMM = "hmm"
VARIANTS = (VARIANT_AIO, VARIANT_IO, VARIANT_HMM)

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class AioHmmModel:
    """Per-state parameters: mu (S, dz), a (S, dx), b (S, dz),
    sigma (S, dz, dz), transition weights w (S, S, dt), initial pi (S,).

    ``dt`` is dx for the aio/io variants and 1 (a bias) for the hmm variant.
    """

    variant: str
    mu: np.ndarray
    a: np.ndarray
    b: np.ndarray
    sigma: np.ndarray
    w: np.ndarray
    pi: np.ndarray

    @property
    def states(self) -> int:
        return self.mu.shape[0]

    @property
    def dim_z(self) -> int:
        return self.mu.shape[1]

    @property
    def dim_x(self) -> int:
        return self.a.shape[1]

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        S, dz, dx = self.states, self.dim_z, self.dim_x
        dt = dx if self.variant != VARIANT_HMM else 1
        if self.sigma.shape != (S, dz, dz):
            raise ValueError(f"sigma has shape {self.sigma.shape}, expected {(S, dz, dz)}")
        if self.w.shape != (S, S, dt):
            raise ValueError(f"w has shape {self.w.shape}, expected {(S, S, dt)}")
        if self.pi.shape != (S,) or abs(float(self.pi.sum()) - 1.0) > 1e-9:
            raise ValueError("pi must be a distribution over states")
        if self.variant in (VARIANT_IO, VARIANT_HMM) and np.any(self.b):
            raise ValueError(f"variant {self.variant!r} requires b = 0")
        if self.variant == VARIANT_HMM and np.any(self.a):
            raise ValueError("variant 'hmm' requires a = 0")
        for i in range(S):
            np.linalg.cholesky(self.sigma[i])  # raises if not PD

    def copy(self) -> "AioHmmModel":
        return AioHmmModel(
            variant=self.variant, mu=self.mu.copy(), a=self.a.copy(), b=self.b.copy(),
            sigma=self.sigma.copy(), w=self.w.copy(), pi=self.pi.copy(),
        )


@dataclass
class PosteriorStats:
    """E-step output for one sequence: gamma (T, S) state posteriors,
    xi (T-1, S, S) transition posteriors, and the data log-likelihood."""

    gamma: np.ndarray
    xi: np.ndarray
    loglik: float


@dataclass
class EmConfig:
    states: int = 3
    variant: str = VARIANT_AIO
    max_iter: int = 50
    tol: float = 1e-6              # relative loglik improvement
    seed: int = 0
    cov_floor: float = 1e-6        # smallest allowed covariance eigenvalue
    mean_rounds: int = 3           # alternating WLS rounds for (mu, a, b)
    w_step: float = 1e-2
    w_iters: int = 25

    def validate(self) -> None:
        if self.states < 1:
            raise ValueError("need at least one state")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def to_dict(self) -> dict:
        return {
            "states": self.states, "variant": self.variant, "max_iter": self.max_iter,
            "tol": self.tol, "seed": self.seed, "cov_floor": self.cov_floor,
            "mean_rounds": self.mean_rounds, "w_step": self.w_step, "w_iters": self.w_iters,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# Model pieces
# ---------------------------------------------------------------------------


def transition_inputs(m: AioHmmModel, xs: np.ndarray) -> np.ndarray:
    """Effective transition features: x_t, or a constant bias for 'hmm'."""
    if m.variant == VARIANT_HMM:
        return np.ones((xs.shape[0], 1))
    return xs


def transition_row(m: AioHmmModel, i: int, x: np.ndarray) -> np.ndarray:
    """Distribution over successor states when leaving state i under input x."""
    x_eff = transition_inputs(m, np.asarray(x, dtype=float)[None, :])[0]
    logits = m.w[i] @ x_eff
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def transition_matrices(m: AioHmmModel, xs: np.ndarray) -> np.ndarray:
    """(T, S, S) stochastic matrices; row [t, i] is P(. | i, x_t)."""
    xe = transition_inputs(m, xs)
    logits = np.einsum("ijk,tk->tij", m.w, xe)
    shifted = logits - logits.max(axis=2, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=2, keepdims=True)


def log_transition_matrices(m: AioHmmModel, xs: np.ndarray) -> np.ndarray:
    """(T, S, S) log transition probabilities.

    Computed as log-softmax of the finite logits, so entries never reach
    -inf even when the probabilities themselves underflow.
    """
    xe = transition_inputs(m, xs)
    logits = np.einsum("ijk,tk->tij", m.w, xe)
    shifted = logits - logits.max(axis=2, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=2, keepdims=True))


def shifted_observations(zs: np.ndarray) -> np.ndarray:
    """z_{t-1} rows with the boundary z_0 taken as the zero vector."""
    prev = np.zeros_like(zs)
    prev[1:] = zs[:-1]
    return prev


def emission_scales(m: AioHmmModel, xs: np.ndarray, z_prev: np.ndarray) -> np.ndarray:
    """(T, S) mean scale factors 1 + a_i.x_t + b_i.z_{t-1} per state."""
    s = 1.0 + xs @ m.a.T
    if m.variant == VARIANT_AIO:
        s = s + z_prev @ m.b.T
    return s


def emission_logpdf(
    m: AioHmmModel, i: int, z: np.ndarray, x: np.ndarray, z_prev: np.ndarray
) -> float:
    """Gaussian log density of one observation under state i."""
    logb = emission_logprobs(
        m, np.asarray(x, float)[None, :], np.asarray(z, float)[None, :],
        z_prev=np.asarray(z_prev, float)[None, :],
    )
    return float(logb[0, i])


def emission_logprobs(
    m: AioHmmModel, xs: np.ndarray, zs: np.ndarray, z_prev: np.ndarray | None = None
) -> np.ndarray:
    """(T, S) log emission densities for a whole sequence."""
    if z_prev is None:
        z_prev = shifted_observations(zs)
    scales = emission_scales(m, xs, z_prev)
    T, S, dz = zs.shape[0], m.states, m.dim_z
    out = np.empty((T, S))
    for i in range(S):
        chol = np.linalg.cholesky(m.sigma[i])
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        resid = zs - scales[:, i][:, None] * m.mu[i]
        y = np.linalg.solve(chol, resid.T)
        quad = np.sum(y * y, axis=0)
        out[:, i] = -0.5 * (dz * LOG_2PI + logdet + quad)
    return out


# ---------------------------------------------------------------------------
# E-step
# ---------------------------------------------------------------------------


def forward_backward(m: AioHmmModel, xs: np.ndarray, zs: np.ndarray) -> PosteriorStats:
    """Forward-backward over the input-driven chain.

    The fast path is the classical scaled recursion with per-step emission
    shifts.  When a step still underflows to an all-zero vector (a model
    evaluated on data it assigns essentially no density to), the pass is
    redone fully in log space, which cannot vanish for finite inputs.
    """
    xs = np.asarray(xs, dtype=float)
    zs = np.asarray(zs, dtype=float)
    if xs.ndim != 2 or zs.ndim != 2 or xs.shape[0] != zs.shape[0] or xs.shape[0] == 0:
        raise ValueError(f"need equal-length nonempty streams, got {xs.shape} and {zs.shape}")
    try:
        return _forward_backward_scaled(m, xs, zs)
    except FloatingPointError:
        return _forward_backward_log(m, xs, zs)


def _forward_backward_scaled(m: AioHmmModel, xs: np.ndarray, zs: np.ndarray) -> PosteriorStats:
    T, S = xs.shape[0], m.states
    logb = emission_logprobs(m, xs, zs)
    shift = logb.max(axis=1)
    if not np.all(np.isfinite(shift)):
        t_bad = int(np.argmin(np.isfinite(shift)))
        raise FloatingPointError(f"all emission densities vanished at step {t_bad}")
    b = np.exp(logb - shift[:, None])
    A = transition_matrices(m, xs)

    alpha = np.empty((T, S))
    scale = np.empty(T)
    alpha[0] = m.pi * b[0]
    scale[0] = alpha[0].sum()
    if scale[0] <= 0.0:
        raise FloatingPointError("forward pass underflowed at step 0")
    alpha[0] /= scale[0]
    for t in range(1, T):
        alpha[t] = (alpha[t - 1] @ A[t]) * b[t]
        scale[t] = alpha[t].sum()
        if scale[t] <= 0.0:
            raise FloatingPointError(f"forward pass underflowed at step {t}")
        alpha[t] /= scale[t]

    beta = np.empty((T, S))
    beta[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = (A[t + 1] @ (b[t + 1] * beta[t + 1])) / scale[t + 1]

    gamma = alpha * beta
    xi = np.empty((T - 1, S, S))
    for t in range(1, T):
        xi[t - 1] = (alpha[t - 1][:, None] * A[t]) * (b[t] * beta[t])[None, :] / scale[t]

    loglik = float(np.sum(np.log(scale)) + np.sum(shift))
    return PosteriorStats(gamma=gamma, xi=xi, loglik=loglik)


def _forward_backward_log(m: AioHmmModel, xs: np.ndarray, zs: np.ndarray) -> PosteriorStats:
    T, S = xs.shape[0], m.states
    logb = emission_logprobs(m, xs, zs)
    logA = log_transition_matrices(m, xs)
    with np.errstate(divide="ignore"):  # pi entries may be exactly zero
        logpi = np.log(m.pi)

    la = np.empty((T, S))
    la[0] = logpi + logb[0]
    for t in range(1, T):
        la[t] = np.logaddexp.reduce(la[t - 1][:, None] + logA[t], axis=0) + logb[t]

    lb = np.empty((T, S))
    lb[T - 1] = 0.0
    for t in range(T - 2, -1, -1):
        lb[t] = np.logaddexp.reduce(logA[t + 1] + (logb[t + 1] + lb[t + 1])[None, :], axis=1)

    loglik = float(np.logaddexp.reduce(la[T - 1]))
    if not np.isfinite(loglik):
        raise FloatingPointError("log-space forward pass degenerated")
    gamma = np.exp(la + lb - loglik)
    xi = np.empty((T - 1, S, S))
    for t in range(1, T):
        xi[t - 1] = np.exp(la[t - 1][:, None] + logA[t] + (logb[t] + lb[t])[None, :] - loglik)
    return PosteriorStats(gamma=gamma, xi=xi, loglik=loglik)


def sequence_loglik(m: AioHmmModel, xs: np.ndarray, zs: np.ndarray) -> float:
    """log P(z_1..z_T | x_1..x_T) via the forward pass."""
    return forward_backward(m, xs, zs).loglik


# ---------------------------------------------------------------------------
# M-step
# ---------------------------------------------------------------------------


def _floor_covariance(sigma: np.ndarray, floor: float, diag: dict) -> np.ndarray:
    """Symmetrize and clip eigenvalues from below."""
    sym = 0.5 * (sigma + sigma.T)
    vals, vecs = np.linalg.eigh(sym)
    if float(vals.min()) < floor:
        diag["floored"] = diag.get("floored", 0) + 1
        log.debug("covariance eigenvalue %.3g floored to %.3g", float(vals.min()), floor)
    return (vecs * np.maximum(vals, floor)) @ vecs.T


def _update_mean_params(
    m: AioHmmModel, i: int, Z: np.ndarray, X: np.ndarray, Zprev: np.ndarray,
    g: np.ndarray, config: EmConfig, diag: dict,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Alternating exact WLS for (mu_i, a_i, b_i) on concatenated data.

    Holding (a, b) fixed, the optimal mu has the closed form
    sum(g s z) / sum(g s^2) with s = 1 + a.x + b.z_prev; holding mu fixed,
    (a, b) solve a gamma-weighted normal equation.  Each solve can only
    improve the expected complete-data log-likelihood.
    """
    mu, a, b = m.mu[i].copy(), m.a[i].copy(), m.b[i].copy()
    # With a single state the scale couplings are redundant with mu itself,
    # so they stay pinned at zero and the update degenerates to a weighted mean.
    fit_a = m.variant != VARIANT_HMM and m.states > 1
    fit_b = m.variant == VARIANT_AIO and m.states > 1
    sigma_inv = np.linalg.inv(m.sigma[i])

    for _ in range(config.mean_rounds):
        s = 1.0 + X @ a + Zprev @ b
        denom = float(np.sum(g * s * s))
        if denom > 1e-12:
            mu = (g * s) @ Z / denom
        if not (fit_a or fit_b):
            break
        alpha = float(mu @ sigma_inv @ mu)
        if alpha <= 1e-12:
            break
        beta = Z @ (sigma_inv @ mu)
        cols = []
        if fit_a:
            cols.append(X)
        if fit_b:
            cols.append(Zprev)
        R = np.concatenate(cols, axis=1)
        lhs = (R * g[:, None]).T @ R
        rhs = (R * g[:, None]).T @ (beta / alpha - 1.0)
        try:
            theta = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            # Binary or constant features routinely make the design
            # rank-deficient; the system is still consistent, so a tiny
            # ridge recovers the natural solution.
            diag["ridge"] = diag.get("ridge", 0) + 1
            log.debug("singular mean design for state %d; applying ridge", i)
            scale = 1.0 + float(np.trace(lhs)) / lhs.shape[0]
            theta = np.linalg.solve(lhs + 1e-9 * scale * np.eye(lhs.shape[0]), rhs)
        offset = 0
        if fit_a:
            a = theta[offset : offset + X.shape[1]]
            offset += X.shape[1]
        if fit_b:
            b = theta[offset:]
    return mu, a, b


def _transition_objective(w_i: np.ndarray, Xe: np.ndarray, Xi_i: np.ndarray) -> float:
    """Expected transition log-likelihood for one source state."""
    logits = Xe @ w_i.T
    logp = logits - logits.max(axis=1, keepdims=True)
    logp = logp - np.log(np.exp(logp).sum(axis=1, keepdims=True))
    return float(np.sum(Xi_i * logp))


def _update_transitions(
    m: AioHmmModel, Xe: np.ndarray, Xi: np.ndarray, config: EmConfig
) -> np.ndarray:
    """Gradient ascent with backtracking on the expected transition term.

    Xe: (R, dt) transition inputs for every within-sequence step t >= 2;
    Xi: (R, S, S) matching transition posteriors.
    """
    S = m.states
    w = m.w.copy()
    if Xe.shape[0] == 0:
        return w
    for i in range(S):
        w_i = w[i]
        q = _transition_objective(w_i, Xe, Xi[:, i, :])
        for _ in range(config.w_iters):
            p = softmax_rows(Xe @ w_i.T)
            coeff = Xi[:, i, :] - Xi[:, i, :].sum(axis=1, keepdims=True) * p
            grad = coeff.T @ Xe
            step = config.w_step
            improved = False
            while step > 1e-12:
                cand = w_i + step * grad
                q_cand = _transition_objective(cand, Xe, Xi[:, i, :])
                if q_cand >= q:
                    w_i, q, improved = cand, q_cand, True
                    break
                step *= 0.5
            if not improved:
                break
        w[i] = w_i
    return w


def m_step(
    sequences: list[tuple[np.ndarray, np.ndarray]],
    stats: list[PosteriorStats],
    m: AioHmmModel,
    config: EmConfig,
    diag: dict | None = None,
) -> AioHmmModel:
    """Maximization step over all sequences' posterior statistics.

    ``diag``, when given, accumulates counts of ridge-regularized solves
    and floored covariances so callers can report them once per fit.
    """
    if diag is None:
        diag = {}
    S = m.states
    Z = np.concatenate([zs for _, zs in sequences], axis=0)
    X = np.concatenate([xs for xs, _ in sequences], axis=0)
    Zprev = np.concatenate([shifted_observations(zs) for _, zs in sequences], axis=0)
    G = np.concatenate([st.gamma for st in stats], axis=0)

    Xe = np.concatenate(
        [transition_inputs(m, xs)[1:] for xs, _ in sequences if xs.shape[0] > 1], axis=0
    ) if any(xs.shape[0] > 1 for xs, _ in sequences) else np.zeros((0, m.w.shape[2]))
    Xi = np.concatenate(
        [st.xi for st in stats if st.xi.shape[0] > 0], axis=0
    ) if any(st.xi.shape[0] > 0 for st in stats) else np.zeros((0, S, S))

    new = m.copy()
    for i in range(S):
        g = G[:, i]
        weight = float(g.sum())
        if weight <= 1e-12:
            log.warning("state %d received no posterior mass; left unchanged", i)
            continue
        mu, a, b = _update_mean_params(m, i, Z, X, Zprev, g, config, diag)
        s = 1.0 + X @ a + Zprev @ b
        resid = Z - s[:, None] * mu
        cov = (resid * g[:, None]).T @ resid / weight
        new.mu[i], new.a[i], new.b[i] = mu, a, b
        new.sigma[i] = _floor_covariance(cov, config.cov_floor, diag)

    new.w = _update_transitions(m, Xe, Xi, config)
    pi = np.sum([st.gamma[0] for st in stats], axis=0)
    new.pi = pi / pi.sum()
    return new


# ---------------------------------------------------------------------------
# EM driver
# ---------------------------------------------------------------------------


def _init_model(
    sequences: list[tuple[np.ndarray, np.ndarray]], config: EmConfig
) -> AioHmmModel:
    """Randomized-responsibility initialization.

    Each observation receives a random state posterior from the seeded
    generator; a single M-step over those responsibilities produces the
    starting parameters, so initialization needs no side-channel heuristics.
    """
    rng = make_rng(config.seed)
    S = config.states
    dx = sequences[0][0].shape[1]
    dz = sequences[0][1].shape[1]
    dt = dx if config.variant != VARIANT_HMM else 1

    blank = AioHmmModel(
        variant=config.variant,
        mu=np.zeros((S, dz)), a=np.zeros((S, dx)), b=np.zeros((S, dz)),
        sigma=np.stack([np.eye(dz)] * S), w=np.zeros((S, S, dt)),
        pi=np.full(S, 1.0 / S),
    )
    stats = []
    for xs, zs in sequences:
        T = xs.shape[0]
        gamma = rng.uniform(0.2, 1.0, size=(T, S))
        gamma /= gamma.sum(axis=1, keepdims=True)
        xi = gamma[:-1, :, None] * gamma[1:, None, :]
        stats.append(PosteriorStats(gamma=gamma, xi=xi, loglik=float("nan")))
    init_cfg = EmConfig(**{**config.to_dict(), "mean_rounds": 1})
    model = m_step(sequences, stats, blank, init_cfg, diag={})
    model.validate()
    return model


def fit_em(
    sequences: list[tuple[np.ndarray, np.ndarray]], config: EmConfig
) -> tuple[AioHmmModel, list[float]]:
    """Fit one model to the (xs, zs) sequences of a single event class.

    Returns the model and the per-iteration total log-likelihood trace.
    Stops when the relative improvement drops below ``config.tol`` or after
    ``config.max_iter`` iterations.
    """
    config.validate()
    if not sequences:
        raise ValueError("cannot fit a model to an empty dataset")
    sequences = [(np.asarray(xs, float), np.asarray(zs, float)) for xs, zs in sequences]
    model = _init_model(sequences, config)

    trace: list[float] = []
    diag: dict = {}
    for _ in range(config.max_iter):
        stats = [forward_backward(model, xs, zs) for xs, zs in sequences]
        total = float(sum(st.loglik for st in stats))
        trace.append(total)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(total - prev) <= config.tol * max(abs(prev), 1.0):
                break
        model = m_step(sequences, stats, model, config, diag)
    if diag.get("ridge") or diag.get("floored"):
        log.warning(
            "EM fit used %d ridge-regularized mean solve(s) and floored %d covariance update(s)",
            diag.get("ridge", 0), diag.get("floored", 0),
        )
    return model, trace


def posterior_from_logliks(logliks: np.ndarray, prior: np.ndarray) -> np.ndarray:
    """Normalize per-model log-likelihoods into a class posterior.

    Max-shifted, so the result (and its argmax in particular) is invariant
    under adding a constant to every log-likelihood.
    """
    scores = np.asarray(logliks, dtype=float) + np.log(prior)
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


def infer_maneuver(
    models: list[AioHmmModel],
    xs: np.ndarray,
    zs: np.ndarray,
    prior: np.ndarray | None = None,
) -> np.ndarray:
    """Posterior over event classes given one per-class model each.

    Proportional to exp(log-likelihood) times the prior (uniform unless
    given).
    """
    if len(models) < 2:
        raise ValueError("need at least two candidate models")
    if prior is None:
        prior = np.full(len(models), 1.0 / len(models))
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (len(models),) or abs(float(prior.sum()) - 1.0) > 1e-9:
        raise ValueError("prior must be a distribution over the models")
    logliks = np.array([sequence_loglik(m, xs, zs) for m in models])
    return posterior_from_logliks(logliks, prior)


# ---------------------------------------------------------------------------
# Sampling (for recovery experiments and demos)
# ---------------------------------------------------------------------------


def sample_sequence(
    m: AioHmmModel, T: int, rng: np.random.Generator, x_sampler=None
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (xs, zs) of length T from the generative process.

    ``x_sampler(rng) -> x_t`` supplies the exogenous inputs; standard normal
    by default.
    """
    if x_sampler is None:
        x_sampler = lambda r: r.standard_normal(m.dim_x)
    chols = [np.linalg.cholesky(m.sigma[i]) for i in range(m.states)]
    xs = np.empty((T, m.dim_x))
    zs = np.empty((T, m.dim_z))
    z_prev = np.zeros(m.dim_z)
    h = int(rng.choice(m.states, p=m.pi))
    for t in range(T):
        xs[t] = x_sampler(rng)
        if t > 0:
            h = int(rng.choice(m.states, p=transition_row(m, h, xs[t])))
        scale = 1.0 + float(m.a[h] @ xs[t])
        if m.variant == VARIANT_AIO:
            scale += float(m.b[h] @ z_prev)
        mean = scale * m.mu[h]
        zs[t] = mean + chols[h] @ rng.standard_normal(m.dim_z)
        z_prev = zs[t]
    return xs, zs


@dataclass
class AioHmmEnsemble:
    """One fitted model per event class plus the class prior."""

    events: tuple[str, ...]
    models: dict[str, AioHmmModel]
    prior: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.prior is None:
            self.prior = np.full(len(self.events), 1.0 / len(self.events))
        missing = [e for e in self.events if e not in self.models]
        if missing:
            raise ValueError(f"missing models for events {missing!r}")

    def posterior(self, xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
        return infer_maneuver([self.models[e] for e in self.events], xs, zs, self.prior)
