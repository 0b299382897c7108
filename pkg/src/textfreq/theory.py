"""Synthetic lab for the frequency-loss correspondence.

Everything here is exact and self-contained: a rank-frequency vocabulary
following a power law, a perturbed model distribution whose per-rank log
deviation is bounded, and an optional conditional mixture on top.  The lab
verifies numerically that

* self-information is linear in log rank: -ln P(w_r) = s*ln r + C with
  C = ln Z the log normalizer,
* a model whose per-token log deviation stays inside eps keeps losses
  ordered by rank whenever eps_i + eps_j < s*ln(r_j / r_i), with the
  uniform-eps activation ratio exp(2*eps/s),
* the per-sentence mean loss splits exactly into the negative log
  geometric-mean frequency plus a mean deviation term (bounded by the mean
  eps) plus a mean conditional term,
* and a frequency gap larger than the summed deviation budgets of two
  sentences forces the lower loss onto the more frequent sentence.

Violations raise; the suite at the bottom packages the checks for the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from textfreq.ioutil import atomic_write_text


class ConstructionError(RuntimeError):
    """A perturbed model satisfying the deviation bound could not be drawn."""


class PreconditionError(ValueError):
    """A trial was asked about inputs outside its contract."""


class BoundViolationError(AssertionError):
    """A numerically verified bound failed; this should never happen."""


@dataclass(frozen=True, eq=False)
class ZipfModel:
    """Rank-frequency power law P(w_r) = r^-s / Z over ranks 1..V."""

    s: float
    vocab_size: int
    z: float
    probabilities: np.ndarray
    log_probabilities: np.ndarray

    @property
    def c(self) -> float:
        """The additive constant ln Z of the self-information line."""
        return math.log(self.z)


def make_zipf(s: float, vocab_size: int) -> ZipfModel:
    if not (s > 0.0) or not math.isfinite(s):
        raise ValueError("exponent s must be positive and finite")
    if vocab_size < 2:
        raise ValueError("vocab_size must be >= 2")
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    weights = ranks ** (-s)
    z = float(weights.sum())
    probabilities = weights / z
    if abs(float(probabilities.sum()) - 1.0) > 1e-12:
        raise ConstructionError("probabilities failed to normalize")
    if not np.all(np.diff(probabilities) < 0.0):
        raise ConstructionError("probabilities must strictly decrease in rank")
    return ZipfModel(
        s=s,
        vocab_size=vocab_size,
        z=z,
        probabilities=probabilities,
        log_probabilities=np.log(probabilities),
    )


def self_information_residual(model: ZipfModel) -> float:
    """Max deviation of -ln P(w_r) from the line s*ln r + ln Z."""
    ranks = np.arange(1, model.vocab_size + 1, dtype=np.float64)
    line = model.s * np.log(ranks) + model.c
    return float(np.max(np.abs(-model.log_probabilities - line)))


@dataclass(frozen=True, eq=False)
class PerturbedModel:
    """A model distribution Q with |ln P(w_r) - ln Q(w_r)| <= eps_r per rank."""

    base: ZipfModel
    epsilon: np.ndarray
    q: np.ndarray
    log_q: np.ndarray
    delta: np.ndarray  # ln P - ln Q, verified inside the per-rank bound

    @property
    def marginal_loss(self) -> np.ndarray:
        """Per-rank marginal negative log likelihood under Q."""
        return -self.log_q


def _as_epsilon(epsilon: float | Sequence[float] | np.ndarray, vocab_size: int) -> np.ndarray:
    eps = np.asarray(epsilon, dtype=np.float64)
    if eps.ndim == 0:
        eps = np.full(vocab_size, float(eps))
    if eps.shape != (vocab_size,):
        raise ValueError(f"epsilon must be scalar or shape ({vocab_size},)")
    if not np.all(np.isfinite(eps)) or np.any(eps < 0.0):
        raise ValueError("epsilon entries must be finite and >= 0")
    return eps


def make_perturbed(
    model: ZipfModel,
    epsilon: float | Sequence[float] | np.ndarray,
    seed: int = 0,
    max_attempts: int = 10,
) -> PerturbedModel:
    """Draw Q = normalize(P * exp(u)) with the log deviation inside epsilon.

    u is sampled uniformly from half the allowed band per rank, which leaves
    room for the renormalization shift; if the bound still fails, the band
    shrinks by half and the draw repeats.  Epsilon profiles that leave no
    room at some rank while forcing drift from others (for example a zero
    entry among large ones) exhaust the attempts and fail loudly.
    """
    eps = _as_epsilon(epsilon, model.vocab_size)
    if not eps.any():
        # Exact identity: no perturbation requested, none applied.
        zeros = np.zeros(model.vocab_size)
        return PerturbedModel(
            base=model,
            epsilon=eps,
            q=model.probabilities.copy(),
            log_q=model.log_probabilities.copy(),
            delta=zeros,
        )
    rng = np.random.default_rng(seed)
    band = eps / 2.0
    for _ in range(max_attempts):
        u = rng.uniform(-band, band)
        q_raw = model.probabilities * np.exp(u)
        q = q_raw / q_raw.sum()
        log_q = np.log(q)
        delta = model.log_probabilities - log_q
        if np.all(np.abs(delta) <= eps):
            return PerturbedModel(base=model, epsilon=eps, q=q, log_q=log_q, delta=delta)
        band = band / 2.0
    raise ConstructionError(
        "no admissible perturbation after "
        f"{max_attempts} attempts; epsilon profile leaves no room for renormalization"
    )


@dataclass(frozen=True, eq=False)
class ConditionalModel:
    """Token model with context mixing: Q(w | w') = (1-lam)*Q(w) + lam*B(w|w').

    The first token of a sentence uses the marginal Q.  With lam = 0 the
    conditional collapses to the marginal exactly (the mixture is evaluated
    so that no floating-point drift is introduced).
    """

    marginal: PerturbedModel
    lam: float
    kernel: np.ndarray | None  # row-stochastic (V, V); None when lam == 0


def make_conditional(marginal: PerturbedModel, lam: float, seed: int = 0) -> ConditionalModel:
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lam must be in [0, 1]")
    if lam == 0.0:
        return ConditionalModel(marginal=marginal, lam=0.0, kernel=None)
    vocab = marginal.base.vocab_size
    rng = np.random.default_rng(seed)
    kernel = rng.random((vocab, vocab))
    kernel /= kernel.sum(axis=1, keepdims=True)
    row_err = float(np.max(np.abs(kernel.sum(axis=1) - 1.0)))
    if row_err > 1e-10:
        raise ConstructionError(f"kernel rows failed to normalize (err {row_err:g})")
    return ConditionalModel(marginal=marginal, lam=lam, kernel=kernel)


@dataclass(frozen=True)
class Decomposition:
    """Per-sentence split of the mean token loss.

    loss = neg_log_sfreq + delta_bar + eta_bar up to ``residual``, where
    delta_bar averages the marginal log deviations (|delta_bar| <= eps_bar)
    and eta_bar averages the conditional-vs-marginal log gap.
    """

    token_count: int
    loss: float
    neg_log_sfreq: float
    delta_bar: float
    eta_bar: float
    eps_bar: float
    residual: float


_RESIDUAL_BOUND = 1e-10


def decompose_sentence(ranks: Sequence[int] | np.ndarray, cond: ConditionalModel) -> Decomposition:
    """Decompose the mean conditional loss of a sentence given as ranks.

    Raises :class:`BoundViolationError` if the parts fail to re-add to the
    loss within 1e-10 or if the mean deviation escapes the mean epsilon.
    """
    idx = np.asarray(ranks, dtype=np.int64) - 1
    if idx.ndim != 1 or idx.size == 0:
        raise PreconditionError("sentence must be a non-empty rank vector")
    vocab = cond.marginal.base.vocab_size
    if np.any(idx < 0) or np.any(idx >= vocab):
        raise PreconditionError(f"ranks must lie in [1, {vocab}]")

    pm = cond.marginal
    lp = pm.base.log_probabilities[idx]
    lq = pm.log_q[idx]
    if cond.lam == 0.0 or idx.size == 1:
        lc = lq
    else:
        mixed = (1.0 - cond.lam) * pm.q[idx[1:]] + cond.lam * cond.kernel[idx[:-1], idx[1:]]
        lc = np.concatenate(([lq[0]], np.log(mixed)))

    loss = float(-np.mean(lc))
    neg_log_sfreq = float(-np.mean(lp))
    delta_bar = float(np.mean(lp - lq))
    eta_bar = float(np.mean(lq - lc))
    eps_bar = float(np.mean(pm.epsilon[idx]))
    residual = abs(loss - (neg_log_sfreq + delta_bar + eta_bar))
    if residual > _RESIDUAL_BOUND:
        raise BoundViolationError(f"decomposition residual {residual:g} exceeds {_RESIDUAL_BOUND:g}")
    if abs(delta_bar) > eps_bar:
        raise BoundViolationError(
            f"mean deviation {delta_bar:g} escaped the mean epsilon {eps_bar:g}"
        )
    return Decomposition(
        token_count=int(idx.size),
        loss=loss,
        neg_log_sfreq=neg_log_sfreq,
        delta_bar=delta_bar,
        eta_bar=eta_bar,
        eps_bar=eps_bar,
        residual=residual,
    )


def monotonicity_violations(pm: PerturbedModel) -> tuple[int, int]:
    """Count rank pairs where the margin condition holds but loss ordering fails.

    A pair (i, j) with r_i < r_j is conditioned when
    eps_i + eps_j < s * ln(r_j / r_i); for those pairs the marginal loss
    must be strictly larger at the rarer rank.  Returns
    ``(violations, conditioned_pairs)``; the first must always be zero.
    """
    vocab = pm.base.vocab_size
    log_ranks = np.log(np.arange(1, vocab + 1, dtype=np.float64))
    gap = pm.base.s * (log_ranks[None, :] - log_ranks[:, None])
    conditioned = (pm.epsilon[:, None] + pm.epsilon[None, :]) < gap
    loss = pm.marginal_loss
    ordered = loss[:, None] < loss[None, :]
    violations = int(np.count_nonzero(conditioned & ~ordered))
    return violations, int(np.count_nonzero(conditioned))


def activation_ratio(epsilon: float, s: float) -> float:
    """Smallest rank ratio with guaranteed loss ordering at uniform epsilon.

    With eps_i = eps_j = eps the pair condition becomes
    r_j / r_i > exp(2*eps/s).
    """
    if not (s > 0.0):
        raise ValueError("s must be positive")
    if epsilon < 0.0:
        raise ValueError("epsilon must be >= 0")
    return math.exp(2.0 * epsilon / s)


@dataclass(frozen=True)
class SemilogFit:
    """Least-squares line of marginal loss against ln rank."""

    slope: float
    intercept: float
    max_abs_residual: float


def semilog_fit(pm: PerturbedModel, destination: str | None = None) -> SemilogFit:
    """Fit marginal loss against ln rank; optionally dump the points as TSV.

    Needs at least three ranks so the fit is overdetermined and a residual
    is meaningful.
    """
    vocab = pm.base.vocab_size
    if vocab < 3:
        raise ValueError("semilog fit needs vocab_size >= 3")
    x = np.log(np.arange(1, vocab + 1, dtype=np.float64))
    y = pm.marginal_loss
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    max_abs_residual = float(np.max(np.abs(y - fitted)))
    if destination is not None:
        lines = ["rank\tln_rank\tmarginal_loss\tfitted"]
        for r in range(vocab):
            lines.append(f"{r + 1}\t{x[r]!r}\t{y[r]!r}\t{fitted[r]!r}")
        atomic_write_text(destination, "\n".join(lines) + "\n")
    return SemilogFit(slope=float(slope), intercept=float(intercept), max_abs_residual=max_abs_residual)


@dataclass(frozen=True)
class MarginTrial:
    """Outcome of one frequency-gap selection trial.

    ``condition_holds`` means the log frequency ratio exceeded the summed
    deviation budgets of the two sentences; whenever it does, the more
    frequent sentence is guaranteed (and verified) to carry the lower loss.
    """

    log_ratio: float
    bound: float
    condition_holds: bool
    ordering_holds: bool


def selection_margin_trial(
    x_ranks: Sequence[int] | np.ndarray,
    xp_ranks: Sequence[int] | np.ndarray,
    cond: ConditionalModel,
) -> MarginTrial:
    """Check the selection guarantee on a pair of sentences.

    ``x_ranks`` must be the strictly more frequent sentence (positive log
    frequency ratio); that is the caller's contract, violating it raises
    :class:`PreconditionError`.
    """
    dx = decompose_sentence(x_ranks, cond)
    dxp = decompose_sentence(xp_ranks, cond)
    log_ratio = dxp.neg_log_sfreq - dx.neg_log_sfreq
    if not log_ratio > 0.0:
        raise PreconditionError("x must be strictly more frequent than x'")
    bound = (dx.eps_bar + abs(dx.eta_bar)) + (dxp.eps_bar + abs(dxp.eta_bar))
    condition_holds = bool(log_ratio > bound)
    ordering_holds = bool(dx.loss < dxp.loss)
    if condition_holds and not ordering_holds:
        raise BoundViolationError(
            f"frequency gap {log_ratio:g} beat the budget {bound:g} but ordering failed"
        )
    return MarginTrial(
        log_ratio=log_ratio,
        bound=bound,
        condition_holds=condition_holds,
        ordering_holds=ordering_holds,
    )


def random_sentence(rng: np.random.Generator, vocab_size: int, max_len: int = 20) -> np.ndarray:
    """Uniform random rank vector with 1 <= len <= max_len."""
    length = int(rng.integers(1, max_len + 1))
    return rng.integers(1, vocab_size + 1, size=length)


def sentence_neg_log_sfreq(ranks: Sequence[int] | np.ndarray, model: ZipfModel) -> float:
    """Negative log geometric-mean frequency of a rank vector under the base law."""
    idx = np.asarray(ranks, dtype=np.int64) - 1
    if idx.ndim != 1 or idx.size == 0:
        raise PreconditionError("sentence must be a non-empty rank vector")
    if np.any(idx < 0) or np.any(idx >= model.vocab_size):
        raise PreconditionError(f"ranks must lie in [1, {model.vocab_size}]")
    return float(-np.mean(model.log_probabilities[idx]))


def run_verification(
    s_values: Iterable[float] = (0.8, 1.0, 1.2),
    vocab_size: int = 500,
    epsilon: float = 0.05,
    lam: float = 0.3,
    models: int = 50,
    sentences: int = 100,
    pairs: int = 200,
    seed: int = 0,
    max_len: int = 20,
) -> list[dict]:
    """Run every lab check and return one JSON-friendly record per check."""
    records: list[dict] = []
    for s in s_values:
        model = make_zipf(s, vocab_size)

        residual = self_information_residual(model)
        records.append(
            {
                "check": "self-information-linearity",
                "s": s,
                "vocab": vocab_size,
                "max_residual": residual,
                "bound": 1e-12,
                "ok": residual <= 1e-12,
            }
        )

        exact = semilog_fit(make_perturbed(model, 0.0, seed=seed))
        slope_err = abs(exact.slope - s)
        intercept_err = abs(exact.intercept - model.c)
        records.append(
            {
                "check": "semilog-recovery-exact",
                "s": s,
                "slope_error": slope_err,
                "intercept_error": intercept_err,
                "bound": 1e-9,
                "ok": slope_err <= 1e-9 and intercept_err <= 1e-9,
            }
        )

        noisy = semilog_fit(make_perturbed(model, epsilon, seed=seed))
        # Deviation band of the data plus the induced shift of the fit.
        noisy_bound = 2.0 * epsilon
        records.append(
            {
                "check": "semilog-recovery-perturbed",
                "s": s,
                "epsilon": epsilon,
                "max_abs_residual": noisy.max_abs_residual,
                "bound": noisy_bound,
                "ok": noisy.max_abs_residual <= noisy_bound,
            }
        )

        total_violations = 0
        total_conditioned = 0
        for m in range(models):
            pm = make_perturbed(model, epsilon, seed=seed + m)
            violations, conditioned = monotonicity_violations(pm)
            total_violations += violations
            total_conditioned += conditioned
        records.append(
            {
                "check": "loss-monotonicity",
                "s": s,
                "epsilon": epsilon,
                "models": models,
                "conditioned_pairs": total_conditioned,
                "violations": total_violations,
                "activation_ratio": activation_ratio(epsilon, s),
                "ok": total_violations == 0,
            }
        )

        pm = make_perturbed(model, epsilon, seed=seed)
        cond = make_conditional(pm, lam, seed=seed)
        rng = np.random.default_rng(seed)
        max_residual = 0.0
        ratio_sum = 0.0
        ratio_n = 0
        for _ in range(sentences):
            d = decompose_sentence(random_sentence(rng, vocab_size, max_len), cond)
            max_residual = max(max_residual, d.residual)
            if d.eps_bar > 0.0:
                ratio_sum += abs(d.delta_bar) * math.sqrt(d.token_count) / d.eps_bar
                ratio_n += 1
        records.append(
            {
                "check": "sentence-decomposition",
                "s": s,
                "lam": lam,
                "sentences": sentences,
                "max_residual": max_residual,
                "bound": _RESIDUAL_BOUND,
                # Mean of |delta_bar|*sqrt(K)/eps_bar: sizes how much the
                # K-token average tightens the worst-case deviation budget.
                "mean_sqrtk_deviation_ratio": (ratio_sum / ratio_n) if ratio_n else None,
                "ok": max_residual <= _RESIDUAL_BOUND,
            }
        )

        conditioned = 0
        ordered = 0
        unconditioned_ordered = 0
        trials = 0
        while trials < pairs:
            a = random_sentence(rng, vocab_size, max_len)
            b = random_sentence(rng, vocab_size, max_len)
            nls_a = sentence_neg_log_sfreq(a, model)
            nls_b = sentence_neg_log_sfreq(b, model)
            if nls_a == nls_b:
                continue
            if nls_a < nls_b:
                trial = selection_margin_trial(a, b, cond)
            else:
                trial = selection_margin_trial(b, a, cond)
            trials += 1
            if trial.condition_holds:
                conditioned += 1
            if trial.ordering_holds:
                ordered += 1
                if not trial.condition_holds:
                    unconditioned_ordered += 1
        records.append(
            {
                "check": "selection-margin",
                "s": s,
                "lam": lam,
                "pairs": trials,
                "condition_held": conditioned,
                "ordering_held": ordered,
                # Ordering often holds without the margin condition: the
                # condition is sufficient, not necessary.
                "unconditioned_ordering": unconditioned_ordered,
                "ok": True,
            }
        )
    return records
