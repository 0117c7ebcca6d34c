"""Probability accounting for discrimination measurements.

Joint outcome distributions, success/error/inconclusive rates, conditional
confidences, and entrywise L_p distances between distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import INCONCLUSIVE, Povm, ProblemSpec, _readonly


@dataclass(frozen=True)
class JointDistribution:
    """Joint probabilities ``entries[i, j] = p_i * Tr(rho_i' Pi_j)``.

    Rows index the prepared state, columns the measurement outcome; the last
    column belongs to the inconclusive outcome and is all-zero when the POVM
    has no inconclusive element.
    """

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[1] != e.shape[0] + 1:
            raise ValueError(f"expected shape (k, k+1), got {e.shape}")
        if float(e.min()) < -1e-10:
            raise ValueError(f"negative joint probability {e.min():.3e}")
        total = float(e.sum())
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"entries sum to {total!r}, expected 1")
        object.__setattr__(self, "entries", _readonly(e))

    @property
    def num_states(self) -> int:
        return self.entries.shape[0]

    @property
    def inconclusive_column(self) -> np.ndarray:
        return self.entries[:, -1]


@dataclass(frozen=True)
class OutcomeStats:
    """Success / misidentification / inconclusive mass of a joint distribution."""

    p_succ: float
    p_err: float
    p_inc: float


def joint_distribution(spec: ProblemSpec, povm: Povm, lam: float | None = None) -> JointDistribution:
    """Joint distribution of (prepared state, outcome) at noise level ``lam``.

    ``lam`` defaults to the instance's ``noise_lambda``.  The inconclusive
    column is zero when the POVM carries no inconclusive element.
    """
    if povm.dim != spec.dim:
        raise ValueError(f"dimension mismatch: POVM {povm.dim}, instance {spec.dim}")
    k = spec.num_states
    if povm.num_conclusive != k:
        raise ValueError(f"POVM identifies {povm.num_conclusive} states, instance has {k}")
    noisy = spec.noisy_states(lam)
    entries = np.zeros((k, k + 1))
    columns = [povm.element(j) for j in range(k)] + [povm.element(INCONCLUSIVE)]
    for i, (p_i, rho) in enumerate(zip(spec.priors, noisy)):
        for j, elem in enumerate(columns):
            entries[i, j] = p_i * float(np.trace(rho.matrix @ elem).real)
    return JointDistribution(entries)


def outcome_stats(jd: JointDistribution) -> OutcomeStats:
    """Decompose a joint distribution into success, error, and inconclusive mass.

    The error mass counts conclusive misidentifications only; inconclusive
    outcomes are tallied separately.
    """
    e = jd.entries
    k = jd.num_states
    p_succ = float(np.trace(e[:, :k]))
    p_inc = float(e[:, k].sum())
    p_err = float(e[:, :k].sum()) - p_succ
    return OutcomeStats(p_succ=p_succ, p_err=p_err, p_inc=p_inc)


def error_to_success(jd: JointDistribution) -> float:
    """Ratio of misidentification to success mass; +inf when nothing succeeds."""
    stats = outcome_stats(jd)
    if stats.p_succ <= 1e-15:
        return math.inf
    return stats.p_err / stats.p_succ


def lp_distance(a: JointDistribution, b: JointDistribution, ell: float) -> float:
    """Entrywise L_ell distance ``(sum |a - b|^ell)^(1/ell)`` over all outcomes."""
    if a.entries.shape != b.entries.shape:
        raise ValueError("distributions have different shapes")
    if ell not in (1, 2):
        raise ValueError("only ell in {1, 2} is supported")
    diff = np.abs(a.entries - b.entries)
    return float(np.sum(diff ** ell) ** (1.0 / ell))


def confidences(spec: ProblemSpec, povm: Povm, lam: float | None = None):
    """Per-state conditionals (p(Pi_i | rho_i), p(rho_i | Pi_i)).

    Both conditionals are taken over conclusive outcomes only.  Entries whose
    conditioning mass is below 1e-12 are reported as 1 (vacuously satisfied).
    """
    jd = joint_distribution(spec, povm, lam)
    e = jd.entries
    k = jd.num_states
    row_mass = e[:, :k].sum(axis=1)
    col_mass = e[:, :k].sum(axis=0)
    given_state = np.ones(k)
    given_outcome = np.ones(k)
    for i in range(k):
        if row_mass[i] > 1e-12:
            given_state[i] = e[i, i] / row_mass[i]
        if col_mass[i] > 1e-12:
            given_outcome[i] = e[i, i] / col_mass[i]
    return given_state, given_outcome
