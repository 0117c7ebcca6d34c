"""Minimal-ancilla dilation of POVMs into projective measurements.

A POVM element of rank ``r`` splits into ``r`` rank-1 pieces
``Pi_i = sum_j |f_ij><f_ij|`` (eigendecomposition).  Mapping each piece to
its own computational-basis state ``|g_ij>`` of a target register gives an
isometry ``V = sum_ij |g_ij><f_ij|`` with ``V Pi_i V^+`` a sum of basis
projectors, so the POVM becomes a computational-basis measurement on
``max(n, ceil(log2 L))`` qubits, ``L`` the total rank.  This is usually far
smaller than the generic construction ``V = sum_i sqrt(Pi_i) (x) |i>`` on
dimension ``k * d``.

Small eigenvalues (numerical dust from a solver, or genuinely negligible
components) can be discarded with a threshold ``delta``; the map is then no
longer a strict isometry and the lost probability mass shows up under the
explicit :data:`RESIDUAL` outcome instead of being renormalized away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .states import DensityMatrix, Povm, PureState

#: Outcome label for target-basis states outside the decomposition's range
#: (collects the truncation deficit).
RESIDUAL = "residual"


@dataclass(frozen=True)
class Rank1Term:
    """One rank-1 piece ``sigma * |l><l|`` of a POVM element, stored as
    ``vector = sqrt(sigma) * l``."""

    element: int
    sigma: float
    vector: np.ndarray


@dataclass(frozen=True)
class Rank1Decomposition:
    """Rank-1 decomposition of a labeled POVM, grouped by element."""

    dim: int
    terms: tuple
    labels: tuple

    @property
    def total_rank(self) -> int:
        return len(self.terms)

    @property
    def per_element_rank(self) -> tuple:
        counts = [0] * len(self.labels)
        for t in self.terms:
            counts[t.element] += 1
        return tuple(counts)

    def reconstruct(self, element: int) -> np.ndarray:
        """Sum of the rank-1 pieces belonging to one element."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for t in self.terms:
            if t.element == element:
                out += np.outer(t.vector, t.vector.conj())
        return out


@dataclass(frozen=True)
class DilationResult:
    """An isometry into a qubit register plus the outcome bookkeeping.

    ``isometry`` has shape ``(2**target_qubits, domain_dim)``; basis index
    ``b`` of the target register maps to ``outcome_map[b]``, which is either
    a conclusive state index, :data:`INCONCLUSIVE`, or :data:`RESIDUAL`.
    """

    domain_dim: int
    total_rank: int
    target_qubits: int
    isometry: np.ndarray
    outcome_map: tuple
    delta: float

    @property
    def ancilla_qubits(self) -> int:
        return self.target_qubits - (self.domain_dim - 1).bit_length()

    @property
    def target_dim(self) -> int:
        return 2 ** self.target_qubits


@dataclass(frozen=True)
class DilationReport:
    """Deviations measured by :func:`verify_dilation`."""

    isometry_deviation: float
    max_probability_deviation: float


@dataclass(frozen=True)
class MeasurementResult:
    """Exact outcome probabilities and (optionally) sampled counts."""

    probabilities: dict
    counts: dict | None
    shots: int


def _domain_qubits(dim: int) -> int:
    n = (dim - 1).bit_length()
    if 2 ** n != dim:
        raise ValueError(f"domain dimension {dim} is not a power of two")
    return n


def decompose_rank1(povm: Povm, rank_tol: float | None = 1e-7) -> Rank1Decomposition:
    """Split every POVM element into rank-1 pieces by eigendecomposition.

    Eigenpairs with eigenvalue above ``rank_tol`` are kept, largest first
    within each element.  ``rank_tol=None`` keeps all ``dim`` eigenpairs of
    every element (no numerical-rank estimation), which is the
    no-approximation mode used before an explicit truncation.
    """
    terms = []
    for idx, elem in enumerate(povm.elements):
        h = 0.5 * (elem + elem.conj().T)
        w, u = np.linalg.eigh(h)
        order = np.argsort(w)[::-1]
        for pos in order:
            sigma = float(w[pos])
            if rank_tol is not None and sigma <= rank_tol:
                continue
            sigma = max(sigma, 0.0)
            vec = math.sqrt(sigma) * u[:, pos]
            terms.append(Rank1Term(element=idx, sigma=sigma, vector=vec))
    terms.sort(key=lambda t: t.element)  # stable: keeps descending sigma per element
    return Rank1Decomposition(dim=povm.dim, terms=tuple(terms), labels=povm.labels)


def truncate(dec: Rank1Decomposition, delta: float) -> Rank1Decomposition:
    """Drop rank-1 pieces with ``sigma < delta``; nothing is renormalized.

    ``delta = 0`` is the identity; an element may lose all of its pieces, in
    which case it simply never fires and the lost mass surfaces under the
    :data:`RESIDUAL` outcome of the dilated measurement.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    kept = tuple(t for t in dec.terms if not (t.sigma < delta))
    return Rank1Decomposition(dim=dec.dim, terms=kept, labels=dec.labels)


def build_isometry(dec: Rank1Decomposition) -> DilationResult:
    """Isometry sending the j-th piece of element i to its own basis state.

    The target register has ``max(n, ceil(log2 L))`` qubits for an
    ``n``-qubit domain and total rank ``L``.  Rows beyond the first ``L``
    basis indices are zero and map to :data:`RESIDUAL`.
    """
    total = dec.total_rank
    if total < 1:
        raise ValueError("decomposition has no terms left")
    n = _domain_qubits(dec.dim)
    m = max(n, (total - 1).bit_length())
    target = 2 ** m
    v = np.zeros((target, dec.dim), dtype=complex)
    outcome_map = [RESIDUAL] * target
    for row, term in enumerate(dec.terms):
        v[row, :] = term.vector.conj()
        outcome_map[row] = dec.labels[term.element]
    return DilationResult(domain_dim=dec.dim, total_rank=total, target_qubits=m,
                          isometry=v, outcome_map=tuple(outcome_map), delta=0.0)


def dilate(povm: Povm, delta: float = 0.0) -> DilationResult:
    """Full pipeline: decompose (keeping all eigenpairs), truncate, build.

    With ``delta = 0`` every eigenpair of every element keeps its own basis
    slot, so the total rank is ``k * dim`` for a k-element POVM and the
    isometry is exact.  A positive ``delta`` discards pieces with
    ``sigma < delta`` first.
    """
    dec = truncate(decompose_rank1(povm, rank_tol=None), delta)
    return replace(build_isometry(dec), delta=delta)


def build_isometry_generic(povm: Povm) -> DilationResult:
    """Baseline dilation ``V = sum_i sqrt(Pi_i) (x) |i>`` for comparison.

    Targets dimension ``k * d`` (padded to the next power of two), against
    which the rank-based construction is usually much smaller.
    """
    d = povm.dim
    k = len(povm.elements)
    raw_dim = k * d
    m = max(_domain_qubits(d), (raw_dim - 1).bit_length())
    target = 2 ** m
    v = np.zeros((target, d), dtype=complex)
    outcome_map = [RESIDUAL] * target
    for i, elem in enumerate(povm.elements):
        h = 0.5 * (elem + elem.conj().T)
        w, u = np.linalg.eigh(h)
        root = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
        for r in range(d):
            idx = r * k + i
            v[idx, :] = root[r, :]
            outcome_map[idx] = povm.labels[i]
    return DilationResult(domain_dim=d, total_rank=raw_dim, target_qubits=m,
                          isometry=v, outcome_map=tuple(outcome_map), delta=0.0)


def _state_matrix(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.matrix
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    return np.asarray(state, dtype=complex)


def simulate_measurement(dil: DilationResult, state, shots: int = 0,
                         seed: int | None = None) -> MeasurementResult:
    """Measure a state through the dilated projective measurement.

    Exact outcome probabilities are ``<b| V rho V^+ |b>`` aggregated over the
    outcome map; :data:`RESIDUAL` additionally collects the truncation
    deficit ``1 - Tr(V rho V^+)``.  With ``shots > 0`` a multinomial sample
    with the given seed is drawn (deterministic for a fixed seed).
    """
    v = dil.isometry
    if isinstance(state, PureState):
        if state.dim != dil.domain_dim:
            raise ValueError(f"state dim {state.dim} != domain dim {dil.domain_dim}")
        amp_out = v @ state.amplitudes
        per_basis = np.abs(amp_out) ** 2
    else:
        rho = _state_matrix(state)
        if rho.shape[0] != dil.domain_dim:
            raise ValueError(f"state dim {rho.shape[0]} != domain dim {dil.domain_dim}")
        per_basis = np.einsum("bi,ij,bj->b", v, rho, v.conj()).real
    per_basis = np.clip(per_basis, 0.0, None)

    labels = []
    for lbl in dil.outcome_map:
        if lbl not in labels:
            labels.append(lbl)
    if RESIDUAL not in labels:
        labels.append(RESIDUAL)
    probs = {lbl: 0.0 for lbl in labels}
    for b, lbl in enumerate(dil.outcome_map):
        probs[lbl] += float(per_basis[b])
    probs[RESIDUAL] += max(0.0, 1.0 - float(per_basis.sum()))

    counts = None
    if shots > 0:
        rng = np.random.default_rng(seed)
        p = np.array([probs[lbl] for lbl in labels])
        drawn = rng.multinomial(shots, p / p.sum())
        counts = {lbl: int(c) for lbl, c in zip(labels, drawn)}
    return MeasurementResult(probabilities=probs, counts=counts, shots=shots)


def verify_dilation(dil: DilationResult, povm: Povm, states=None,
                    num_states: int = 10, seed: int = 7) -> DilationReport:
    """Check the isometry property and outcome-probability agreement.

    Compares the aggregated basis-measurement probabilities against
    ``Tr(rho Pi_i)`` for every labeled element on the given test states
    (random pure states when none are supplied) and reports the maximum
    deviations.
    """
    v = dil.isometry
    gram = v.conj().T @ v
    iso_dev = float(np.max(np.abs(gram - np.eye(dil.domain_dim))))
    if states is None:
        rng = np.random.default_rng(seed)
        states = []
        for _ in range(num_states):
            a = rng.standard_normal(dil.domain_dim) + 1j * rng.standard_normal(dil.domain_dim)
            states.append(PureState(a / np.linalg.norm(a)))
    max_dev = 0.0
    for state in states:
        rho = _state_matrix(state)
        result = simulate_measurement(dil, state)
        for lbl, elem in zip(povm.labels, povm.elements):
            expected = float(np.trace(rho @ elem).real)
            got = result.probabilities.get(lbl, 0.0)
            max_dev = max(max_dev, abs(got - expected))
    return DilationReport(isometry_deviation=iso_dev, max_probability_deviation=max_dev)


def complete_to_unitary(dil: DilationResult) -> np.ndarray:
    """Extend the isometry to a full unitary on the target register.

    The first ``domain_dim`` columns equal the isometry (re-orthonormalized
    via its polar factor when a truncation broke strict isometry; rank
    deficiencies are completed deterministically).  The remaining columns are
    an orthonormal basis of the complement.
    """
    v = dil.isometry
    target, d = v.shape
    p, _, wh = np.linalg.svd(v, full_matrices=True)
    v_orth = p[:, :d] @ wh
    u = np.concatenate([v_orth, p[:, d:]], axis=1)
    return u
