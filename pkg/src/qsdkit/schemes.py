"""Compile discrimination strategies into conic programs and decode POVMs.

Each ``build_*`` function turns a :class:`~qsdkit.states.ProblemSpec` into a
:class:`~qsdkit.solver.ConeProgram` whose variables are the POVM elements
(one complex PSD block per element, plus slack blocks for inequality
constraints).  :func:`decode_povm` maps a solution back to a cleaned-up
:class:`~qsdkit.states.Povm`, and :func:`solve_scheme` bundles the whole
round trip.

Supported strategies
--------------------
- ``med``        maximize the success probability (no inconclusive outcome)
- ``med_plus``   same objective with an extra inconclusive element
- ``uqsd``       unambiguous discrimination: conclusive outcomes never
                 misidentify (``Tr(rho_i' Pi_j) = 0`` for ``i != j``)
- ``frio``       bound the inconclusive rate from below or above
- ``crossqsd``   per-state false-positive/false-negative confidence bounds
- ``minl1`` / ``minss``  match a reference outcome distribution in L1 /
                 sum-of-squares
- ``meco``       maximize success subject to entrywise bounds that pin the
                 distribution to the reference
- ``hybrid``     success probability minus ``w`` times the distribution
                 deviation

The noise level assumed while solving is ``spec.noise_lambda``; use
``spec.with_noise`` to build a program for a different assumption.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import JointDistribution, joint_distribution
from .solver import (
    MAX_ITERS,
    OPTIMAL,
    ConeProgram,
    FreeCone,
    NonNegCone,
    PsdCone,
    Solution,
    psd_project,
    smat,
    solve,
    svec,
)
from .states import INCONCLUSIVE, Povm, ProblemSpec

AT_LEAST = "at_least"
AT_MOST = "at_most"

SCHEME_NAMES = ("med", "med_plus", "uqsd", "frio", "crossqsd",
                "minl1", "minss", "meco", "hybrid")


class DecodeError(RuntimeError):
    """Raised when a solution is too far from feasibility to decode."""


@dataclass(frozen=True)
class SchemeProgram:
    """A conic program together with the metadata needed to decode it.

    ``element_blocks[j]`` is the program block holding POVM element ``j``
    (``None`` when the element is identically zero by construction), and
    ``carriers[j]`` is an optional column-orthonormal matrix ``N`` such that
    the element is ``N M N^+`` for the block variable ``M`` (used when a
    scheme confines an element to a subspace).
    """

    program: ConeProgram
    dim: int
    num_states: int
    labels: tuple
    maximize: bool
    name: str
    element_blocks: tuple
    carriers: tuple


@dataclass(frozen=True)
class SchemeResult:
    """Decoded output of one scheme solve."""

    povm: Povm
    solution: Solution
    scheme: SchemeProgram

    @property
    def value(self) -> float:
        return scheme_value(self.scheme, self.solution)


class _Assembler:
    """Accumulates cone blocks, equality rows, and objective terms."""

    def __init__(self):
        self._blocks = []
        self._sizes = []
        self._rows = []
        self._rhs = []
        self._obj = []
        self._quad = []

    def _add_block(self, block) -> int:
        off = sum(self._sizes)
        self._blocks.append(block)
        self._sizes.append(block.size)
        return off

    def add_psd(self, dim: int) -> int:
        return self._add_block(PsdCone(dim))

    def add_nonneg(self, count: int = 1) -> int:
        return self._add_block(NonNegCone(count))

    def add_free(self, count: int = 1) -> int:
        return self._add_block(FreeCone(count))

    def add_row(self, entries, rhs: float):
        """One equality row; ``entries`` is a list of (offset, coefficient vector)."""
        self._rows.append([(off, np.atleast_1d(np.asarray(vec, dtype=float)))
                           for off, vec in entries])
        self._rhs.append(float(rhs))

    def add_objective(self, off: int, vec):
        self._obj.append((off, np.atleast_1d(np.asarray(vec, dtype=float))))

    def add_quad(self, off: int, vec):
        self._quad.append((off, np.atleast_1d(np.asarray(vec, dtype=float))))

    def build(self) -> ConeProgram:
        n = sum(self._sizes)
        c = np.zeros(n)
        for off, vec in self._obj:
            c[off:off + vec.size] += vec
        A = np.zeros((len(self._rows), n))
        for r, entries in enumerate(self._rows):
            for off, vec in entries:
                A[r, off:off + vec.size] += vec
        quad = None
        if self._quad:
            quad = np.zeros(n)
            for off, vec in self._quad:
                quad[off:off + vec.size] += vec
        return ConeProgram(blocks=tuple(self._blocks), c=c, A=A,
                           b=np.asarray(self._rhs), quad_diag=quad)


def _noisy_svecs(spec: ProblemSpec) -> list:
    return [svec(rho.matrix) for rho in spec.noisy_states()]


def _element_blocks(asm: _Assembler, spec: ProblemSpec, inconclusive: bool):
    """POVM element blocks plus the completeness constraint; returns offsets."""
    d = spec.dim
    count = spec.num_states + (1 if inconclusive else 0)
    offs = [asm.add_psd(d) for _ in range(count)]
    identity = svec(np.eye(d))
    one = np.ones(1)
    for t in range(d * d):
        asm.add_row([(off + t, one) for off in offs], identity[t])
    return offs


def _labels(spec: ProblemSpec, inconclusive: bool) -> tuple:
    labels = list(range(spec.num_states))
    if inconclusive:
        labels.append(INCONCLUSIVE)
    return tuple(labels)


def _success_objective(asm, spec, offs, svecs, sign=-1.0):
    for i in range(spec.num_states):
        asm.add_objective(offs[i], sign * spec.priors[i] * svecs[i])


def _make_scheme(asm, spec, labels, maximize, name) -> SchemeProgram:
    """Finish a scheme whose elements are plain blocks 0..len(labels)-1."""
    return SchemeProgram(asm.build(), spec.dim, spec.num_states, labels,
                         maximize=maximize, name=name,
                         element_blocks=tuple(range(len(labels))),
                         carriers=(None,) * len(labels))


def build_med(spec: ProblemSpec) -> SchemeProgram:
    """Minimum-error discrimination: maximize the success probability."""
    asm = _Assembler()
    svecs = _noisy_svecs(spec)
    offs = _element_blocks(asm, spec, inconclusive=False)
    _success_objective(asm, spec, offs, svecs)
    return _make_scheme(asm, spec, _labels(spec, False), maximize=True, name="med")


def build_med_plus(spec: ProblemSpec) -> SchemeProgram:
    """Minimum-error discrimination with an (always redundant) inconclusive element."""
    asm = _Assembler()
    svecs = _noisy_svecs(spec)
    offs = _element_blocks(asm, spec, inconclusive=True)
    _success_objective(asm, spec, offs, svecs)
    return _make_scheme(asm, spec, _labels(spec, True), maximize=True, name="med_plus")


def _subspace_map(carrier: np.ndarray) -> np.ndarray:
    """Matrix taking svec coordinates of M to svec coordinates of N M N^+."""
    d = carrier.shape[0]
    r = carrier.shape[1]
    out = np.empty((d * d, r * r))
    basis = np.eye(r * r)
    for t in range(r * r):
        out[:, t] = svec(carrier @ smat(basis[t], r) @ carrier.conj().T)
    return out


def build_uqsd(spec: ProblemSpec) -> SchemeProgram:
    """Unambiguous discrimination: conclusive outcomes never misidentify.

    The no-misidentification conditions ``Tr(rho_i' Pi_j) = 0`` for
    ``i != j`` pin each conclusive element to the common kernel of the other
    states, so the program is built directly over that kernel: element ``j``
    is ``N_j M_j N_j^+`` with ``N_j`` an orthonormal kernel basis and
    ``M_j >= 0`` the reduced variable.  (Writing the conditions as equality
    rows instead leaves the feasible set with an empty conic interior, which
    the first-order solver handles poorly.)  Elements whose kernel is empty,
    which happens for any full-rank noisy states, are identically zero.
    Nontrivial solutions need linearly independent states; the program stays
    feasible regardless.
    """
    asm = _Assembler()
    d = spec.dim
    k = spec.num_states
    noisy = spec.noisy_states()
    svecs = [svec(rho.matrix) for rho in noisy]

    carriers = []
    for j in range(k):
        others = sum(svecs[i] for i in range(k) if i != j)
        w, u = np.linalg.eigh(smat(others, d))
        kernel = u[:, w < 1e-9]
        carriers.append(kernel if kernel.shape[1] > 0 else None)

    block_offsets = {}
    element_blocks = []
    subspace_maps = {}
    next_block = 0
    for j in range(k):
        if carriers[j] is None:
            element_blocks.append(None)
            continue
        r = carriers[j].shape[1]
        block_offsets[j] = asm.add_psd(r)
        subspace_maps[j] = _subspace_map(carriers[j])
        element_blocks.append(next_block)
        next_block += 1
    inc_off = asm.add_psd(d)
    element_blocks.append(next_block)

    identity = svec(np.eye(d))
    one = np.ones(1)
    for t in range(d * d):
        entries = [(inc_off + t, one)]
        for j, tmap in subspace_maps.items():
            entries.append((block_offsets[j], tmap[t, :]))
        asm.add_row(entries, identity[t])

    for j in range(k):
        if carriers[j] is None:
            continue
        n_j = carriers[j]
        reduced = n_j.conj().T @ noisy[j].matrix @ n_j
        asm.add_objective(block_offsets[j], -spec.priors[j] * svec(reduced))

    return SchemeProgram(asm.build(), d, k, _labels(spec, True),
                         maximize=True, name="uqsd",
                         element_blocks=tuple(element_blocks),
                         carriers=tuple(carriers) + (None,))


def build_frio(spec: ProblemSpec, rate: float, bound: str = AT_LEAST) -> SchemeProgram:
    """Success maximization with the inconclusive rate bounded by ``rate``.

    ``bound`` selects whether ``P_inc >= rate`` (``"at_least"``, the default)
    or ``P_inc <= rate`` (``"at_most"``).
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    if bound not in (AT_LEAST, AT_MOST):
        raise ValueError(f"bound must be '{AT_LEAST}' or '{AT_MOST}'")
    asm = _Assembler()
    svecs = _noisy_svecs(spec)
    offs = _element_blocks(asm, spec, inconclusive=True)
    _success_objective(asm, spec, offs, svecs)
    inc_vec = sum(p * sv for p, sv in zip(spec.priors, svecs))
    slack = asm.add_nonneg()
    sign = -1.0 if bound == AT_LEAST else 1.0
    asm.add_row([(offs[-1], inc_vec), (slack, [sign])], rate)
    return _make_scheme(asm, spec, _labels(spec, True), maximize=True, name="frio")


def build_crossqsd(spec: ProblemSpec, alpha, beta) -> SchemeProgram:
    """Success maximization under false-positive/false-negative confidence bounds.

    For each state ``i`` the conditional ``p(Pi_i | rho_i)`` over conclusive
    outcomes must reach ``1 - alpha_i`` and the posterior ``p(rho_i | Pi_i)``
    must reach ``1 - beta_i``.  Both fractional constraints are linearized by
    clearing their (nonnegative) denominators, so a zero denominator
    satisfies them vacuously.
    """
    k = spec.num_states
    alpha = np.asarray(alpha, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    if alpha.size != k or beta.size != k:
        raise ValueError("need one alpha and one beta per state")
    if np.any((alpha < 0) | (alpha > 1)) or np.any((beta < 0) | (beta > 1)):
        raise ValueError("alpha and beta entries must lie in [0, 1]")
    asm = _Assembler()
    svecs = _noisy_svecs(spec)
    offs = _element_blocks(asm, spec, inconclusive=True)
    _success_objective(asm, spec, offs, svecs)
    priors = spec.priors
    for i in range(k):
        # Tr(rho_i' Pi_i) >= (1 - alpha_i) * sum_j Tr(rho_i' Pi_j)
        slack = asm.add_nonneg()
        entries = [(slack, [-1.0])]
        for j in range(k):
            coeff = (1.0 if j == i else 0.0) - (1.0 - alpha[i])
            entries.append((offs[j], coeff * svecs[i]))
        asm.add_row(entries, 0.0)
        # p_i Tr(rho_i' Pi_i) >= (1 - beta_i) * sum_j p_j Tr(rho_j' Pi_i)
        slack = asm.add_nonneg()
        vec = priors[i] * svecs[i] - (1.0 - beta[i]) * sum(
            priors[j] * svecs[j] for j in range(k))
        asm.add_row([(offs[i], vec), (slack, [-1.0])], 0.0)
    return _make_scheme(asm, spec, _labels(spec, True), maximize=True, name="crossqsd")


def _check_reference(spec: ProblemSpec, reference: JointDistribution) -> np.ndarray:
    if not isinstance(reference, JointDistribution):
        reference = JointDistribution(np.asarray(reference, dtype=float))
    if reference.num_states != spec.num_states:
        raise ValueError("reference distribution has the wrong number of states")
    return reference.entries


def _deviation_terms(asm, spec, offs, ref, ell, weight):
    """Slack encoding of ``weight * sum_ij |ref_ij - p_i Tr(rho_i' Pi_j)|^ell``.

    For ell=1 each entry gets a bound variable ``t >= |deviation|`` entering
    the linear objective; for ell=2 each deviation is pinned to a free
    variable entering the diagonal quadratic term.
    """
    svecs = _noisy_svecs(spec)
    k = spec.num_states
    for i in range(k):
        w_vec = spec.priors[i] * svecs[i]
        for j in range(k + 1):
            if ell == 1:
                t = asm.add_nonneg()
                s_plus = asm.add_nonneg()
                s_minus = asm.add_nonneg()
                # t >= ref - y  and  t >= y - ref, with y = p_i Tr(rho_i' Pi_j)
                asm.add_row([(offs[j], w_vec), (t, [1.0]), (s_plus, [-1.0])], ref[i, j])
                asm.add_row([(offs[j], -w_vec), (t, [1.0]), (s_minus, [-1.0])], -ref[i, j])
                asm.add_objective(t, [weight])
            else:
                s = asm.add_free()
                asm.add_row([(offs[j], w_vec), (s, [1.0])], ref[i, j])
                asm.add_quad(s, [2.0 * weight])


def build_fit_min_lp(spec: ProblemSpec, ell: int, reference: JointDistribution) -> SchemeProgram:
    """Match a reference outcome distribution as closely as possible.

    Minimizes ``sum_ij |ref_ij - p_i Tr(rho_i' Pi_j)|^ell`` over inconclusive-
    augmented POVMs, with ``ell = 1`` (L1) or ``ell = 2`` (sum of squares).
    """
    if ell not in (1, 2):
        raise ValueError("ell must be 1 or 2")
    ref = _check_reference(spec, reference)
    asm = _Assembler()
    offs = _element_blocks(asm, spec, inconclusive=True)
    _deviation_terms(asm, spec, offs, ref, ell, weight=1.0)
    name = "minl1" if ell == 1 else "minss"
    return _make_scheme(asm, spec, _labels(spec, True), maximize=False, name=name)


def build_fit_meco(spec: ProblemSpec, reference: JointDistribution) -> SchemeProgram:
    """Maximize success while pinning the distribution near the reference.

    Diagonal joint probabilities are bounded above by the reference and
    off-diagonal ones below, which stops the optimizer from trading one
    state's fidelity against another's.  The program can be infeasible when
    noise makes those bounds incompatible; this surfaces as an infeasible
    solver status.
    """
    ref = _check_reference(spec, reference)
    asm = _Assembler()
    svecs = _noisy_svecs(spec)
    offs = _element_blocks(asm, spec, inconclusive=True)
    _success_objective(asm, spec, offs, svecs)
    k = spec.num_states
    for i in range(k):
        for j in range(k):
            w_vec = spec.priors[i] * svecs[i]
            slack = asm.add_nonneg()
            if i == j:
                asm.add_row([(offs[j], w_vec), (slack, [1.0])], ref[i, j])
            else:
                asm.add_row([(offs[j], w_vec), (slack, [-1.0])], ref[i, j])
    return _make_scheme(asm, spec, _labels(spec, True), maximize=True, name="meco")


def build_hybrid(spec: ProblemSpec, w: float, ell: int,
                 reference: JointDistribution) -> SchemeProgram:
    """Weighted trade-off between success probability and distribution fit.

    Maximizes ``P_succ - w * sum_ij |ref_ij - p_i Tr(rho_i' Pi_j)|^ell``.
    ``w = 0`` recovers plain success maximization; large ``w`` forces the
    distribution onto the reference.
    """
    if w < 0:
        raise ValueError("w must be nonnegative")
    if ell not in (1, 2):
        raise ValueError("ell must be 1 or 2")
    ref = _check_reference(spec, reference)
    asm = _Assembler()
    svecs = _noisy_svecs(spec)
    offs = _element_blocks(asm, spec, inconclusive=True)
    _success_objective(asm, spec, offs, svecs)
    if w > 0:
        _deviation_terms(asm, spec, offs, ref, ell, weight=w)
    return _make_scheme(asm, spec, _labels(spec, True), maximize=True, name="hybrid")


# --------------------------------------------------------------------------
# Decoding and convenience wrappers
# --------------------------------------------------------------------------

def scheme_value(scheme: SchemeProgram, solution: Solution) -> float:
    """The scheme's natural objective value (success probability for
    maximization schemes, distribution deviation for the fit schemes)."""
    return -solution.objective if scheme.maximize else solution.objective


def decode_povm(scheme: SchemeProgram, solution: Solution) -> Povm:
    """Extract, clean up, and label the POVM from a solved program.

    Each element block is symmetrized and projected onto the PSD cone; the
    set is then rescaled by ``S^(-1/2) Pi S^(-1/2)`` with ``S`` the element
    sum so completeness holds exactly.  Rescaling is refused (DecodeError)
    when ``||S - I||_F > 1e-3``, which signals an unconverged solve.
    """
    if solution.status not in (OPTIMAL, MAX_ITERS):
        raise DecodeError(f"cannot decode a solution with status {solution.status!r}")
    d = scheme.dim
    elements = []
    for idx, carrier in zip(scheme.element_blocks, scheme.carriers):
        if idx is None:
            elements.append(np.zeros((d, d), dtype=complex))
            continue
        block = psd_project(solution.block(scheme.program, idx))
        if carrier is not None:
            block = carrier @ block @ carrier.conj().T
        elements.append(block)
    total = sum(elements)
    dev = float(np.linalg.norm(total - np.eye(d)))
    if dev > 1e-3:
        raise DecodeError(f"element sum is {dev:.3e} from identity; solve did not converge")
    w, u = np.linalg.eigh(total)
    inv_sqrt = (u * (1.0 / np.sqrt(w))) @ u.conj().T
    cleaned = []
    for e in elements:
        m = inv_sqrt @ e @ inv_sqrt
        cleaned.append(0.5 * (m + m.conj().T))
    return Povm(dim=d, elements=tuple(cleaned), labels=scheme.labels)


def uqsd_reference(spec: ProblemSpec, tol: float = 1e-8,
                   max_iters: int = 200_000) -> JointDistribution:
    """Outcome distribution of optimal noiseless unambiguous discrimination.

    This is the default reference for the fit and hybrid schemes: the joint
    distribution produced by the optimal inconclusive-augmented POVM on the
    noise-free states.
    """
    noiseless = spec.with_noise(0.0)
    scheme = build_uqsd(noiseless)
    solution = solve(scheme.program, tol=tol, max_iters=max_iters)
    povm = decode_povm(scheme, solution)
    return joint_distribution(noiseless, povm, 0.0)


def build_scheme(spec: ProblemSpec, name: str, *, rate: float = 0.1,
                 bound: str = AT_LEAST, alpha=None, beta=None, w: float = 0.3,
                 ell: int = 1, reference: JointDistribution | None = None,
                 tol: float = 1e-8) -> SchemeProgram:
    """Dispatch a scheme by name with keyword parameters.

    Fit-style schemes (``minl1``, ``minss``, ``meco``, ``hybrid``) default
    their reference to :func:`uqsd_reference` on the same instance.
    """
    if name not in SCHEME_NAMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {SCHEME_NAMES}")
    k = spec.num_states
    if name == "med":
        return build_med(spec)
    if name == "med_plus":
        return build_med_plus(spec)
    if name == "uqsd":
        return build_uqsd(spec)
    if name == "frio":
        return build_frio(spec, rate, bound)
    if name == "crossqsd":
        alpha = np.full(k, 0.1) if alpha is None else alpha
        beta = np.full(k, 0.1) if beta is None else beta
        return build_crossqsd(spec, alpha, beta)
    if reference is None:
        reference = uqsd_reference(spec, tol=tol)
    if name == "minl1":
        return build_fit_min_lp(spec, 1, reference)
    if name == "minss":
        return build_fit_min_lp(spec, 2, reference)
    if name == "meco":
        return build_fit_meco(spec, reference)
    return build_hybrid(spec, w, ell, reference)


def solve_scheme(spec: ProblemSpec, name: str, *, tol: float = 1e-8,
                 max_iters: int = 200_000, **params) -> SchemeResult:
    """Build, solve, and decode one scheme in a single call."""
    scheme = build_scheme(spec, name, tol=tol, **params)
    solution = solve(scheme.program, tol=tol, max_iters=max_iters)
    povm = decode_povm(scheme, solution)
    return SchemeResult(povm=povm, solution=solution, scheme=scheme)
