"""First-order operator-splitting solver for small conic programs.

Solves

    minimize    c'x + (1/2) x' diag(q) x
    subject to  A x = b,   x in K

where ``K`` is a product of complex-Hermitian PSD cones (parametrized over
the reals, see :func:`svec`), nonnegative orthants, and free blocks.
Inequalities are expected to be encoded by the caller with nonnegative slack
variables.

The method is ADMM on the splitting ``f(x) = c'x + q-term + indicator{Ax=b}``,
``g(z) = indicator{z in K}``: an affine projection (cached factorization of
``A A'``), a cone projection per block (eigenvalue clipping for PSD blocks),
and a scaled dual update, with residual balancing of the penalty parameter.
Everything is deterministic: fixed zero initialization, no randomized
internals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

_SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------
# Cone blocks and the svec parametrization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PsdCone:
    """Complex-Hermitian PSD cone of matrix dimension ``dim``.

    The real parametrization has length ``dim**2``: diagonal entries, then
    upper-triangle real parts scaled by sqrt(2), then upper-triangle
    imaginary parts scaled by sqrt(2).  The scaling makes the Euclidean
    inner product of two parametrizations equal the Frobenius inner product
    ``Re Tr(A B)`` of the matrices.
    """

    dim: int

    @property
    def size(self) -> int:
        return self.dim * self.dim


@dataclass(frozen=True)
class NonNegCone:
    size: int


@dataclass(frozen=True)
class FreeCone:
    size: int


def svec(m: np.ndarray) -> np.ndarray:
    """Real parametrization of a complex Hermitian matrix (inner-product preserving)."""
    m = np.asarray(m, dtype=complex)
    d = m.shape[0]
    iu = np.triu_indices(d, k=1)
    upper = m[iu]
    return np.concatenate([m.diagonal().real, _SQRT2 * upper.real, _SQRT2 * upper.imag])


def smat(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    if v.size != dim * dim:
        raise ValueError(f"vector length {v.size} does not match dim {dim}")
    t = dim * (dim - 1) // 2
    iu = np.triu_indices(dim, k=1)
    m = np.zeros((dim, dim), dtype=complex)
    m[np.diag_indices(dim)] = v[:dim]
    upper = (v[dim:dim + t] + 1j * v[dim + t:]) / _SQRT2
    m[iu] = upper
    m[(iu[1], iu[0])] = upper.conj()
    return m


def _smat_batch(v: np.ndarray, dim: int) -> np.ndarray:
    """(nb, dim**2) stacked svec coordinates -> (nb, dim, dim) Hermitian matrices."""
    nb = v.shape[0]
    t = dim * (dim - 1) // 2
    iu = np.triu_indices(dim, k=1)
    m = np.zeros((nb, dim, dim), dtype=complex)
    m[:, np.arange(dim), np.arange(dim)] = v[:, :dim]
    upper = (v[:, dim:dim + t] + 1j * v[:, dim + t:]) / _SQRT2
    m[:, iu[0], iu[1]] = upper
    m[:, iu[1], iu[0]] = upper.conj()
    return m


def _svec_batch(m: np.ndarray) -> np.ndarray:
    nb, dim = m.shape[0], m.shape[1]
    iu = np.triu_indices(dim, k=1)
    upper = m[:, iu[0], iu[1]]
    diag = m[:, np.arange(dim), np.arange(dim)].real
    return np.concatenate([diag, _SQRT2 * upper.real, _SQRT2 * upper.imag], axis=1)


def psd_project(m: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix: symmetrize, clip negative eigenvalues."""
    m = np.asarray(m, dtype=complex)
    h = 0.5 * (m + m.conj().T)
    w, u = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return (u * w) @ u.conj().T


# --------------------------------------------------------------------------
# Program and solution containers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeProgram:
    """A conic program in the solver's standard form (minimization)."""

    blocks: tuple
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    quad_diag: np.ndarray | None = None

    def __post_init__(self):
        n = sum(blk.size for blk in self.blocks)
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if c.size != n:
            raise ValueError(f"objective length {c.size} does not match variable count {n}")
        if A.shape != (b.size, n):
            raise ValueError(f"constraint shape {A.shape} does not match ({b.size}, {n})")
        if self.quad_diag is not None:
            q = np.asarray(self.quad_diag, dtype=float).ravel()
            if q.size != n or np.any(q < 0):
                raise ValueError("quad_diag must be a nonnegative vector of the variable length")
            object.__setattr__(self, "quad_diag", q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def num_vars(self) -> int:
        return self.c.size


OPTIMAL = "optimal"
MAX_ITERS = "max_iters"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Solution:
    x: np.ndarray
    status: str
    primal_residual: float
    dual_residual: float
    objective: float
    iterations: int

    def block(self, program: ConeProgram, index: int) -> np.ndarray:
        """Extract one block of the solution; PSD blocks come back as matrices."""
        off = 0
        for i, blk in enumerate(program.blocks):
            if i == index:
                seg = self.x[off:off + blk.size]
                if isinstance(blk, PsdCone):
                    return smat(seg, blk.dim)
                return seg
            off += blk.size
        raise IndexError(index)


# --------------------------------------------------------------------------
# The solver
# --------------------------------------------------------------------------

class _ConeProjector:
    """Blockwise projection onto K; PSD blocks of equal dimension are batched."""

    def __init__(self, blocks):
        self.nonneg_mask = np.zeros(sum(b.size for b in blocks), dtype=bool)
        self.psd_groups = {}  # dim -> list of offsets
        off = 0
        for blk in blocks:
            if isinstance(blk, NonNegCone):
                self.nonneg_mask[off:off + blk.size] = True
            elif isinstance(blk, PsdCone):
                self.psd_groups.setdefault(blk.dim, []).append(off)
            elif not isinstance(blk, FreeCone):
                raise TypeError(f"unknown cone block {blk!r}")
            off += blk.size
        self.psd_groups = {d: np.asarray(offs) for d, offs in self.psd_groups.items()}

    def __call__(self, v: np.ndarray) -> np.ndarray:
        out = v.copy()
        np.maximum(out, 0.0, where=self.nonneg_mask, out=out)
        for dim, offs in self.psd_groups.items():
            size = dim * dim
            stacked = np.stack([v[o:o + size] for o in offs])
            mats = _smat_batch(stacked, dim)
            mats = 0.5 * (mats + mats.conj().transpose(0, 2, 1))
            w, u = np.linalg.eigh(mats)
            w = np.clip(w, 0.0, None)
            proj = (u * w[:, None, :]) @ u.conj().transpose(0, 2, 1)
            flat = _svec_batch(proj)
            for row, o in enumerate(offs):
                out[o:o + size] = flat[row]
        return out


class _AffineProjector:
    """Projection onto {x : Ax = b} in the metric diag(q) + rho*I.

    For ``q = 0`` the factorization of ``A A'`` is reused for every rho; with
    a quadratic term the system matrix depends on rho and is refactored when
    the penalty changes.  Redundant rows are tolerated by falling back to a
    pseudoinverse (least-squares multiplier).
    """

    def __init__(self, A, b, quad):
        self.A = A
        self.AT = A.T.copy()
        self.b = b
        self.quad = quad
        self._rho = None
        self._solve = None
        if quad is None:
            self._solve = self._make_solver(A @ A.T)

    @staticmethod
    def _make_solver(gram):
        try:
            cho = scipy.linalg.cho_factor(gram, check_finite=False)
            return lambda r: scipy.linalg.cho_solve(cho, r, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            pinv = np.linalg.pinv(gram, rcond=1e-12)
            return lambda r: pinv @ r

    def set_rho(self, rho):
        self._rho = rho
        if self.quad is not None:
            d_inv = 1.0 / (self.quad + rho)
            self._d_inv = d_inv
            self._solve = self._make_solver((self.A * d_inv[None, :]) @ self.AT)

    def project(self, v, c, rho):
        """argmin c'x + q-term + (rho/2)||x - v||^2 subject to Ax = b."""
        if self.quad is None:
            w = v - c / rho
            if self.b.size == 0:
                return w
            mu = self._solve(self.A @ w - self.b)
            return w - self.AT @ mu
        t = self._d_inv * (rho * v - c)
        if self.b.size == 0:
            return t
        mu = self._solve(self.A @ t - self.b)
        return t - self._d_inv * (self.AT @ mu)


def _row_equilibrate(A, b):
    """Scale constraint rows to unit norm; drop zero rows (inconsistent ones fail)."""
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 1e-14
    if not np.all(keep):
        if np.any(np.abs(b[~keep]) > 1e-12):
            raise ValueError("constraint system contains an inconsistent zero row")
        A, b, norms = A[keep], b[keep], norms[keep]
    scale = 1.0 / norms
    return A * scale[:, None], b * scale


class _AndersonMemory:
    """Safeguarded type-II Anderson acceleration of the splitting map.

    Keeps the last ``mem`` iterate/image pairs of the fixed-point map
    ``w = (z, u) -> F(w)`` and proposes the residual-minimizing affine
    combination of the images.  Candidates are only adopted when their own
    fixed-point residual beats the plain step's, so acceleration can never
    drive the iteration away from the solution.  Everything is least-squares
    based and deterministic.
    """

    def __init__(self, mem: int = 10):
        self.mem = mem
        self.ws = []
        self.fws = []

    def clear(self):
        self.ws.clear()
        self.fws.clear()

    def push(self, w, fw):
        self.ws.append(w)
        self.fws.append(fw)
        if len(self.ws) > self.mem:
            self.ws.pop(0)
            self.fws.pop(0)

    def candidate(self):
        if len(self.ws) < 3:
            return None
        residuals = np.stack([w - f for w, f in zip(self.ws, self.fws)], axis=1)
        diffs = residuals[:, 1:] - residuals[:, :-1]
        try:
            gamma, *_ = np.linalg.lstsq(diffs, residuals[:, -1], rcond=None)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(gamma)):
            return None
        theta = np.zeros(residuals.shape[1])
        theta[-1] = 1.0
        theta[1:] -= gamma
        theta[:-1] += gamma
        return np.stack(self.fws, axis=1) @ theta


def solve(program: ConeProgram, tol: float = 1e-8, max_iters: int = 200_000,
          rho: float | None = None, over_relax: float = 1.6,
          acceleration: int = 10) -> Solution:
    """Solve a :class:`ConeProgram` to the requested residual tolerance.

    Returns the best iterate found.  The reported ``x`` is the affine-step
    iterate, which satisfies ``Ax = b`` to factorization accuracy; its cone
    violation is bounded by the primal residual.

    ``rho`` is the initial penalty (default 1.0, or 0.02 for programs with a
    quadratic term, where a small penalty lets the quadratic dominate the
    proximal step); it is rebalanced automatically.  ``acceleration`` is the
    Anderson memory size (0 disables it).

    Status is ``optimal`` when both normalized residuals fall below ``tol``,
    ``infeasible`` when the residuals stall far from feasibility (stagnation
    over a long window), and ``max_iters`` otherwise.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = program.num_vars
    A, b = _row_equilibrate(program.A, program.b)
    c = program.c
    quad = program.quad_diag
    if rho is None:
        rho = 0.02 if quad is not None else 1.0
    project_cone = _ConeProjector(program.blocks)
    affine = _AffineProjector(A, b, quad)
    affine.set_rho(rho)

    def step(z, u, penalty):
        x = affine.project(z - u, c, penalty)
        x_relaxed = over_relax * x + (1.0 - over_relax) * z
        z_new = project_cone(x_relaxed + u)
        u_new = u + x_relaxed - z_new
        return x, z_new, u_new

    z = np.zeros(n)
    u = np.zeros(n)
    x = np.zeros(n)
    anderson = _AndersonMemory(acceleration) if acceleration > 0 else None

    best_x = x
    best_res = math.inf
    window = 10_000
    stall_floor = 1e-4
    prev_window_best = math.inf

    pri_res = dual_res = math.inf
    it = 0
    status = MAX_ITERS
    for it in range(1, max_iters + 1):
        x, z_new, u_new = step(z, u, rho)
        pri_res = float(np.linalg.norm(x - z_new)) / (1.0 + max(
            float(np.linalg.norm(x)), float(np.linalg.norm(z_new))))
        dual_res = rho * float(np.linalg.norm(z_new - z)) / (
            1.0 + rho * float(np.linalg.norm(u_new)))

        combined = max(pri_res, dual_res)
        if combined < best_res:
            best_res = combined
            best_x = x

        if pri_res <= tol and dual_res <= tol:
            # Verify the affine system directly before declaring optimality;
            # the normalized residuals alone can look converged at a
            # numerically degenerate point (e.g. after a wild extrapolation).
            if float(np.linalg.norm(A @ x - b)) <= tol * (1.0 + float(np.linalg.norm(b))):
                z, u = z_new, u_new
                status = OPTIMAL
                best_x = x
                break

        accepted = False
        if anderson is not None:
            w = np.concatenate([z, u])
            fw = np.concatenate([z_new, u_new])
            anderson.push(w, fw)
            cand = anderson.candidate()
            if cand is not None and float(np.linalg.norm(cand)) <= 1e4 * (
                    1.0 + float(np.linalg.norm(w))):
                z_c, u_c = cand[:n], cand[n:]
                _, z2, u2 = step(z_c, u_c, rho)
                res_cand = float(np.linalg.norm(np.concatenate([z_c - z2, u_c - u2])))
                res_plain = float(np.linalg.norm(w - fw))
                if res_cand < res_plain:
                    z, u = z2, u2
                    accepted = True
        if not accepted:
            z, u = z_new, u_new

        # Residual balancing keeps the primal and dual residuals within a
        # factor of ten of each other; u is rescaled so the unscaled dual
        # variable rho*u is untouched.  The fixed-point map changes with the
        # penalty, so the acceleration memory is flushed.
        if it % 100 == 0:
            if pri_res > 10.0 * dual_res:
                rho *= 2.0
                u *= 0.5
                affine.set_rho(rho)
                if anderson is not None:
                    anderson.clear()
            elif dual_res > 10.0 * pri_res:
                rho *= 0.5
                u *= 2.0
                affine.set_rho(rho)
                if anderson is not None:
                    anderson.clear()

        if it % window == 0 and it >= 2 * window:
            if best_res > stall_floor and best_res > 0.99 * prev_window_best:
                status = INFEASIBLE
                break
            prev_window_best = best_res

    x_out = best_x if status != OPTIMAL else x
    obj = float(c @ x_out)
    if quad is not None:
        obj += 0.5 * float(x_out @ (quad * x_out))
    if status == OPTIMAL:
        out_pri, out_dual = pri_res, dual_res
    else:
        out_pri = out_dual = best_res
    return Solution(x=x_out, status=status, primal_residual=out_pri,
                    dual_residual=out_dual, objective=obj, iterations=it)
