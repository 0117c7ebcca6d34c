import numpy as np
import pytest

from qsdkit import DensityMatrix, Povm, ProblemSpec, PureState


def random_pure(dim, rng):
    a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(a / np.linalg.norm(a))


def random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_povm(dim, k, rng, inconclusive=False):
    """Random complete POVM: normalize random PSD operators by S^(-1/2)."""
    count = k + (1 if inconclusive else 0)
    raw = []
    for _ in range(count):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    w, u = np.linalg.eigh(total)
    inv_sqrt = (u * (1.0 / np.sqrt(w))) @ u.conj().T
    elements = []
    for m in raw:
        e = inv_sqrt @ m @ inv_sqrt
        elements.append(0.5 * (e + e.conj().T))
    labels = tuple(range(k)) + (("inconclusive",) if inconclusive else ())
    return Povm(dim=dim, elements=tuple(elements), labels=labels)


def random_problem(rng, k=None, dim=None, lam=None, pure=False):
    k = int(rng.integers(2, 5)) if k is None else k
    dim = int(rng.choice([2, 4, 8])) if dim is None else dim
    lam = float(rng.choice([0.0, 0.05, 0.3])) if lam is None else lam
    if pure:
        states = [random_pure(dim, rng) for _ in range(k)]
        return ProblemSpec.from_states(states, priors=rng.dirichlet(np.ones(k)),
                                       noise_lambda=lam)
    states = [random_density(dim, rng) for _ in range(k)]
    return ProblemSpec(tuple(states), rng.dirichlet(np.ones(k)), lam)


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)
