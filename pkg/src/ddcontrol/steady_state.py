"""Data-driven characterization of a system's steady-state set.

An input-output pair is an equilibrium of a linear system exactly when
holding it for n+1 consecutive steps forms a valid trajectory. Writing
that condition with the data's depth-(n+1) Hankel matrix yields a single
matrix S whose null space is the steady-state set: no model is involved,
only recorded data. The orthogonal projector onto null(S) is what the
controller's gradient step projects through, and minimizing a cost over
null(S) gives the reference point regret is measured against.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .behavioral import Trajectory, build_hankel, persistency_check
from .errors import NonConvergenceError, PersistencyError

#: stop threshold on the projected gradient norm for the iterative solver
_GRAD_TOL = 1e-10
_MAX_ITERS = 10 ** 6


@dataclass(frozen=True)
class SteadyStateProjector:
    """Steady-state set of a system, derived from data alone.

    Attributes:
        S: matrix of shape ((m+p)(n+1), m+p); z is an equilibrium iff S z = 0.
        P: orthogonal projector of shape (m+p, m+p) onto null(S).
        basis: orthonormal columns spanning null(S), shape (m+p, d).
    """

    S: np.ndarray
    P: np.ndarray
    basis: np.ndarray
    m: int
    p: int
    n: int

    @property
    def dim(self) -> int:
        """Dimension of the steady-state set (m for generic stable systems)."""
        return self.basis.shape[1]


def build_projector(data: Trajectory, n: int) -> SteadyStateProjector:
    """Build the steady-state matrix S, projector P, and null-space basis.

    Requires the data input to be persistently exciting of order 2n+1 and
    the data outputs to be noise free; under those conditions null(S) is
    exactly the set of equilibrium input-output pairs of the data-generating
    system.

    Args:
        data: offline record with noise-free outputs.
        n: upper bound on the system order.
    """
    m, p = data.m, data.p
    if n < 1:
        raise ValueError(f"order bound must be >= 1, got {n}")
    if data.N - n < 1:
        raise ValueError(
            f"degenerate data: depth-{n + 1} Hankel matrix has no columns"
        )
    if not persistency_check(data.inputs, 2 * n + 1):
        raise PersistencyError(
            f"data input is not persistently exciting of order 2n+1 = {2 * n + 1}"
        )
    H = np.vstack([build_hankel(data.inputs, n + 1).entries,
                   build_hankel(data.outputs, n + 1).entries])
    ones = np.ones((n + 1, 1))
    stack_m = np.kron(ones, np.eye(m))
    stack_p = np.kron(ones, np.eye(p))
    repeat = np.block([
        [stack_m, np.zeros(((n + 1) * m, p))],
        [np.zeros(((n + 1) * p, m)), stack_p],
    ])
    S = (H @ linalg.pinv(H) - np.eye((m + p) * (n + 1))) @ repeat

    # One SVD of S drives the pseudoinverse, the projector, and the basis,
    # so all three agree on the numerical rank. S is tall, so the economy
    # SVD still carries the complete right singular basis.
    U, s, Vt = np.linalg.svd(S, full_matrices=False)
    cutoff = linalg.rank_cutoff(S.shape, s[0]) if s.size else 0.0
    rank = int(np.count_nonzero(s > cutoff))
    basis = Vt[rank:].T.copy()
    s_inv = np.zeros_like(s)
    s_inv[:rank] = 1.0 / s[:rank]
    S_pinv = Vt.T @ (s_inv[:, None] * U.T)
    P = np.eye(m + p) - S_pinv @ S
    return SteadyStateProjector(S=S, P=P, basis=basis, m=m, p=p, n=n)


def project(proj: SteadyStateProjector, z: np.ndarray) -> np.ndarray:
    """Euclidean projection of a point onto the steady-state set."""
    z = np.asarray(z, dtype=float)
    if z.shape != (proj.m + proj.p,):
        raise ValueError(f"expected a point in R^{proj.m + proj.p}, got shape {z.shape}")
    return proj.P @ z


def optimal_steady_state(proj: SteadyStateProjector, cost, t: int = 0) -> np.ndarray:
    """Minimizer of a strongly convex cost over the steady-state set.

    Quadratic costs (those exposing ``quadratic_terms``) are solved exactly
    through the reduced normal equations in the null-space basis; general
    smooth costs fall back to projected gradient iteration driven to a
    projected-gradient norm of 1e-10.
    """
    B = proj.basis
    terms = getattr(cost, "quadratic_terms", lambda _t: None)(t)
    if terms is not None:
        H, g, _ = terms
        w = linalg.lstsq(B.T @ H @ B, -B.T @ g)
        return B @ w
    if cost.alpha_z <= 0:
        raise ValueError("iterative steady-state solve needs a strongly convex cost")
    step = 2.0 / (cost.alpha_z + cost.l_z)
    z = np.zeros(proj.m + proj.p)
    for _ in range(_MAX_ITERS):
        grad = cost.grad(t, z)
        if np.linalg.norm(proj.P @ grad) <= _GRAD_TOL:
            return z
        z = proj.P @ (z - step * grad)
    raise NonConvergenceError(
        f"projected gradient did not reach tolerance {_GRAD_TOL} "
        f"within {_MAX_ITERS} iterations"
    )
