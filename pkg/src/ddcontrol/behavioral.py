"""Trajectory containers and Hankel-matrix machinery.

A length-N input-output record of a linear system, arranged into Hankel
matrices, spans every trajectory of that system once the input is
persistently exciting of sufficient order. This module provides the
containers (Trajectory, HankelMatrix, HankelSet), the excitation check,
and a least-squares membership test certifying whether a candidate
window could have been produced by the same system.

Indexing conventions: sequence time indices are 0-based everywhere;
block rows of a Hankel matrix are 1-based (``block_rows(H, a, b)``
selects blocks a..b inclusive), matching the standard superscript
notation H^{a:b}. The two conventions meet only inside ``block_rows``.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import PersistencyError
from .linalg import RANK_RTOL


@dataclass(frozen=True)
class Trajectory:
    """A finite input-output record, one row per time step.

    Attributes:
        inputs: array of shape (N, m).
        outputs: array of shape (N, p).
    """

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.outputs, dtype=float)
        if u.ndim == 1:
            u = u[:, None]       # scalar channel
        if y.ndim == 1:
            y = y[:, None]
        if u.ndim != 2 or y.ndim != 2:
            raise ValueError("inputs and outputs must be 2-D (N, channels)")
        if len(u) != len(y):
            raise ValueError(
                f"inputs and outputs must have equal length, got {len(u)} != {len(y)}"
            )
        if len(u) < 1:
            raise ValueError("a trajectory needs at least one step")
        object.__setattr__(self, "inputs", u)
        object.__setattr__(self, "outputs", y)

    @property
    def N(self) -> int:
        return self.inputs.shape[0]

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    @property
    def p(self) -> int:
        return self.outputs.shape[1]

    def window(self, start: int, length: int) -> "Trajectory":
        """Contiguous sub-trajectory of the given length starting at ``start``."""
        if start < 0 or start + length > self.N:
            raise ValueError(f"window [{start}, {start + length}) out of range")
        return Trajectory(self.inputs[start:start + length],
                          self.outputs[start:start + length])

    def stacked(self) -> np.ndarray:
        """All steps stacked as one vector: (u_0, y_0, ..., u_{N-1}, y_{N-1})."""
        return np.hstack([self.inputs, self.outputs]).ravel()


@dataclass(frozen=True)
class HankelMatrix:
    """Dense Hankel matrix of a vector sequence.

    ``entries`` has shape (q*L, N-L+1); column j stacks the signal values
    at times j .. j+L-1. ``depth`` is L and ``block_size`` is q.
    """

    entries: np.ndarray
    depth: int
    block_size: int

    @property
    def columns(self) -> int:
        return self.entries.shape[1]


def build_hankel(z: np.ndarray, L: int) -> HankelMatrix:
    """Hankel matrix of depth L from a sequence of N vectors.

    Args:
        z: array of shape (N,) or (N, q).
        L: depth, 1 <= L <= N.

    Returns:
        HankelMatrix with entries of shape (q*L, N-L+1).
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    N, q = z.shape
    if L < 1 or L > N:
        raise ValueError(f"depth out of range: L={L} with N={N}")
    cols = N - L + 1
    H = np.empty((q * L, cols))
    for i in range(L):
        H[i * q:(i + 1) * q, :] = z[i:i + cols, :].T
    return HankelMatrix(H, depth=L, block_size=q)


def block_rows(H: HankelMatrix, a: int, b: int) -> np.ndarray:
    """Rows of block rows a..b (1-based, inclusive) of a Hankel matrix."""
    if not (1 <= a <= b <= H.depth):
        raise IndexError(f"block rows [{a}:{b}] out of range for depth {H.depth}")
    q = H.block_size
    return H.entries[(a - 1) * q:b * q, :]


def persistency_check(u: np.ndarray, L: int) -> bool:
    """Whether a signal is persistently exciting of order L.

    True iff the depth-L Hankel matrix of the signal has full row rank m*L.
    Degenerate cases (L < 1, fewer than L samples) are simply not exciting
    and return False rather than raising.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    N, m = u.shape
    if L < 1 or N < L:
        return False
    H = build_hankel(u, L).entries
    s = np.linalg.svd(H, compute_uv=False)
    rank = int(np.count_nonzero(s > max(H.shape) * s[0] * RANK_RTOL)) if s.size else 0
    return rank == m * L


def membership_residual(data: Trajectory, candidate: Trajectory,
                        n: int | None = None) -> float:
    """Least-squares residual of expressing a candidate window in the data.

    Solves ``[H_L(u_d); H_L(y_d)] a = [u_bar; y_bar]`` for the stacked
    candidate and returns the Euclidean norm of the residual. A residual
    of numerically zero certifies that the candidate is a trajectory of
    the system that produced the data, provided the data input is
    persistently exciting of order L+n (checked when ``n`` is supplied).
    """
    if candidate.m != data.m or candidate.p != data.p:
        raise ValueError(
            f"channel mismatch: data is ({data.m}, {data.p}), "
            f"candidate is ({candidate.m}, {candidate.p})"
        )
    L = candidate.N
    if n is not None and not persistency_check(data.inputs, L + n):
        raise PersistencyError(
            f"data input is not persistently exciting of order L+n = {L + n}"
        )
    H = np.vstack([build_hankel(data.inputs, L).entries,
                   build_hankel(data.outputs, L).entries])
    rhs = np.concatenate([candidate.inputs.ravel(), candidate.outputs.ravel()])
    coeff = np.linalg.lstsq(H, rhs, rcond=None)[0]
    return float(np.linalg.norm(H @ coeff - rhs))


@dataclass(frozen=True)
class HankelSet:
    """Hankel matrices of a data record, preassembled for the controller.

    ``U`` and ``Y`` have depth 2n+mu+1. ``H_alpha`` stacks the blocks used
    to pin down an initialized prediction (past inputs, full future input
    window, past outputs); ``H_beta`` stacks the blocks constrained by the
    steering correction (past inputs and outputs pinned to zero, terminal
    input and output windows pinned to the target equilibrium).
    """

    U: HankelMatrix
    Y: HankelMatrix
    H_alpha: np.ndarray
    H_beta: np.ndarray
    n: int
    mu: int

    @property
    def m(self) -> int:
        return self.U.block_size

    @property
    def p(self) -> int:
        return self.Y.block_size

    @property
    def columns(self) -> int:
        return self.U.columns


def build_hankel_set(data: Trajectory, n: int, mu: int) -> HankelSet:
    """Assemble the depth-(2n+mu+1) Hankel matrices of a data record.

    Args:
        data: offline record with noise-free outputs.
        n: upper bound on the system order.
        mu: prediction horizon (>= 1).
    """
    if n < 1 or mu < 1:
        raise ValueError(f"need n >= 1 and mu >= 1, got n={n}, mu={mu}")
    depth = 2 * n + mu + 1
    if data.N < depth:
        raise ValueError(
            f"data of length {data.N} too short for Hankel depth {depth}"
        )
    U = build_hankel(data.inputs, depth)
    Y = build_hankel(data.outputs, depth)
    H_alpha = np.vstack([
        block_rows(U, 1, n),
        block_rows(U, n + 1, 2 * n + mu + 1),
        block_rows(Y, 1, n),
    ])
    H_beta = np.vstack([
        block_rows(U, 1, n),
        block_rows(U, n + mu + 1, 2 * n + mu + 1),
        block_rows(Y, 1, n),
        block_rows(Y, n + mu + 1, 2 * n + mu),
    ])
    return HankelSet(U=U, Y=Y, H_alpha=H_alpha, H_beta=H_beta, n=n, mu=mu)


def save_trajectory_csv(traj: Trajectory, path) -> None:
    """Write a trajectory as CSV, one row per step, columns u_1..u_m,y_1..y_p."""
    header = [f"u_{i + 1}" for i in range(traj.m)] + \
             [f"y_{i + 1}" for i in range(traj.p)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(traj.N):
            row = [f"{v:.17g}" for v in traj.inputs[k]] + \
                  [f"{v:.17g}" for v in traj.outputs[k]]
            writer.writerow(row)


def load_trajectory_csv(path) -> Trajectory:
    """Read a trajectory written by :func:`save_trajectory_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty trajectory file")
        m = sum(1 for c in header if c.startswith("u_"))
        p = sum(1 for c in header if c.startswith("y_"))
        if m == 0 or p == 0 or m + p != len(header):
            raise ValueError(f"{path}: header must be u_1..u_m,y_1..y_p, got {header}")
        rows = [list(map(float, row)) for row in reader if row]
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{path}: no data rows")
    return Trajectory(arr[:, :m], arr[:, m:])
