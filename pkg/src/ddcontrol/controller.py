"""Per-step output-feedback controller built on recorded data.

Each step runs a fixed pipeline: estimate the latest measurement noise by
comparing the measurement against the controller's own one-step output
prediction; solve for trajectory coefficients that encode the current
initialization and the previously planned input sequence; read out the
mu-step-ahead output prediction; take one projected gradient step on the
most recently revealed cost to update the steady-state target; solve for
a steering correction that reaches the new target in mu steps and parks
there; and emit the first input of the updated plan. All pseudoinverses
are precomputed, so the online work per step is one gradient evaluation
plus a handful of matrix-vector products.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .behavioral import (HankelSet, Trajectory, block_rows,
                         membership_residual, persistency_check)
from .costs import CostFunction
from .errors import FeasibilityError, PersistencyError
from .steady_state import SteadyStateProjector

#: relative residual tolerance for the coefficient solves
FEAS_RTOL = 1e-7


@dataclass
class ControllerConfig:
    """Tuning knobs of the per-step controller.

    gamma: gradient step size (> 0).
    mu: prediction horizon; mu >= n always satisfies the reachability
        requirement since the controllability index never exceeds the
        system order.
    n: upper bound on the system order.
    q_mode: which seminorm the steering correction minimizes; one of
        "identity", "inputs", "outputs", "identity+inputs",
        "identity+future_inputs", or an explicit weight matrix.
    lambda_init: regularizer of the optional least-squares initialization.
    init_mode: "zero" (rest initialization) or "regularized".
    """

    gamma: float
    mu: int
    n: int
    q_mode: str = "identity+future_inputs"
    lambda_init: float = 0.0
    init_mode: str = "zero"

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.mu < 1:
            raise ValueError("mu must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.init_mode not in ("zero", "regularized"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.lambda_init < 0:
            raise ValueError("lambda_init must be nonnegative")


def check_step_size(gamma: float, alpha_z: float, l_z: float) -> bool:
    """Warn when the step size exceeds 2/(alpha_z + l_z).

    A large step only voids the tracking guarantee, it does not break the
    per-step algebra, so this is a warning rather than an error.
    """
    limit = 2.0 / (alpha_z + l_z)
    if gamma > limit * (1 + 1e-12):
        warnings.warn(
            f"step size gamma={gamma:.4g} exceeds 2/(alpha_z+l_z)={limit:.4g}; "
            "tracking guarantees no longer apply",
            stacklevel=2,
        )
        return False
    return True


def build_q(hankels: HankelSet, mode: str | np.ndarray) -> np.ndarray:
    """Weight matrix for the steering-correction seminorm."""
    if isinstance(mode, np.ndarray):
        Q = np.atleast_2d(np.asarray(mode, dtype=float))
    else:
        n, mu = hankels.n, hankels.mu
        eye = np.eye(hankels.columns)
        choices = {
            "identity": lambda: eye,
            "inputs": lambda: hankels.U.entries,
            "outputs": lambda: hankels.Y.entries,
            "identity+inputs": lambda: np.vstack([eye, hankels.U.entries]),
            "identity+future_inputs": lambda: np.vstack(
                [eye, block_rows(hankels.U, n + 1, 2 * n + mu + 1)]),
        }
        if mode not in choices:
            raise ValueError(f"unknown q_mode {mode!r}; options: {sorted(choices)}")
        Q = choices[mode]()
    if Q.shape[1] != hankels.columns:
        raise ValueError(
            f"Q must have {hankels.columns} columns, got {Q.shape[1]}"
        )
    return Q


@dataclass(frozen=True)
class Precomputed:
    """Offline matrices: everything the per-step loop multiplies by.

    ``H_alpha_pinv`` solves the prediction-coefficient system and
    ``Q_tilde`` maps a steering target mismatch to the minimum-seminorm
    correction coefficients. The named row blocks of the data Hankel
    matrices are the ones the loop reads out every step.
    """

    hankels: HankelSet
    Q: np.ndarray
    H_alpha_pinv: np.ndarray
    Q_tilde: np.ndarray
    U_past: np.ndarray      # U^{1:n}
    U_apply: np.ndarray     # U^{n+1}: row block emitting the applied input
    U_plan: np.ndarray      # U^{n+1:n+mu+1}: the planned input window
    U_tail: np.ndarray      # U^{n+mu+1:2n+mu+1}: terminal input window
    Y_past: np.ndarray      # Y^{1:n}
    Y_next: np.ndarray      # Y^{n+1}: one-step-ahead output prediction
    Y_ahead: np.ndarray     # Y^{n+mu+1}: mu-step-ahead output prediction
    Y_tail: np.ndarray      # Y^{n+mu+1:2n+mu}: terminal output window

    @property
    def n(self) -> int:
        return self.hankels.n

    @property
    def mu(self) -> int:
        return self.hankels.mu

    @property
    def m(self) -> int:
        return self.hankels.m

    @property
    def p(self) -> int:
        return self.hankels.p


def precompute(hankels: HankelSet, Q: np.ndarray) -> Precomputed:
    """Factor the offline data once; the loop then only multiplies.

    Verifies the excitation requirement (order 3n+mu+1) and the implied
    minimum data length before any factorization.
    """
    n, mu, m = hankels.n, hankels.mu, hankels.m
    order = 3 * n + mu + 1
    N = hankels.U.depth + hankels.U.columns - 1
    min_N = (m + 1) * order - 1
    if N < min_N:
        raise ValueError(
            f"data too short: need N >= {min_N} for excitation order {order}, got {N}"
        )
    u_data = np.empty((N, m))
    # reconstruct the raw input sequence from the first block row + last column
    first = hankels.U.entries[:m, :]
    u_data[:hankels.U.columns] = first.T
    last_col = hankels.U.entries[:, -1].reshape(hankels.U.depth, m)
    u_data[hankels.U.columns - 1:] = last_col
    if not persistency_check(u_data, order):
        raise PersistencyError(
            f"data input is not persistently exciting of order 3n+mu+1 = {order}"
        )
    if Q.shape[1] != hankels.columns:
        raise ValueError(
            f"Q must have {hankels.columns} columns, got {Q.shape[1]}"
        )
    H_beta = hankels.H_beta
    H_beta_pinv = linalg.pinv(H_beta)
    cols = hankels.columns
    kernel_proj = np.eye(cols) - H_beta_pinv @ H_beta
    Q_tilde = (np.eye(cols) - linalg.pinv(Q @ kernel_proj) @ Q) @ H_beta_pinv
    return Precomputed(
        hankels=hankels,
        Q=Q,
        H_alpha_pinv=linalg.pinv(hankels.H_alpha),
        Q_tilde=Q_tilde,
        U_past=block_rows(hankels.U, 1, n),
        U_apply=block_rows(hankels.U, n + 1, n + 1),
        U_plan=block_rows(hankels.U, n + 1, n + mu + 1),
        U_tail=block_rows(hankels.U, n + mu + 1, 2 * n + mu + 1),
        Y_past=block_rows(hankels.Y, 1, n),
        Y_next=block_rows(hankels.Y, n + 1, n + 1),
        Y_ahead=block_rows(hankels.Y, n + mu + 1, n + mu + 1),
        Y_tail=block_rows(hankels.Y, n + mu + 1, 2 * n + mu),
    )


@dataclass
class ControllerState:
    """Everything the controller remembers between steps.

    ``u_hist`` and ``y_den_hist`` hold the last n applied inputs and
    denoised outputs (measurement minus noise estimate); together they
    always form a valid trajectory of the plant, which is what keeps the
    coefficient solves feasible. ``u_pred`` is the currently planned input
    window of length mu+1, ``z_s_prev`` the latest steady-state estimate,
    ``coeff_prev`` the previous combined coefficients, and ``e_hat_hist``
    every noise estimate made so far (oldest first).
    """

    u_hist: np.ndarray
    y_den_hist: np.ndarray
    u_pred: np.ndarray
    z_s_prev: np.ndarray
    coeff_prev: np.ndarray | None
    e_hat_hist: list
    pending_alpha: np.ndarray | None = None

    def copy(self) -> "ControllerState":
        return replace(
            self,
            u_hist=self.u_hist.copy(),
            y_den_hist=self.y_den_hist.copy(),
            u_pred=self.u_pred.copy(),
            z_s_prev=self.z_s_prev.copy(),
            coeff_prev=None if self.coeff_prev is None else self.coeff_prev.copy(),
            e_hat_hist=list(self.e_hat_hist),
            pending_alpha=None if self.pending_alpha is None
            else self.pending_alpha.copy(),
        )


def initialize(config: ControllerConfig, pre: Precomputed,
               first_measurements: np.ndarray,
               u_init: np.ndarray | None = None,
               u_pred_init: np.ndarray | None = None,
               z_s_init: np.ndarray | None = None) -> ControllerState:
    """Controller state before the first step.

    In "zero" mode the plant is assumed to have been at rest under zero
    input: the noise estimates swallow the first n measurements entirely,
    so the stored history is the all-zero trajectory, which is valid for
    any linear system. In "regularized" mode the past inputs may be
    nonzero; the initial coefficients and noise estimates are found by a
    least-squares solve that trades the output-match residual against the
    norm of the unknowns with weight ``config.lambda_init``, subject to
    the input rows being matched exactly.
    """
    n, mu, m, p = pre.n, pre.mu, pre.m, pre.p
    y_meas = np.atleast_2d(np.asarray(first_measurements, dtype=float))
    if y_meas.shape != (n, p):
        raise ValueError(f"need the first n={n} measurements, shape (n, p)")
    u_pred = np.zeros((mu + 1, m)) if u_pred_init is None \
        else np.asarray(u_pred_init, dtype=float).reshape(mu + 1, m)
    z_s = np.zeros(m + p) if z_s_init is None else np.asarray(z_s_init, dtype=float)

    if config.init_mode == "zero":
        if u_init is not None and np.any(np.asarray(u_init) != 0):
            raise ValueError("zero-mode initialization requires zero past inputs")
        return ControllerState(
            u_hist=np.zeros((n, m)),
            y_den_hist=np.zeros((n, p)),
            u_pred=u_pred,
            z_s_prev=z_s,
            coeff_prev=None,
            e_hat_hist=[row.copy() for row in y_meas],
        )

    u_hist = np.zeros((n, m)) if u_init is None \
        else np.asarray(u_init, dtype=float).reshape(n, m)
    alpha0, _ = regularized_init_solution(
        pre, y_meas, u_hist, u_pred, z_s[:m], config.lambda_init)
    # Absorb the least-squares residual into the noise estimates so that
    # the stored history is exactly the trajectory the coefficients encode;
    # the feasibility induction of every later step depends on this.
    y_den = (pre.Y_past @ alpha0).reshape(n, p)
    e_hat = y_meas - y_den
    return ControllerState(
        u_hist=u_hist,
        y_den_hist=y_den,
        u_pred=u_pred,
        z_s_prev=z_s,
        coeff_prev=None,
        e_hat_hist=[row.copy() for row in e_hat],
        pending_alpha=alpha0,
    )


def regularized_init_solution(pre: Precomputed, y_meas: np.ndarray,
                              u_hist: np.ndarray, u_pred: np.ndarray,
                              u_s: np.ndarray, lam: float):
    """Joint least-squares choice of initial coefficients and noise estimates.

    Minimizes the output-match residual plus ``lam`` times the squared norm
    of the stacked unknowns (coefficients, noise estimates), subject to the
    input rows of the data matching the past inputs, the shifted input
    plan, and the held steady-state input exactly. Larger ``lam`` pulls the
    solution toward the minimum-norm feasible pair.

    Returns ``(alpha0, e_hat)`` where e_hat has shape (n, p).
    """
    n, m, p = pre.n, pre.m, pre.p
    cols = pre.hankels.columns
    rhs_u = np.concatenate([
        np.asarray(u_hist, dtype=float).ravel(),
        np.asarray(u_pred, dtype=float).ravel()[m:],
        np.tile(np.asarray(u_s, dtype=float), n + 1),
    ])
    U_full = pre.hankels.U.entries
    E = np.hstack([U_full, np.zeros((U_full.shape[0], n * p))])
    M = np.hstack([pre.Y_past, np.eye(n * p)])
    w = linalg.constrained_ridge_lstsq(M, np.asarray(y_meas, dtype=float).ravel(),
                                       E, rhs_u, lam=lam)
    return w[:cols], w[cols:].reshape(n, p)


def estimate_noise(state: ControllerState, y_meas: np.ndarray,
                   pre: Precomputed) -> np.ndarray:
    """Noise estimate for the latest measurement: measured minus predicted.

    Subtracting this estimate from the measurement reproduces the
    controller's own one-step output prediction, which is what keeps the
    stored history a valid trajectory.
    """
    if state.coeff_prev is None:
        raise FeasibilityError(
            "no previous coefficients: the initialization path must supply "
            "the first noise estimates"
        )
    y_meas = np.asarray(y_meas, dtype=float)
    return y_meas - pre.Y_next @ state.coeff_prev


def alpha_rhs(state: ControllerState, pre: Precomputed) -> np.ndarray:
    """Right-hand side of the prediction-coefficient system."""
    n, m = pre.n, pre.m
    u_s_prev = state.z_s_prev[:m]
    return np.concatenate([
        state.u_hist.ravel(),
        state.u_pred.ravel()[m:],          # shifted plan, first input dropped
        np.tile(u_s_prev, n + 1),
        state.y_den_hist.ravel(),
    ])


def solve_alpha(state: ControllerState, pre: Precomputed) -> np.ndarray:
    """Minimum-norm coefficients encoding initialization plus planned inputs.

    Any feasible coefficient vector yields the same predicted outputs, so
    the pseudoinverse solution is chosen for numerical stability. A
    residual above tolerance means the state no longer encodes a valid
    trajectory (corrupted state or violated excitation assumptions).
    """
    rhs = alpha_rhs(state, pre)
    alpha = pre.H_alpha_pinv @ rhs
    res = np.linalg.norm(pre.hankels.H_alpha @ alpha - rhs)
    if res > FEAS_RTOL * (1.0 + np.linalg.norm(rhs)):
        raise FeasibilityError(
            f"prediction coefficients infeasible (residual {res:.3e}); "
            "controller state is corrupted or the data assumptions fail"
        )
    return alpha


def predict_and_descend(state: ControllerState, alpha: np.ndarray,
                        pre: Precomputed, prev_cost: CostFunction | None,
                        t_prev: int, proj: SteadyStateProjector,
                        gamma: float):
    """Mu-step prediction followed by one projected gradient step.

    Returns ``(z_hat, z_s)``: the predicted input-output pair and the new
    steady-state estimate. With no revealed cost yet (first step), the
    gradient term is zero and the step reduces to projecting the
    prediction onto the steady-state set.
    """
    m = proj.m
    z_hat = np.concatenate([state.z_s_prev[:m], pre.Y_ahead @ alpha])
    if prev_cost is None:
        grad = np.zeros_like(z_hat)
    else:
        grad = prev_cost.grad(t_prev, z_hat)
    z_s = proj.P @ (z_hat - gamma * grad)
    return z_hat, z_s


def solve_beta(alpha: np.ndarray, z_s: np.ndarray, pre: Precomputed) -> tuple:
    """Minimum-seminorm steering correction reaching the new target.

    The correction keeps the initialization untouched (zero blocks), moves
    the terminal input window to the new steady-state input held for n+1
    steps, and pins the last n predicted outputs to the new steady-state
    output. Returns ``(beta, g)`` where g is the assembled target mismatch.
    """
    n, m, p = pre.n, pre.m, pre.p
    u_s, y_s = z_s[:m], z_s[m:]
    g = np.concatenate([
        np.zeros(m * n),
        np.tile(u_s, n + 1) - pre.U_tail @ alpha,
        np.zeros(p * n),
        np.tile(y_s, n) - pre.Y_tail @ alpha,
    ])
    beta = pre.Q_tilde @ g
    res = np.linalg.norm(pre.hankels.H_beta @ beta - g)
    if res > FEAS_RTOL * (1.0 + np.linalg.norm(g)):
        raise FeasibilityError(
            f"steering correction infeasible (residual {res:.3e}); "
            "the prediction horizon may be shorter than the controllability "
            "index, or the data is corrupted"
        )
    return beta, g


def advance(state: ControllerState, alpha: np.ndarray, beta: np.ndarray,
            z_s: np.ndarray, pre: Precomputed) -> tuple:
    """Commit the step: emit the input and shift the controller memory."""
    m, mu = pre.m, pre.mu
    coeff = alpha + beta
    u_plan = (pre.U_plan @ coeff).reshape(mu + 1, m)
    u_t = u_plan[0].copy()
    new_state = replace(
        state,
        u_hist=np.vstack([state.u_hist[1:], u_t[None, :]]),
        u_pred=u_plan,
        z_s_prev=z_s.copy(),
        coeff_prev=coeff,
        pending_alpha=None,
    )
    return u_t, new_state


@dataclass
class StepDiagnostics:
    """Per-step record kept by the Controller wrapper."""

    t: int
    u: np.ndarray
    z_hat: np.ndarray
    z_s: np.ndarray
    y_meas: np.ndarray | None     # measurement consumed this step (None at t=0)
    e_hat: np.ndarray | None      # estimate consumed this step (None at t=0)
    g_norm: float
    alpha_residual: float
    beta_residual: float
    identity_violation: float | None = None
    membership: float | None = None


def _step_identities(hankels: HankelSet, alpha: np.ndarray,
                     coeff_prev: np.ndarray, coeff_new: np.ndarray,
                     z_s: np.ndarray) -> float:
    """Max violation of the four cross-step consistency identities.

    Consecutive coefficient vectors must agree on the shifted
    initialization window, on the shifted input plan, on the overlapping
    output predictions, and the committed coefficients must hold the
    terminal window at the new equilibrium. All four are exact identities
    of the algorithm's own linear algebra.
    """
    U, Y, n, mu = hankels.U, hankels.Y, hankels.n, hankels.mu
    m = hankels.m
    same_init = max(
        np.abs(block_rows(U, 1, n) @ alpha
               - block_rows(U, 2, n + 1) @ coeff_prev).max(initial=0.0),
        np.abs(block_rows(Y, 1, n) @ alpha
               - block_rows(Y, 2, n + 1) @ coeff_prev).max(initial=0.0),
    )
    same_input = np.abs(block_rows(U, n + 1, 2 * n + mu) @ alpha
                        - block_rows(U, n + 2, 2 * n + mu + 1) @ coeff_prev).max()
    pred_rec = np.abs(block_rows(Y, n + 1, 2 * n + mu) @ alpha
                      - block_rows(Y, n + 2, 2 * n + mu + 1) @ coeff_prev).max()
    terminal = np.abs(block_rows(Y, n + mu + 1, 2 * n + mu + 1) @ coeff_new
                      - np.tile(z_s[m:], n + 1)).max()
    return float(max(same_init, same_input, pred_rec, terminal))


class Controller:
    """Stateful wrapper running the per-step pipeline.

    One instance is a single-threaded state machine; create independent
    instances for parallel runs. Construction factors the offline data
    (the expensive part); ``start`` installs the initialization and
    ``step`` advances one time instant and returns the input to apply.

    Args:
        config: tuning knobs.
        data: offline record with noise-free outputs.
        projector: steady-state projector; built from ``data`` if omitted.
        Q: explicit seminorm weight, overriding ``config.q_mode``.
        cost_moduli: optional (alpha_z, l_z) pair; triggers the step-size
            warning when gamma is too large.
        check_identities: verify the cross-step identities and the
            trajectory validity of the stored history every step
            (diagnostic runs; roughly doubles the per-step cost).
    """

    def __init__(self, config: ControllerConfig, data: Trajectory, *,
                 projector: SteadyStateProjector | None = None,
                 Q: np.ndarray | None = None,
                 cost_moduli: tuple[float, float] | None = None,
                 check_identities: bool = False):
        from .behavioral import build_hankel_set
        from .steady_state import build_projector

        self.config = config
        self.data = data
        self.hankels = build_hankel_set(data, config.n, config.mu)
        q_matrix = Q if Q is not None else build_q(self.hankels, config.q_mode)
        self.pre = precompute(self.hankels, q_matrix)
        self.projector = projector if projector is not None \
            else build_projector(data, config.n)
        if cost_moduli is not None:
            check_step_size(config.gamma, *cost_moduli)
        self.check_identities = check_identities
        self.state: ControllerState | None = None
        self.t = 0
        self.diagnostics: list[StepDiagnostics] = []

    def start(self, first_measurements: np.ndarray,
              u_init: np.ndarray | None = None) -> None:
        """Install the initialization from the first n measurements."""
        self.state = initialize(self.config, self.pre, first_measurements,
                                u_init=u_init)
        self.t = 0
        self.diagnostics = []

    def noise_estimate(self, y_meas: np.ndarray) -> np.ndarray:
        """Estimate for the noise on a measurement not yet consumed.

        Pure: calling this does not advance the controller, and the next
        ``step`` with the same measurement recomputes the same value.
        """
        if self.state is None:
            raise RuntimeError("call start() before estimating noise")
        return estimate_noise(self.state, y_meas, self.pre)

    def step(self, y_meas: np.ndarray | None = None,
             prev_cost: CostFunction | None = None) -> np.ndarray:
        """Advance one time instant and return the input to apply.

        Args:
            y_meas: the measurement taken after the previous input was
                applied; must be None at the first step (the
                initialization already consumed the first n measurements)
                and present afterwards.
            prev_cost: the most recently revealed cost function; None at
                the first step, after which its gradient at the current
                prediction drives the steady-state update. The cost is
                always evaluated at the previous time index, never the
                current one.
        """
        if self.state is None:
            raise RuntimeError("call start() before stepping")
        state = self.state
        e_hat_consumed = None
        if self.t == 0:
            if y_meas is not None:
                raise ValueError(
                    "the first step consumes no measurement; "
                    "initialization already absorbed the first n"
                )
        else:
            if y_meas is None:
                raise ValueError(f"step {self.t} requires the latest measurement")
            e_hat = estimate_noise(state, y_meas, self.pre)
            e_hat_consumed = e_hat
            denoised = np.asarray(y_meas, dtype=float) - e_hat
            state = replace(
                state,
                y_den_hist=np.vstack([state.y_den_hist[1:], denoised[None, :]]),
                e_hat_hist=state.e_hat_hist + [e_hat],
            )

        if state.pending_alpha is not None:
            alpha = state.pending_alpha
        else:
            alpha = solve_alpha(state, self.pre)
        z_hat, z_s = predict_and_descend(
            state, alpha, self.pre, prev_cost, self.t - 1,
            self.projector, self.config.gamma)
        beta, g = solve_beta(alpha, z_s, self.pre)
        coeff_prev = state.coeff_prev
        u_t, new_state = advance(state, alpha, beta, z_s, self.pre)

        diag = StepDiagnostics(
            t=self.t,
            u=u_t,
            z_hat=z_hat,
            z_s=z_s,
            y_meas=None if y_meas is None else np.asarray(y_meas, dtype=float),
            e_hat=e_hat_consumed,
            g_norm=float(np.linalg.norm(g)),
            alpha_residual=float(np.linalg.norm(
                self.hankels.H_alpha @ alpha - alpha_rhs(state, self.pre))),
            beta_residual=float(np.linalg.norm(
                self.hankels.H_beta @ beta - g)),
        )
        if self.check_identities:
            if coeff_prev is not None:
                diag.identity_violation = _step_identities(
                    self.hankels, alpha, coeff_prev, alpha + beta, z_s)
            hist = Trajectory(new_state.u_hist, new_state.y_den_hist)
            diag.membership = membership_residual(self.data, hist)
            if diag.membership > FEAS_RTOL * (1.0 + float(np.linalg.norm(hist.stacked()))):
                raise FeasibilityError(
                    f"stored history is no longer a valid trajectory "
                    f"(residual {diag.membership:.3e}) at step {self.t}"
                )
        self.diagnostics.append(diag)
        self.state = new_state
        self.t += 1
        return u_t

    def write_trace(self, path) -> None:
        """Optional per-step diagnostic CSV.

        Columns: step index, applied input, the measurement and noise
        estimate consumed at that step (empty at the first step), the
        steady-state estimate, the steering-target norm, and the two solve
        residuals.
        """
        import csv

        m = self.pre.m
        p = self.pre.p
        header = (["t"] + [f"u_{i + 1}" for i in range(m)]
                  + [f"ytilde_{i + 1}" for i in range(p)]
                  + [f"ehat_{i + 1}" for i in range(p)]
                  + [f"zs_{i + 1}" for i in range(m + p)]
                  + ["g_norm", "alpha_residual", "beta_residual"])

        def cells(values, width):
            if values is None:
                return [""] * width
            return [f"{v:.17g}" for v in values]

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for d in self.diagnostics:
                writer.writerow(
                    [d.t] + cells(d.u, m) + cells(d.y_meas, p)
                    + cells(d.e_hat, p) + cells(d.z_s, m + p)
                    + [f"{d.g_norm:.17g}", f"{d.alpha_residual:.17g}",
                       f"{d.beta_residual:.17g}"])
