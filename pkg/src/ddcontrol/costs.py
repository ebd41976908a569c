"""Time-varying cost functions over stacked input-output points z = (u, y).

Costs are revealed to the controller with a one-step delay, so every cost
object is indexed by time. All shipped families are smooth and strongly
convex with known moduli (alpha_z, l_z); quadratics additionally expose
their Hessian/linear terms so steady-state optimization can solve them in
closed form.
"""

import bisect
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


class CostFunction:
    """Base interface: value, gradient, and convexity moduli.

    Subclasses must set ``alpha_z`` (strong convexity) and ``l_z``
    (smoothness) with 0 < alpha_z <= l_z, and implement ``eval`` and
    ``grad``. ``quadratic_terms(t)`` may return (H, g, c) such that
    L_t(z) = 0.5 z'Hz + g'z + c, enabling exact reduced solves;
    the default returns None. ``params_key(t)`` identifies the cost
    parameters active at time t so downstream caches can detect reuse;
    the safe default treats every step as distinct.
    """

    alpha_z: float
    l_z: float

    def eval(self, t: int, z: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, t: int, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quadratic_terms(self, t: int):
        return None

    def params_key(self, t: int):
        return t

    def _check_moduli(self):
        if not (0.0 < self.alpha_z <= self.l_z):
            raise ValueError(
                f"need 0 < alpha_z <= l_z, got alpha_z={self.alpha_z}, l_z={self.l_z}"
            )


def eval_cost(cost: CostFunction, t: int, z: np.ndarray) -> float:
    """Value of a cost at time t and point z."""
    return cost.eval(t, np.asarray(z, dtype=float))


def grad_cost(cost: CostFunction, t: int, z: np.ndarray) -> np.ndarray:
    """Gradient of a cost at time t and point z."""
    return cost.grad(t, np.asarray(z, dtype=float))


@dataclass
class QuadraticTrackingCost(CostFunction):
    """Time-invariant quadratic 0.5 (z - target)' H (z - target).

    ``target`` need not be a steady state of any plant; when it is not,
    the cost is economic in the sense that its unconstrained minimizer is
    infeasible as an equilibrium.
    """

    H: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.target = np.asarray(self.target, dtype=float)
        if self.H.shape[0] != self.H.shape[1] or self.H.shape[0] != self.target.size:
            raise ValueError("H must be square and match the target dimension")
        if np.linalg.norm(self.H - self.H.T) > 1e-12 * (1 + np.linalg.norm(self.H)):
            raise ValueError("H must be symmetric")
        w = np.linalg.eigvalsh(self.H)
        self.alpha_z = float(w[0])
        self.l_z = float(w[-1])
        self._check_moduli()

    def eval(self, t: int, z: np.ndarray) -> float:
        d = z - self.target
        return 0.5 * float(d @ self.H @ d)

    def grad(self, t: int, z: np.ndarray) -> np.ndarray:
        return self.H @ (z - self.target)

    def quadratic_terms(self, t: int):
        return self.H, -self.H @ self.target, 0.5 * float(self.target @ self.H @ self.target)

    def params_key(self, t: int):
        return "static"


@dataclass
class QuadraticSoftplusCost(CostFunction):
    """Quadratic plus a softplus term: smooth, strongly convex, not quadratic.

    L(z) = 0.5 (z - target)' H (z - target) + c * log(1 + exp(a'z)).
    Exercises the iterative steady-state solver; moduli follow from the
    Hessian bounds H <= H + c/4 * a a'.
    """

    H: np.ndarray
    target: np.ndarray
    a: np.ndarray
    c: float = 1.0

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.target = np.asarray(self.target, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if self.c < 0:
            raise ValueError("softplus weight must be nonnegative")
        w = np.linalg.eigvalsh(self.H)
        self.alpha_z = float(w[0])
        self.l_z = float(w[-1] + 0.25 * self.c * self.a @ self.a)
        self._check_moduli()

    def eval(self, t: int, z: np.ndarray) -> float:
        d = z - self.target
        return 0.5 * float(d @ self.H @ d) + self.c * float(np.logaddexp(0.0, self.a @ z))

    def grad(self, t: int, z: np.ndarray) -> np.ndarray:
        s = expit(self.a @ z)
        return self.H @ (z - self.target) + self.c * s * self.a

    def params_key(self, t: int):
        return "static"


@dataclass(frozen=True)
class CostSegment:
    """Per-segment parameters of a scheduled quadratic cost."""

    start: int
    output_weight: np.ndarray     # (p, p) positive semidefinite
    input_weight: float           # scalar multiplying the per-step price
    setpoint: np.ndarray          # (p,)


@dataclass
class QuadraticScheduledCost(CostFunction):
    """Piecewise-scheduled quadratic cost with a per-step price series.

    At time t the active segment contributes
    ``0.5 (y - setpoint)' W (y - setpoint) + 0.5 * input_weight * price_t * |u|^2``.
    Segment switches are driven by ``segments`` (breakpoints strictly
    increasing, first at 0); the price multiplies only the input term.
    """

    m: int
    segments: list[CostSegment] = field(default_factory=list)
    price_series: np.ndarray = None

    def __post_init__(self):
        if not self.segments:
            raise ValueError("at least one segment required")
        starts = [s.start for s in self.segments]
        if starts[0] != 0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment breakpoints must start at 0 and strictly increase")
        self.price_series = np.asarray(self.price_series, dtype=float)
        if self.price_series.ndim != 1 or self.price_series.size == 0:
            raise ValueError("price series must be a nonempty vector")
        if np.any(self.price_series <= 0):
            raise ValueError("prices must be positive")
        self._starts = starts
        p = self.segments[0].setpoint.size
        self.p = p
        lo, hi = np.inf, 0.0
        for seg in self.segments:
            if seg.output_weight.shape != (p, p) or seg.setpoint.size != p:
                raise ValueError("segment dimensions disagree")
            if seg.input_weight <= 0:
                raise ValueError("input weight must be positive")
            w = np.linalg.eigvalsh(seg.output_weight)
            if w[0] < -1e-12:
                raise ValueError("output weight must be positive semidefinite")
            in_w = seg.input_weight * self.price_series
            lo = min(lo, float(w[0]), float(in_w.min()))
            hi = max(hi, float(w[-1]), float(in_w.max()))
        self.alpha_z = lo
        self.l_z = hi
        self._check_moduli()

    @property
    def horizon(self) -> int:
        return self.price_series.size

    def _segment(self, t: int) -> CostSegment:
        if t < 0 or t >= self.horizon:
            raise IndexError(f"time index {t} beyond configured horizon {self.horizon}")
        return self.segments[bisect.bisect_right(self._starts, t) - 1]

    def params_at(self, t: int) -> tuple[np.ndarray, float, np.ndarray]:
        """(output weight, effective input weight, setpoint) active at t."""
        seg = self._segment(t)
        return seg.output_weight, seg.input_weight * float(self.price_series[t]), seg.setpoint

    def eval(self, t: int, z: np.ndarray) -> float:
        W, iw, sp = self.params_at(t)
        u, y = z[:self.m], z[self.m:]
        d = y - sp
        return 0.5 * float(d @ W @ d) + 0.5 * iw * float(u @ u)

    def grad(self, t: int, z: np.ndarray) -> np.ndarray:
        W, iw, sp = self.params_at(t)
        u, y = z[:self.m], z[self.m:]
        return np.concatenate([iw * u, W @ (y - sp)])

    def quadratic_terms(self, t: int):
        W, iw, sp = self.params_at(t)
        H = np.zeros((self.m + self.p, self.m + self.p))
        H[:self.m, :self.m] = iw * np.eye(self.m)
        H[self.m:, self.m:] = W
        g = np.concatenate([np.zeros(self.m), -W @ sp])
        return H, g, 0.5 * float(sp @ W @ sp)

    def params_key(self, t: int):
        seg = self._segment(t)
        return (seg.start, float(self.price_series[t]))


def piecewise_linear_profile(knots: list[tuple[float, float]], steps: int,
                             steps_per_hour: float, normalize_mean: bool = True) -> np.ndarray:
    """Sample a piecewise-linear (hour, value) profile on a step grid.

    Values are linearly interpolated between knots and optionally
    normalized so the sampled series has mean exactly 1.
    """
    hours = np.arange(steps) / steps_per_hour
    xs = np.array([k[0] for k in knots], dtype=float)
    ys = np.array([k[1] for k in knots], dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise ValueError("profile knots must have strictly increasing hours")
    vals = np.interp(hours, xs, ys)
    if normalize_mean:
        vals = vals / vals.mean()
    return vals


#: default day-ahead price shape (hour, relative price): a morning and an
#: evening peak, normalized to mean 1 when sampled. Shipped example values,
#: not measurements; the peaks are kept moderate so the benchmark step size
#: of 0.15 stays within 2/(alpha_z + l_z) for the default weights.
DEFAULT_PRICE_KNOTS = [
    (0.0, 0.82), (5.0, 0.74), (7.0, 1.05), (9.0, 1.22), (12.0, 1.00),
    (15.0, 0.96), (18.0, 1.26), (21.0, 0.96), (24.0, 0.82),
]


def hvac_cost_schedule(
    p: int = 3,
    m: int = 5,
    day_steps: int = 1440,
    comfort_weight: float = 1.0,
    night_weight: float = 0.1,
    night_end_hour: float = 6.0,
    setpoint_low: float = 18.0,
    setpoint_high: float = 21.0,
    switch_hour: float = 9.0,
    outdoor_temp: float = 15.0,
    input_weight: float = 10.0,
    price_knots: list[tuple[float, float]] | None = None,
) -> QuadraticScheduledCost:
    """Daily thermal-comfort schedule over one simulated day.

    The output weight is ``comfort_weight * I`` except during the night
    interval [0, night_end_hour) where it drops to ``night_weight * I`` to
    save energy; the temperature setpoint switches from ``setpoint_low`` to
    ``setpoint_high`` at ``switch_hour``. Setpoints are stored relative to
    the outdoor temperature because the plant state is the indoor-outdoor
    difference. The per-step energy price follows a piecewise-linear
    profile normalized to mean 1.
    """
    steps_per_hour = day_steps / 24.0
    if day_steps < 1:
        raise ValueError("day must contain at least one step")
    price = piecewise_linear_profile(price_knots or DEFAULT_PRICE_KNOTS,
                                     day_steps, steps_per_hour)
    night_end = int(round(night_end_hour * steps_per_hour))
    switch = int(round(switch_hour * steps_per_hour))
    if not (0 < night_end <= switch < day_steps):
        raise ValueError("schedule breakpoints out of order for this day length")
    low = (setpoint_low - outdoor_temp) * np.ones(p)
    high = (setpoint_high - outdoor_temp) * np.ones(p)
    segments = [
        CostSegment(0, night_weight * np.eye(p), input_weight, low),
        CostSegment(night_end, comfort_weight * np.eye(p), input_weight, low),
        CostSegment(switch, comfort_weight * np.eye(p), input_weight, high),
    ]
    return QuadraticScheduledCost(m=m, segments=segments, price_series=price)
