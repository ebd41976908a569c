"""Experiment runner: JSON configs, closed-loop orchestration, CSV output.

The runner owns the information pattern: at every step the controller
commits its input before the plant is stepped, the measurement is taken,
and only then is the current cost made available (it reaches the
controller one step later as ``prev_cost``). Traces and per-run summaries
are written as CSV with 17 significant digits so runs replay bit-exactly.
"""

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .controller import Controller, ControllerConfig
from .costs import (CostFunction, CostSegment, QuadraticScheduledCost,
                    QuadraticTrackingCost, hvac_cost_schedule)
from .metrics import RunRecord
from .plant import (NoiseModel, PlantModel, ThermalZoneParams, build_hvac,
                    collect_offline_data, step)
from .steady_state import optimal_steady_state


class ConfigError(ValueError):
    """Configuration file or override is missing, unparsable, or invalid."""


# --------------------------------------------------------------------------
# configuration model
# --------------------------------------------------------------------------

@dataclass
class PlantSpec:
    """Either explicit state-space matrices or thermal-model parameters."""

    type: str = "hvac"                      # "hvac" | "matrices"
    A: list | None = None
    B: list | None = None
    C: list | None = None
    D: list | None = None
    hvac: dict | None = None                # overrides for ThermalZoneParams
    initial_state: list | None = None

    def build(self) -> tuple[PlantModel, np.ndarray]:
        if self.type == "matrices":
            if self.A is None or self.B is None or self.C is None:
                raise ConfigError("matrices plant needs A, B, and C")
            model = PlantModel(self.A, self.B, self.C, self.D)
        elif self.type == "hvac":
            params = ThermalZoneParams()
            overrides = dict(self.hvac or {})
            if "capacitance" in overrides:
                params.capacitance = np.asarray(overrides.pop("capacitance"), dtype=float)
            if "r_outdoor" in overrides:
                params.r_outdoor = [None if r is None else float(r)
                                    for r in overrides.pop("r_outdoor")]
            if "r_between" in overrides:
                params.r_between = {(int(i), int(j)): float(r)
                                    for i, j, r in overrides.pop("r_between")}
            if "sample_time" in overrides:
                params.sample_time = float(overrides.pop("sample_time"))
            if "sensor_zones" in overrides:
                params.sensor_zones = tuple(int(z) for z in overrides.pop("sensor_zones"))
            if overrides:
                raise ConfigError(f"unknown hvac parameters: {sorted(overrides)}")
            model = build_hvac(params)
        else:
            raise ConfigError(f"unknown plant type {self.type!r}")
        x0 = np.zeros(model.n) if self.initial_state is None \
            else np.asarray(self.initial_state, dtype=float)
        if x0.shape != (model.n,):
            raise ConfigError(f"initial_state must have {model.n} entries")
        return model, x0


@dataclass
class NoiseSpec:
    seed: int = 0
    measurement: dict | None = None         # {"low": .., "high": ..}
    process: dict | None = None             # plus "through_input_matrix": bool
    failing_sensor: dict | None = None      # {"channel", "start", "end", "scale"}

    def bounds(self, which: dict | None) -> tuple[float, float] | None:
        if which is None:
            return None
        return float(which["low"]), float(which["high"])


@dataclass
class ControllerSpec:
    gamma: float = 0.1
    mu: int = 2
    n: int = 1
    q_mode: str = "identity+future_inputs"
    init_mode: str = "zero"
    lambda_init: float = 0.0

    def build(self) -> ControllerConfig:
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        try:
            return ControllerConfig(gamma=self.gamma, mu=self.mu, n=self.n,
                                    q_mode=self.q_mode, init_mode=self.init_mode,
                                    lambda_init=self.lambda_init)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class CostSpec:
    type: str = "hvac_schedule"             # "hvac_schedule" | "quadratic" | "schedule"
    params: dict = field(default_factory=dict)

    def build(self, m: int, p: int) -> CostFunction:
        try:
            if self.type == "hvac_schedule":
                return hvac_cost_schedule(p=p, m=m, **self.params)
            if self.type == "quadratic":
                return QuadraticTrackingCost(
                    H=np.asarray(self.params["H"], dtype=float),
                    target=np.asarray(self.params["target"], dtype=float))
            if self.type == "schedule":
                segments = [
                    CostSegment(start=int(s["start"]),
                                output_weight=np.asarray(s["output_weight"], dtype=float),
                                input_weight=float(s["input_weight"]),
                                setpoint=np.asarray(s["setpoint"], dtype=float))
                    for s in self.params["segments"]
                ]
                return QuadraticScheduledCost(
                    m=m, segments=segments,
                    price_series=np.asarray(self.params["price_series"], dtype=float))
        except ConfigError:
            raise
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid cost spec: {exc}") from exc
        raise ConfigError(f"unknown cost type {self.type!r}")


@dataclass
class OfflineSpec:
    N: int = 100
    input_low: float = -1.0
    input_high: float = 1.0
    seed: int = 12345


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one closed-loop experiment."""

    plant: PlantSpec = field(default_factory=PlantSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    cost: CostSpec = field(default_factory=CostSpec)
    offline: OfflineSpec = field(default_factory=OfflineSpec)
    horizon: int = 100
    output_dir: str | None = None

    def validate(self) -> None:
        if self.horizon < 0:
            raise ConfigError("horizon must be at least 0")
        self.controller.build()
        if self.offline.input_low > self.offline.input_high:
            raise ConfigError("offline input box is reversed")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            return cls(
                plant=PlantSpec(**d.get("plant", {})),
                noise=NoiseSpec(**d.get("noise", {})),
                controller=ControllerSpec(**d.get("controller", {})),
                cost=CostSpec(**d.get("cost", {})),
                offline=OfflineSpec(**d.get("offline", {})),
                horizon=int(d.get("horizon", 100)),
                output_dir=d.get("output_dir"),
            )
        except TypeError as exc:
            raise ConfigError(f"invalid config structure: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        cfg = cls.from_dict(data)
        cfg.validate()
        return cfg

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def shipped_config_path(name: str = "hvac_day") -> Path:
    """Path of a configuration file shipped inside the package."""
    from importlib.resources import files

    return Path(str(files("ddcontrol").joinpath(f"configs/{name}.json")))


# --------------------------------------------------------------------------
# closed-loop runner
# --------------------------------------------------------------------------

def run_experiment(config: ExperimentConfig, *, seed: int | None = None,
                   out_dir=None, mu: int | None = None,
                   gamma: float | None = None,
                   cost: CostFunction | None = None,
                   controller_factory=None,
                   check_identities: bool = False):
    """Execute one closed-loop experiment.

    Per step the runner (1) asks the controller for an input without
    revealing the current cost, (2) steps the plant and takes the
    measurement, (3) reveals the cost for use at the next step. Flag-style
    overrides (seed, mu, gamma) take precedence over the file values.

    ``cost`` replaces the configured cost object (used by tests that wrap
    the cost with an access recorder); ``controller_factory`` is the
    extension point for alternative controllers and receives
    ``(controller_config, data, cost_moduli)``; it must return an object
    with ``start``, ``step``, ``noise_estimate``, and ``diagnostics``.

    Returns ``(record, summary)``.
    """
    config.validate()
    run_seed = config.noise.seed if seed is None else int(seed)
    ctrl_spec = config.controller
    cc = ControllerConfig(
        gamma=ctrl_spec.gamma if gamma is None else float(gamma),
        mu=ctrl_spec.mu if mu is None else int(mu),
        n=ctrl_spec.n,
        q_mode=ctrl_spec.q_mode,
        init_mode=ctrl_spec.init_mode,
        lambda_init=ctrl_spec.lambda_init,
    )
    model, x0 = config.plant.build()
    T = config.horizon

    data = collect_offline_data(
        model, config.offline.N, pe_order=3 * cc.n + cc.mu + 1,
        input_box=(config.offline.input_low, config.offline.input_high),
        seed=config.offline.seed)

    cost = cost if cost is not None else config.cost.build(model.m, model.p)
    moduli = (cost.alpha_z, cost.l_z)
    if controller_factory is None:
        controller = Controller(cc, data, cost_moduli=moduli,
                                check_identities=check_identities)
    else:
        controller = controller_factory(cc, data, moduli)
    projector = controller.projector

    noise = NoiseModel(seed=run_seed,
                       measurement=config.noise.bounds(config.noise.measurement),
                       process=config.noise.bounds(config.noise.process))
    through_b = bool((config.noise.process or {}).get("through_input_matrix", False))
    fail = config.noise.failing_sensor

    def draw_noise(t: int) -> tuple[np.ndarray, np.ndarray]:
        e = noise.draw_measurement(model.p)
        if fail is not None and fail["start"] <= t < fail["end"]:
            e[int(fail["channel"]) - 1] *= float(fail["scale"])
        q = noise.draw_process(model.m if through_b else model.n)
        if through_b:
            q = model.B @ q
        return e, q

    # warmup: the plant runs uncontrolled (zero input) for the first n
    # steps while the controller only listens
    x = x0.copy()
    first_meas = np.empty((cc.n, model.p))
    for k in range(cc.n):
        e, q = draw_noise(k - cc.n)
        x, _, first_meas[k] = step(model, x, np.zeros(model.m), e, q)
    controller.start(first_meas)

    u_log = np.empty((T + 1, model.m))
    y_log = np.empty((T + 1, model.p))
    ymeas_log = np.empty((T + 1, model.p))
    ehat_log = np.empty((T + 1, model.p))
    etrue_log = np.empty((T + 1, model.p))
    zs_log = np.empty((T + 1, model.m + model.p))
    zeta_log = np.empty((T + 1, model.m + model.p))
    cost_log = np.empty(T + 1)
    opt_log = np.empty(T + 1)
    z_s_init = np.zeros(model.m + model.p)

    zeta_cache_key = object()
    zeta = None
    y_meas_prev = None
    revealed = None                      # cost revealed so far (one-step delay)
    for t in range(T + 1):
        u_t = controller.step(y_meas=y_meas_prev, prev_cost=revealed)
        e, q = draw_noise(t)
        x, y_t, y_meas = step(model, x, u_t, e, q)
        # the cost at time t becomes visible only now
        revealed = cost
        key = cost.params_key(t)
        if key != zeta_cache_key:
            zeta = optimal_steady_state(projector, cost, t)
            zeta_cache_key = key
        u_log[t], y_log[t] = u_t, y_t
        ymeas_log[t], etrue_log[t] = y_meas, e
        ehat_log[t] = controller.noise_estimate(y_meas)
        zs_log[t] = controller.diagnostics[-1].z_s
        zeta_log[t] = zeta
        cost_log[t] = cost.eval(t, np.concatenate([u_t, y_t]))
        opt_log[t] = cost.eval(t, zeta)
        y_meas_prev = y_meas

    record = RunRecord(u=u_log, y=y_log, y_meas=ymeas_log, e_hat=ehat_log,
                       z_s=zs_log, zeta=zeta_log, cost=cost_log,
                       opt_cost=opt_log, z_s_init=z_s_init, e_true=etrue_log)
    diags = getattr(controller, "diagnostics", [])
    if check_identities and diags:
        violations = [d.identity_violation for d in diags
                      if d.identity_violation is not None]
        record.extras["max_identity_violation"] = max(violations, default=0.0)
        record.extras["max_membership_residual"] = max(
            d.membership for d in diags if d.membership is not None)
    summary = metrics.summarize(record, seed=run_seed, gamma=cc.gamma, mu=cc.mu)
    summary["accumulated_cost"] = float(cost_log.sum())

    target_dir = out_dir if out_dir is not None else config.output_dir
    if target_dir is not None:
        target_dir = Path(target_dir)
        target_dir.mkdir(parents=True, exist_ok=True)
        write_trace_csv(target_dir / "trace.csv", record)
        metrics.write_summary_csv(target_dir / "summary.csv", [summary])
    return record, summary


def write_trace_csv(path, record: RunRecord) -> None:
    """Per-step trace with a fixed column schema and 17-digit floats."""
    m = record.u.shape[1]
    p = record.y.shape[1]
    header = (["t"]
              + [f"u_{i + 1}" for i in range(m)]
              + [f"y_{i + 1}" for i in range(p)]
              + [f"ytilde_{i + 1}" for i in range(p)]
              + [f"ehat_{i + 1}" for i in range(p)]
              + [f"us_{i + 1}" for i in range(m)]
              + [f"ys_{i + 1}" for i in range(p)]
              + ["cost", "opt_cost"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(len(record.u)):
            row = ([str(t)]
                   + [f"{v:.17g}" for v in record.u[t]]
                   + [f"{v:.17g}" for v in record.y[t]]
                   + [f"{v:.17g}" for v in record.y_meas[t]]
                   + [f"{v:.17g}" for v in record.e_hat[t]]
                   + [f"{v:.17g}" for v in record.z_s[t][:m]]
                   + [f"{v:.17g}" for v in record.z_s[t][m:]]
                   + [f"{record.cost[t]:.17g}", f"{record.opt_cost[t]:.17g}"])
            writer.writerow(row)


# --------------------------------------------------------------------------
# command-line interface
# --------------------------------------------------------------------------

def demo_siso_config() -> ExperimentConfig:
    """Tiny built-in single-input single-output example."""
    return ExperimentConfig(
        plant=PlantSpec(type="matrices", A=[[0.5]], B=[[1.0]], C=[[1.0]],
                        D=[[0.0]], initial_state=[1.0]),
        noise=NoiseSpec(seed=7, measurement={"low": -0.05, "high": 0.05}),
        controller=ControllerSpec(gamma=0.15, mu=2, n=1, q_mode="identity"),
        cost=CostSpec(type="schedule", params={
            "segments": [
                {"start": 0, "output_weight": [[1.0]], "input_weight": 10.0,
                 "setpoint": [1.0]},
                {"start": 150, "output_weight": [[1.0]], "input_weight": 10.0,
                 "setpoint": [2.0]},
            ],
            "price_series": [1.0] * 301,
        }),
        offline=OfflineSpec(N=60, seed=3),
        horizon=300,
    )


def cli_main(argv: list[str] | None = None) -> int:
    """Entry point; returns a process exit code instead of raising SystemExit.

    Exit codes: 0 success, 2 missing/invalid configuration or flags,
    1 runtime failure.
    """
    parser = argparse.ArgumentParser(
        prog="ddcontrol",
        description="Closed-loop experiments with the data-driven online controller")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment from a JSON config")
    run_p.add_argument("--config", required=True, help="path to the JSON config")
    run_p.add_argument("--seed", type=int, default=None, help="override the noise seed")
    run_p.add_argument("--out", default=None, help="directory for trace/summary CSVs")
    run_p.add_argument("--mu", type=int, default=None, help="override the prediction horizon")
    run_p.add_argument("--gamma", type=float, default=None, help="override the step size")

    val_p = sub.add_parser("validate", help="check a JSON config without running")
    val_p.add_argument("--config", required=True)

    demo_p = sub.add_parser("demo-siso", help="run the built-in scalar example")
    demo_p.add_argument("--out", default="demo_siso_out",
                        help="directory for trace/summary CSVs")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        if args.command == "validate":
            ExperimentConfig.from_json(args.config)
            print(f"config ok: {args.config}")
            return 0
        if args.command == "run":
            config = ExperimentConfig.from_json(args.config)
            if args.gamma is not None and args.gamma <= 0:
                raise ConfigError("gamma must be positive")
            if args.mu is not None and args.mu < 1:
                raise ConfigError("mu must be at least 1")
            _, summary = run_experiment(config, seed=args.seed, out_dir=args.out,
                                        mu=args.mu, gamma=args.gamma)
            _print_summary(summary)
            return 0
        if args.command == "demo-siso":
            config = demo_siso_config()
            _, summary = run_experiment(config, out_dir=args.out)
            _print_summary(summary)
            print(f"trace written to {Path(args.out) / 'trace.csv'}")
            return 0
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _print_summary(summary: dict) -> None:
    for key in metrics.SUMMARY_COLUMNS + ["accumulated_cost"]:
        if key in summary:
            print(f"{key}: {summary[key]}")


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
