"""Built-in comparison experiments and the machinery to run one
(method, scenario) cell and report its metrics.

Three scenarios are built in, all on the three-dimensional integrator plant
from initial state [1, 3, 2]:

* ``exp1`` - controllers against a constant disturbance,
* ``exp2`` - controllers against a mixed-sinusoid disturbance,
* ``exp3`` - observers reconstructing a larger mixed-sinusoid disturbance.

Each smooth method (m=3) pairs with a super-twisting baseline that uses the
same gains with m=2.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .certificate import build_certificate, build_p_block
from .laws import GainConfig, check_gain_condition
from .metrics import (
    CONTROL,
    ERROR_NORM,
    ESTIMATE,
    STATE_NORM,
    ExperimentReport,
    chattering_index,
    settling_time,
    ultimate_bound,
)
from .sim import (
    ControllerLaw,
    DisturbanceSpec,
    SimConfig,
    Trajectory,
    simulate_closed_loop,
    simulate_observer,
    write_trajectory_csv,
)

X1_INIT = (1.0, 3.0, 2.0)

DEFAULT_GAINS = {"k1": 2.0, "k2": 2.5, "k3": 4.0, "k4": 30.0, "kappa": 10.0}

METHODS = {
    "amssosmc": {"kind": "controller", "m": 3.0},
    "amstsmc-baseline": {"kind": "controller", "m": 2.0},
    "amsdo": {"kind": "observer", "m": 3.0},
    "amdo-baseline": {"kind": "observer", "m": 2.0},
}

EXPERIMENTS = {"exp1": "controller", "exp2": "controller", "exp3": "observer"}

# Observer error threshold is absolute; the controller threshold is relative
# to the initial state norm.
CONTROLLER_SETTLE_REL = 0.01
OBSERVER_SETTLE_ABS = 0.05
TAIL_FRACTION = 0.2


def experiment_disturbance(experiment: str) -> DisturbanceSpec:
    if experiment == "exp1":
        return DisturbanceSpec.constant([0.1, 0.2, 0.2])
    if experiment == "exp2":
        return DisturbanceSpec.sinusoid_mix([
            (0.1, 1.0, False), (0.2, 4.0, True), (0.2, 2.0, True),
        ])
    if experiment == "exp3":
        return DisturbanceSpec.sinusoid_mix([
            (1.0, 1.0, False), (2.0, 4.0, True), (2.0, 2.0, True),
        ])
    raise ValueError(f"unknown experiment {experiment!r}")


def build_gain_config(m: float, **overrides) -> GainConfig:
    """Default gain set with the given homogeneity degree, plus overrides.

    Uncertified combinations are allowed here and flagged in reports instead
    of being rejected, so parameter sweeps can cross the feasibility boundary.
    """
    params = dict(DEFAULT_GAINS)
    params.update({k: v for k, v in overrides.items() if v is not None})
    params.setdefault("allow_uncertified", True)
    return GainConfig(m=m, **params)


def build_sim_config(**overrides) -> SimConfig:
    params = {"x1_init": X1_INIT}
    params.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**params)


def validate_pairing(experiment: str, method: str) -> None:
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    need = EXPERIMENTS[experiment]
    got = METHODS[method]["kind"]
    if need != got:
        raise ValueError(
            f"{experiment} pairs with {need} methods; {method!r} is a {got}"
        )


def _certificate_summary(cfg: GainConfig) -> dict:
    if cfg.m > 2:
        return build_certificate(cfg).to_dict()
    chk = check_gain_condition(cfg)
    return {"gain_condition": {"holds": chk.holds, "reason": chk.reason,
                               "lhs": chk.lhs, "rhs": chk.rhs}}


def _resolved_config(experiment: str, method: str, cfg: GainConfig,
                     sim: SimConfig, dist: DisturbanceSpec) -> dict:
    return {
        "experiment": experiment,
        "method": method,
        "gains": dataclasses.asdict(cfg),
        "sim": sim.to_dict(),
        "disturbance": dist.to_dict(),
    }


def run_cell(experiment: str, method: str, gain_overrides: dict | None = None,
             sim_overrides: dict | None = None) -> tuple[Trajectory, ExperimentReport]:
    """Run one preset (experiment, method) cell and compute its report.

    ``gain_overrides`` may carry an ``m`` key to override the method's preset
    homogeneity degree (used by sweeps).
    """
    validate_pairing(experiment, method)
    overrides = dict(gain_overrides or {})
    m = overrides.pop("m", None)
    cfg = build_gain_config(METHODS[method]["m"] if m is None else m, **overrides)
    sim = build_sim_config(**(sim_overrides or {}))
    dist = experiment_disturbance(experiment)
    return run_configured_cell(experiment, method, cfg, sim, dist)


def run_configured_cell(scenario_id: str, method: str, cfg: GainConfig,
                        sim: SimConfig, dist: DisturbanceSpec
                        ) -> tuple[Trajectory, ExperimentReport]:
    """Run a fully specified cell (also used for custom scenarios)."""
    entry = METHODS[method]

    if entry["kind"] == "controller":
        p_block = build_p_block(cfg) if cfg.m > 2 else None
        traj = simulate_closed_loop(ControllerLaw(cfg), sim, dist, lyapunov_P=p_block)
        threshold = CONTROLLER_SETTLE_REL * float(
            (sim.x1_init @ sim.x1_init) ** 0.5
        )
        settle = settling_time(traj, STATE_NORM, threshold)
        bound = ultimate_bound(traj, STATE_NORM, TAIL_FRACTION)
        chat = chattering_index(traj, CONTROL, TAIL_FRACTION)
    else:
        traj = simulate_observer(cfg, sim, dist)
        threshold = OBSERVER_SETTLE_ABS
        settle = settling_time(traj, ERROR_NORM, threshold)
        bound = ultimate_bound(traj, ERROR_NORM, TAIL_FRACTION)
        chat = chattering_index(traj, ESTIMATE, TAIL_FRACTION)

    report = ExperimentReport(
        method_id=method,
        scenario_id=scenario_id,
        settling_time=settle,
        ultimate_bound=bound,
        chattering_index=chat,
        final_L0=float(traj.L0[-1]) if traj.L0 is not None else None,
        dt_used=sim.dt,
        settling_threshold=threshold,
        tail_fraction=TAIL_FRACTION,
        certificate_summary=_certificate_summary(cfg),
        config=_resolved_config(scenario_id, method, cfg, sim, dist),
    )
    return traj, report


def write_cell_outputs(outdir, experiment: str, method: str,
                       traj: Trajectory, report: ExperimentReport) -> dict:
    """Write ``<outdir>/<experiment>_<method>/{trajectory.csv,report.json}``."""
    cell_dir = Path(outdir) / f"{experiment}_{method}"
    cell_dir.mkdir(parents=True, exist_ok=True)
    traj_path = cell_dir / "trajectory.csv"
    report_path = cell_dir / "report.json"
    write_trajectory_csv(traj, traj_path)
    report_path.write_text(report.to_json() + "\n")
    return {"trajectory": str(traj_path), "report": str(report_path)}
