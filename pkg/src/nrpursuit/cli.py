"""Batch command-line front end: YAML configs in, CSV traces and summaries out.

Config schema (one file, ``scenarios`` is a list; sections mirror the library
configuration objects; omitted optional fields take the library defaults and
are echoed into the summary file):

.. code-block:: yaml

    scenarios:
      - name: chase
        mode: single_pursuer_adversarial   # or agnostic_tracking,
                                           # multi_pursuer_model_based,
                                           # multi_pursuer_learning
        duration: 120.0                    # s
        dt: 0.01                           # s
        seed: 0
        pursuers:
          - {speed: 2.0, u_max: 1.0, start: [0.0, 0.0], heading: 0.0}
        evader:                            # required outside agnostic mode
          {speed: 0.8, goal: [150.0, 60.0], start: [20.0, 0.0],
           evade_radius_scale: 3.0}
        controller:
          {alpha: 10.0, horizon: 1.0, jac_epsilon: 1.0e-4,
           prediction_substeps: 50}
        objective:
          {beta1: 1.0, beta2: 0.0, beta3: 0.0, gamma: 0.1, gamma_repel: 0.2}
        learning:                          # learning mode only
          {eta: 0.01, window: 5.0, sample_interval: 0.1,
           retrain_interval: 0.5, epochs_per_update: 50,
           hidden_sizes: [16, 16, 16]}
        reference:                         # agnostic mode only
          {start: [10.0, 0.0], heading: 1.5708, radii: [12.0, 12.0],
           turns: [1, -1], speed: 1.0}

Each scenario produces ``<name>_trace.csv`` (fixed column order: t, then per
pursuer x/y/heading/u, evader x/y, per-pursuer distances, pursuer separation,
objective, cost, evader heading, predicted heading, network loss) and
``<name>_summary.txt`` (flat ``key = value`` lines echoing the effective
configuration plus the summary metrics).

Exit codes: 0 on success, 1 on configuration errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .controller import ControllerConfig
from .dynamics import DubinsState, EvaderParams, PursuerParams
from .errors import ConfigError
from .game import ObjectiveWeights
from .learning import TrainingConfig
from .sim import (
    MODE_AGNOSTIC,
    MODE_LEARNING,
    MODES,
    ReferencePath,
    ScenarioConfig,
    SimTrace,
    SummaryMetrics,
    run_scenario,
)


@dataclass
class RunManifest:
    config_path: Path
    out_dir: Path
    seed: Optional[int] = None  # overrides every selected scenario's seed
    scenario: Optional[str] = None  # run only the scenario with this name
    emit_trace: bool = True
    emit_summary: bool = True
    parallel: int = 1


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------


def _line_map(text: str) -> dict:
    """Map dotted config paths to 1-based line numbers, for error messages."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: dict = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key_node, val_node in node.value:
                sub = f"{path}.{key_node.value}" if path else str(key_node.value)
                lines[sub] = key_node.start_mark.line + 1
                walk(val_node, sub)
        elif isinstance(node, yaml.SequenceNode):
            for i, val_node in enumerate(node.value):
                sub = f"{path}.{i}"
                lines[sub] = val_node.start_mark.line + 1
                walk(val_node, sub)

    if root is not None:
        walk(root, "")
    return lines


class _Section:
    """A mapping wrapper that reports missing/invalid fields with file lines."""

    def __init__(self, data: dict, path: str, lines: dict):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping{_at(lines, path)}")
        self.data = data
        self.path = path
        self.lines = lines

    def has(self, key: str) -> bool:
        return key in self.data

    def _fail(self, key: str, message: str):
        path = f"{self.path}.{key}" if self.path else key
        raise ConfigError(f"{path}: {message}{_at(self.lines, path, self.path)}")

    def number(self, key: str, default=None, minimum=None, positive=False):
        if key not in self.data:
            if default is None:
                self._fail(key, "required field is missing")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self._fail(key, f"expected a number, got {value!r}")
        value = float(value)
        if positive and not value > 0:
            self._fail(key, f"must be > 0, got {value}")
        if minimum is not None and value < minimum:
            self._fail(key, f"must be >= {minimum}, got {value}")
        return value

    def integer(self, key: str, default=None, minimum=None):
        if key not in self.data:
            if default is None:
                self._fail(key, "required field is missing")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self._fail(key, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self._fail(key, f"must be >= {minimum}, got {value}")
        return int(value)

    def string(self, key: str, default=None):
        if key not in self.data:
            if default is None:
                self._fail(key, "required field is missing")
            return default
        value = self.data[key]
        if not isinstance(value, str):
            self._fail(key, f"expected a string, got {value!r}")
        return value

    def point(self, key: str, default=None):
        if key not in self.data:
            if default is None:
                self._fail(key, "required field is missing")
            return np.asarray(default, dtype=float)
        value = self.data[key]
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
        ):
            self._fail(key, f"expected [x, y], got {value!r}")
        return np.asarray(value, dtype=float)

    def section(self, key: str) -> "_Section":
        return _Section(self.data.get(key, {}), f"{self.path}.{key}", self.lines)

    def sequence(self, key: str) -> list:
        if key not in self.data:
            self._fail(key, "required field is missing")
        value = self.data[key]
        if not isinstance(value, list) or not value:
            self._fail(key, "expected a non-empty list")
        return value


def _at(lines: dict, path: str, parent: str = "") -> str:
    line = lines.get(path) or (lines.get(parent) if parent else None)
    return f" (line {line})" if line else ""


def _build_scenario(doc, lines: dict, path: str, fallback_name: str) -> ScenarioConfig:
    sec = _Section(doc, path, lines)
    name = sec.string("name", fallback_name)
    mode = sec.string("mode")
    if mode not in MODES:
        sec._fail("mode", f"unknown mode {mode!r}; valid modes: {', '.join(MODES)}")
    duration = sec.number("duration", minimum=0.0)
    dt = sec.number("dt", default=0.01, positive=True)
    seed = sec.integer("seed", default=0, minimum=0)

    pursuers = []
    initial_pursuers = []
    for i, p_doc in enumerate(sec.sequence("pursuers")):
        p = _Section(p_doc, f"{path}.pursuers.{i}", lines)
        pursuers.append(
            PursuerParams(speed=p.number("speed", positive=True), u_max=p.number("u_max", positive=True))
        )
        initial_pursuers.append(
            DubinsState(p.point("start", default=(0.0, 0.0)), p.number("heading", default=0.0))
        )

    ctrl = sec.section("controller")
    controller = ControllerConfig(
        alpha=ctrl.number("alpha", default=20.0, positive=True),
        horizon=ctrl.number("horizon", default=0.5, positive=True),
        jac_epsilon=ctrl.number("jac_epsilon", default=1e-4, positive=True),
        prediction_substeps=ctrl.integer("prediction_substeps", default=50, minimum=2),
    )

    obj = sec.section("objective")
    weights = ObjectiveWeights(
        beta1=obj.number("beta1", default=1.0, minimum=0.0),
        beta2=obj.number("beta2", default=1.0, minimum=0.0),
        beta3=obj.number("beta3", default=0.0, minimum=0.0),
        gamma=obj.number("gamma", default=0.1, positive=True),
        gamma_cost=obj.number("gamma_cost", default=0.0, positive=True) if obj.has("gamma_cost") else None,
        gamma_repel=obj.number("gamma_repel", default=0.0, positive=True) if obj.has("gamma_repel") else None,
    )

    evader = None
    initial_evader = None
    if mode != MODE_AGNOSTIC:
        if not sec.has("evader"):
            sec._fail("evader", f"required for mode {mode}")
        ev = sec.section("evader")
        evader = EvaderParams(
            speed=ev.number("speed", positive=True),
            goal=ev.point("goal"),
            evade_radius_scale=ev.number("evade_radius_scale", default=3.0, positive=True),
        )
        initial_evader = ev.point("start")

    training = None
    if mode == MODE_LEARNING:
        learn = sec.section("learning")
        hidden = learn.data.get("hidden_sizes", [16, 16, 16])
        if not isinstance(hidden, list) or any(
            isinstance(h, bool) or not isinstance(h, int) or h < 1 for h in hidden
        ):
            learn._fail("hidden_sizes", f"expected a list of positive integers, got {hidden!r}")
        training = TrainingConfig(
            eta=learn.number("eta", default=0.01, positive=True),
            epochs_per_update=learn.integer("epochs_per_update", default=50, minimum=1),
            seed=seed,
            window=learn.number("window", default=5.0, positive=True),
            sample_interval=learn.number("sample_interval", default=0.1, positive=True),
            retrain_interval=learn.number("retrain_interval", default=0.5, positive=True),
            hidden_sizes=tuple(hidden),
        )

    reference = None
    if mode == MODE_AGNOSTIC:
        if not sec.has("reference"):
            sec._fail("reference", f"required for mode {mode}")
        ref = sec.section("reference")
        radii = ref.data.get("radii")
        turns = ref.data.get("turns")
        if not isinstance(radii, list) or not radii:
            ref._fail("radii", f"expected a non-empty list of radii, got {radii!r}")
        if not isinstance(turns, list) or len(turns) != len(radii):
            ref._fail("turns", "expected a list of +1/-1 matching radii")
        reference = ReferencePath(
            start=ref.point("start"),
            heading=ref.number("heading", default=0.0),
            radii=tuple(float(r) for r in radii),
            turns=tuple(int(s) for s in turns),
            speed=ref.number("speed", positive=True),
        )

    try:
        return ScenarioConfig(
            mode=mode,
            pursuers=pursuers,
            initial_pursuers=initial_pursuers,
            duration=duration,
            dt=dt,
            evader=evader,
            initial_evader=initial_evader,
            controller=controller,
            weights=weights,
            training=training,
            reference=reference,
            seed=seed,
            name=name,
        )
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}{_at(lines, path)}") from exc


def _parse_file(path) -> tuple[list, dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    lines = _line_map(text)
    if not isinstance(doc, dict) or "scenarios" not in doc:
        raise ConfigError(f"{path}: top level must be a mapping with a 'scenarios' list")
    scen = doc["scenarios"]
    if not isinstance(scen, list) or not scen:
        raise ConfigError(f"{path}: 'scenarios' must be a non-empty list")
    return scen, lines


def load_config(path) -> list[ScenarioConfig]:
    """Load and validate every scenario in a YAML config file.

    Raises ConfigError naming the offending field and line on any problem.
    """
    docs, lines = _parse_file(path)
    return [
        _build_scenario(doc, lines, f"scenarios.{i}", f"scenario_{i}")
        for i, doc in enumerate(docs)
    ]


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, np.ndarray):
        return "[" + ", ".join(repr(float(v)) for v in value) + "]"
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    return str(value)


def write_trace_csv(trace: SimTrace, path) -> None:
    """Write the trace with a header row; floats use repr for reproducibility."""
    cols = trace.columns()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(trace.column_names()) + "\n")
        for k in range(trace.t.shape[0]):
            fh.write(",".join(repr(float(c[k])) for c in cols) + "\n")


def effective_config(cfg: ScenarioConfig) -> dict:
    """Flatten every value the simulation will actually use."""
    out = {
        "scenario.name": cfg.name,
        "scenario.mode": cfg.mode,
        "scenario.duration": cfg.duration,
        "scenario.dt": cfg.dt,
        "scenario.seed": cfg.seed,
        "scenario.capture_threshold": cfg.capture_threshold,
    }
    for i, (p, s) in enumerate(zip(cfg.pursuers, cfg.initial_pursuers)):
        out[f"pursuers.{i}.speed"] = p.speed
        out[f"pursuers.{i}.u_max"] = p.u_max
        out[f"pursuers.{i}.start"] = s.pos
        out[f"pursuers.{i}.heading"] = s.heading
    if cfg.evader is not None:
        out["evader.speed"] = cfg.evader.speed
        out["evader.goal"] = cfg.evader.goal
        out["evader.start"] = cfg.initial_evader
        out["evader.evade_radius_scale"] = cfg.evader.evade_radius_scale
    c = cfg.controller
    out["controller.alpha"] = c.alpha
    out["controller.horizon"] = c.horizon
    out["controller.jac_epsilon"] = c.jac_epsilon
    out["controller.prediction_substeps"] = c.prediction_substeps
    w = cfg.weights
    out["objective.beta1"] = w.beta1
    out["objective.beta2"] = w.beta2
    out["objective.beta3"] = w.beta3
    out["objective.gamma"] = w.gamma
    out["objective.gamma_cost"] = w.gamma_cost
    out["objective.gamma_repel"] = w.gamma_repel
    if cfg.training is not None:
        t = cfg.training
        out["learning.eta"] = t.eta
        out["learning.epochs_per_update"] = t.epochs_per_update
        out["learning.window"] = t.window
        out["learning.sample_interval"] = t.sample_interval
        out["learning.retrain_interval"] = t.retrain_interval
        out["learning.hidden_sizes"] = list(t.hidden_sizes)
    if cfg.reference is not None:
        r = cfg.reference
        out["reference.start"] = r.start
        out["reference.heading"] = r.heading
        out["reference.radii"] = list(r.radii)
        out["reference.turns"] = list(r.turns)
        out["reference.speed"] = r.speed
    return out


def write_summary(cfg: ScenarioConfig, metrics: SummaryMetrics, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for key, value in effective_config(cfg).items():
            fh.write(f"{key} = {format_value(value)}\n")
        for key, value in metrics.as_dict().items():
            fh.write(f"metrics.{key} = {format_value(value)}\n")


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _execute(cfg: ScenarioConfig, out_dir: str, emit_trace: bool, emit_summary: bool):
    trace, metrics = run_scenario(cfg)
    out = Path(out_dir)
    if emit_trace:
        write_trace_csv(trace, out / f"{cfg.name}_trace.csv")
    if emit_summary:
        write_summary(cfg, metrics, out / f"{cfg.name}_summary.txt")
    return cfg.name


def run(manifest: RunManifest) -> int:
    """Execute the scenarios in a manifest; returns the process exit code."""
    config_errors = 0
    runtime_errors = 0
    try:
        docs, lines = _parse_file(manifest.config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    jobs = []
    for i, doc in enumerate(docs):
        fallback = f"scenario_{i}"
        name = doc.get("name", fallback) if isinstance(doc, dict) else fallback
        if manifest.scenario is not None and name != manifest.scenario:
            continue
        try:
            cfg = _build_scenario(doc, lines, f"scenarios.{i}", fallback)
        except ConfigError as exc:
            print(f"config error in scenario {name!r}: {exc}", file=sys.stderr)
            config_errors += 1
            continue
        if manifest.seed is not None:
            cfg.seed = manifest.seed
            if cfg.training is not None:
                cfg.training.seed = manifest.seed
        jobs.append(cfg)

    if not jobs and not config_errors:
        print(f"no scenario matches {manifest.scenario!r}", file=sys.stderr)
        return 1

    out_dir = Path(manifest.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"runtime error: cannot create output directory: {exc}", file=sys.stderr)
        return 2 if not config_errors else 1

    if manifest.parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=manifest.parallel) as pool:
            futures = {
                pool.submit(
                    _execute, cfg, str(out_dir), manifest.emit_trace, manifest.emit_summary
                ): cfg.name
                for cfg in jobs
            }
            for future, name in futures.items():
                try:
                    future.result()
                    print(f"completed scenario {name}")
                except Exception as exc:
                    print(f"runtime error in scenario {name!r}: {exc}", file=sys.stderr)
                    runtime_errors += 1
    else:
        for cfg in jobs:
            try:
                _execute(cfg, str(out_dir), manifest.emit_trace, manifest.emit_summary)
                print(f"completed scenario {cfg.name}")
            except Exception as exc:
                print(f"runtime error in scenario {cfg.name!r}: {exc}", file=sys.stderr)
                runtime_errors += 1

    if config_errors:
        return 1
    if runtime_errors:
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nrpursuit",
        description="Run pursuit-evasion scenarios from a YAML config file.",
    )
    parser.add_argument("--config", required=True, help="path to the YAML config file")
    parser.add_argument("--out", default="runs", help="output directory (default: runs)")
    parser.add_argument("--seed", type=int, default=None, help="override every scenario seed")
    parser.add_argument("--scenario", default=None, help="run only the named scenario")
    parser.add_argument("--no-trace", action="store_true", help="skip writing trace CSVs")
    parser.add_argument(
        "--parallel", type=int, default=1, metavar="K", help="run up to K scenarios concurrently"
    )
    args = parser.parse_args(argv)
    if args.seed is not None and args.seed < 0:
        print("config error: --seed must be non-negative", file=sys.stderr)
        return 1
    manifest = RunManifest(
        config_path=Path(args.config),
        out_dir=Path(args.out),
        seed=args.seed,
        scenario=args.scenario,
        emit_trace=not args.no_trace,
        parallel=max(1, args.parallel),
    )
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
