"""YAML-configured servo experiments and reference sweeps.

A config names a world (object geometry), a feature, a reference and
optionally a sweep over one reference component; everything else defaults to
the standard gains, perception accuracy and stopping rules. See
``configs/`` for annotated examples.
"""

from __future__ import annotations

import copy
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .analysis import closure_error, deviations, linearity_fit, summarize
from .control import GainConfig, StopCriteria, reference_contact_pose, run_servo
from .features import (
    DEPTH_RANGE,
    FeatureClass,
    FeatureKind,
    ReferenceSpec,
    feature_from_name,
    validate_reference,
)
from .geometry import (
    PRESETS,
    Circle,
    ConstantProfile,
    CurveOnSurface,
    FourierProfile,
    PlanarContour,
    Plane,
    Saddle,
    Sphere,
    TableProfile,
    Wave,
)
from .geometry.surfaces import GeometryError
from .perception import GravityBias, PerceptionConfig, PoseRanges, default_mae
from .pose import COMPONENTS, Pose
from .record import TrajectoryRecord

SURFACE_WORLDS = ("plane", "sphere", "saddle", "wave")
EDGE_WORLDS = ("circle", "polar", "rim")
SWEEPABLE = COMPONENTS + ("phi",)

_TOP_KEYS = {"name", "world", "feature", "reference", "sweep", "gains", "perception",
             "initial_pose", "stop", "output", "transient_skip"}


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""


# -- world construction -------------------------------------------------------

def _surface(spec: dict, where: str):
    kind = spec.get("kind")
    args = {k: v for k, v in spec.items() if k != "kind"}
    cls = {"plane": Plane, "sphere": Sphere, "saddle": Saddle, "wave": Wave}.get(kind)
    if cls is None:
        raise ConfigError(f"{where}.kind: unknown surface {kind!r}; expected one of {list(SURFACE_WORLDS)}")
    try:
        return cls(**args)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _profile(spec: dict, where: str):
    if "preset" in spec:
        name = spec["preset"]
        if name not in PRESETS:
            raise ConfigError(f"{where}.preset: unknown contour {name!r}; expected one of {sorted(PRESETS)}")
        kw = {k: spec[k] for k in ("radius", "amplitude") if k in spec}
        return PRESETS[name](**kw)
    if "table" in spec:
        tab = spec["table"]
        try:
            return TableProfile(tab["theta_deg"], tab["r"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.table: {exc}") from None
    if "fourier" in spec:
        f = spec["fourier"]
        try:
            return FourierProfile(f["a0"], f.get("a", ()), f.get("b", ()))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.fourier: {exc}") from None
    if "radius" in spec:
        return ConstantProfile(spec["radius"])
    raise ConfigError(f"{where}: contour needs one of preset, table, fourier or radius")


def build_world(spec: dict):
    """Object geometry from its config mapping."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("world: expected a mapping with a 'kind'")
    kind = spec["kind"]
    if kind in SURFACE_WORLDS:
        return _surface(spec, "world")
    center = spec.get("center", (0.0, 0.0))
    try:
        if kind == "circle":
            return Circle(spec.get("radius", 50.0), center, spec.get("height", 0.0))
        if kind == "polar":
            return PlanarContour(_profile(spec, "world"), center, spec.get("height", 0.0))
        if kind == "rim":
            surf = _surface(spec.get("surface", {"kind": "wave"}), "world.surface")
            prof = _profile(spec.get("contour", {"radius": 50.0}), "world.contour")
            return CurveOnSurface(prof, surf, center)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"world: {exc}") from None
    raise ConfigError(f"world.kind: unknown object {kind!r}; expected one of "
                      f"{list(SURFACE_WORLDS + EDGE_WORLDS)}")


def _default_world(kind: str) -> dict:
    return {
        "plane": {"kind": "plane", "normal": [0.0, 0.0, 1.0], "offset": 0.0},
        "sphere": {"kind": "sphere", "radius": 60.0, "center": [0.0, 0.0, 0.0]},
        "saddle": {"kind": "saddle", "scale": 120.0},
        "wave": {"kind": "wave", "amplitude": 10.0, "wavelength": 80.0},
        "circle": {"kind": "circle", "radius": 50.0, "center": [0.0, 0.0], "height": 0.0},
        "polar": {"kind": "polar", "preset": "clover", "center": [0.0, 0.0], "height": 0.0},
        "rim": {"kind": "rim", "surface": {"kind": "wave", "amplitude": 10.0, "wavelength": 80.0},
                "contour": {"radius": 50.0}, "center": [0.0, 0.0]},
    }.get(kind, {"kind": kind})


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    index: int
    reference: tuple[float, ...]
    sweep_value: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment; ``to_dict`` round-trips through :func:`config_from_dict`."""

    name: str
    world: dict
    feature: str
    reference: tuple[float, ...]
    sweep: Optional[dict]
    gains: dict
    perception: dict
    initial_pose: Optional[tuple[float, ...]]
    stop: dict
    output: dict
    transient_skip: int

    @property
    def feature_class(self) -> FeatureClass:
        return feature_from_name(self.feature)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "world": copy.deepcopy(self.world),
            "feature": self.feature,
            "reference": {"pose": list(self.reference)},
            "sweep": copy.deepcopy(self.sweep),
            "gains": copy.deepcopy(self.gains),
            "perception": copy.deepcopy(self.perception),
            "initial_pose": None if self.initial_pose is None else list(self.initial_pose),
            "stop": copy.deepcopy(self.stop),
            "output": copy.deepcopy(self.output),
            "transient_skip": self.transient_skip,
        }

    def runs(self) -> list[RunSpec]:
        """Expand the sweep (if any) into one run per value."""
        if not self.sweep:
            return [RunSpec(0, self.reference)]
        comp = self.sweep["component"]
        out = []
        for i, v in enumerate(self.sweep["values"]):
            ref = list(self.reference)
            if comp == "phi":
                step = math.hypot(ref[0], ref[1])
                ref[0] = step * math.cos(math.radians(v))
                ref[1] = step * math.sin(math.radians(v))
            else:
                ref[COMPONENTS.index(comp)] = float(v)
            out.append(RunSpec(i, tuple(ref), float(v)))
        return out

    def ranges(self) -> PoseRanges:
        return PoseRanges(**{k: tuple(v) for k, v in self.perception["ranges"].items()})

    def perception_config(self, noiseless: bool = False) -> PerceptionConfig:
        p = self.perception
        mae = (0.0,) * 6 if (noiseless or p["noiseless"]) else tuple(p["mae"])
        bias = GravityBias(p["gravity_bias"]) if p["gravity_bias"] > 0 else None
        return PerceptionConfig(mae=mae, seed=p["seed"], clip=self.ranges(), bias=bias)

    def gain_config(self) -> GainConfig:
        return GainConfig(self.gains["kp"], self.gains["ki"], self.gains["bounds"])

    def stop_criteria(self) -> StopCriteria:
        s = dict(self.stop)
        s["contact_band"] = tuple(s["contact_band"])
        return StopCriteria(**s)


def _vec(value, n: int, where: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a list of {n} numbers, got {value!r}") from None
    if len(out) != n or not all(math.isfinite(v) for v in out):
        raise ConfigError(f"{where}: expected {n} finite numbers, got {list(value)}")
    return out


def _mae(spec, feature: FeatureClass) -> tuple[float, ...]:
    base = list(default_mae(feature))
    if spec is None:
        return tuple(base)
    if isinstance(spec, dict):
        for k, v in spec.items():
            if k not in COMPONENTS:
                raise ConfigError(f"perception.mae.{k}: unknown pose component")
            base[COMPONENTS.index(k)] = float(v)
        out = tuple(base)
    else:
        out = _vec(spec, 6, "perception.mae")
    if any(m < 0 for m in out):
        raise ConfigError("perception.mae: values must be non-negative")
    return out


def _reference(spec, feature: FeatureClass) -> tuple[float, ...]:
    spec = {} if spec is None else spec
    if not isinstance(spec, dict):
        raise ConfigError("reference: expected a mapping")
    if "pose" in spec:
        extra = set(spec) - {"pose"}
        if extra:
            raise ConfigError(f"reference.{sorted(extra)[0]}: not allowed together with reference.pose")
        return _vec(spec["pose"], 6, "reference.pose")
    allowed = {"step", "phi", "depth"} | set(COMPONENTS) - {"z"}
    for k in spec:
        if k not in allowed:
            raise ConfigError(f"reference.{k}: unknown key")
    step = float(spec.get("step", 1.0))
    depth = float(spec.get("depth", -3.0))
    if feature.kind is FeatureKind.SURFACE:
        phi = math.radians(float(spec.get("phi", 0.0)))
        pose = [step * math.cos(phi), step * math.sin(phi), depth, 0.0, 0.0, 0.0]
    else:
        if "phi" in spec:
            raise ConfigError("reference.phi: only meaningful for surface features")
        pose = [0.0, step, depth, 0.0, 0.0, 0.0]
    for k in ("x", "y", "alpha", "beta", "gamma"):
        if k in spec:
            pose[COMPONENTS.index(k)] = float(spec[k])
    # exact zeros for the canonical directions
    return tuple(0.0 if abs(v) < 1e-15 else v for v in pose)


def _merge(defaults: dict, given, where: str) -> dict:
    given = {} if given is None else given
    if not isinstance(given, dict):
        raise ConfigError(f"{where}: expected a mapping")
    for k in given:
        if k not in defaults:
            raise ConfigError(f"{where}.{k}: unknown key")
    out = dict(defaults)
    out.update(given)
    return out


def config_from_dict(raw: dict, source: str = "<config>") -> ExperimentConfig:
    """Resolve defaults and validate a config mapping."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    for k in raw:
        if k not in _TOP_KEYS:
            raise ConfigError(f"{k}: unknown top-level key")
    if "world" not in raw:
        raise ConfigError("world: required")
    world = raw["world"]
    if isinstance(world, str):
        world = _default_world(world)
    elif isinstance(world, dict) and "kind" in world:
        defaults = _default_world(world["kind"])
        if world["kind"] == "polar" and {"table", "fourier", "radius"} & set(world):
            defaults.pop("preset")
        world = {**defaults, **world}
    build_world(world)  # validates

    kind = world["kind"]
    fname = raw.get("feature", "surface" if kind in SURFACE_WORLDS else "edge")
    try:
        feature = feature_from_name(str(fname))
    except ValueError as exc:
        raise ConfigError(f"feature: {exc}") from None
    if (feature.kind is FeatureKind.SURFACE) != (kind in SURFACE_WORLDS):
        raise ConfigError(f"feature: {feature.name} feature does not match world kind {kind!r}")

    reference = _reference(raw.get("reference"), feature)

    g = GainConfig.for_feature(feature).to_dict()
    gains = _merge(g, raw.get("gains"), "gains")
    for k in ("kp", "ki", "bounds"):
        gains[k] = list(_vec(gains[k], 6, f"gains.{k}"))
        if any(v < 0 for v in gains[k]):
            raise ConfigError(f"gains.{k}: values must be non-negative")

    pdef = {"mae": None, "seed": 0, "noiseless": False, "gravity_bias": 0.0, "ranges": None}
    p = _merge(pdef, raw.get("perception"), "perception")
    ranges = PoseRanges().to_dict()
    if p["ranges"] is not None:
        ranges = _merge(ranges, p["ranges"], "perception.ranges")
    try:
        PoseRanges(**{k: tuple(_vec(v, 2, f"perception.ranges.{k}")) for k, v in ranges.items()})
    except ValueError as exc:
        raise ConfigError(f"perception.ranges: {exc}") from None
    perception = {
        "mae": list(_mae(p["mae"], feature)),
        "seed": int(p["seed"]),
        "noiseless": bool(p["noiseless"]),
        "gravity_bias": float(p["gravity_bias"]),
        "ranges": {k: [float(a), float(b)] for k, (a, b) in ranges.items()},
    }
    if perception["gravity_bias"] < 0:
        raise ConfigError("perception.gravity_bias: must be non-negative")

    sdef = StopCriteria().to_dict()
    stop = _merge(sdef, raw.get("stop"), "stop")
    stop["contact_band"] = list(_vec(stop["contact_band"], 2, "stop.contact_band"))
    stop["max_steps"] = int(stop["max_steps"])
    stop["min_steps_before_closure"] = int(stop["min_steps_before_closure"])
    stop["closure_radius"] = float(stop["closure_radius"])
    stop["workspace_radius"] = float(stop["workspace_radius"])
    if stop["max_steps"] < 1:
        raise ConfigError("stop.max_steps: must be at least 1")

    sweep = raw.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or set(sweep) != {"component", "values"}:
            raise ConfigError("sweep: expected a mapping with 'component' and 'values'")
        comp = sweep["component"]
        if comp not in SWEEPABLE:
            raise ConfigError(f"sweep.component: {comp!r} not one of {list(SWEEPABLE)}")
        if comp == "phi" and feature.kind is not FeatureKind.SURFACE:
            raise ConfigError("sweep.component: phi sweeps need a surface feature")
        values = sweep["values"]
        if isinstance(values, dict):
            try:
                values = np.linspace(values["start"], values["stop"], int(values["num"])).tolist()
            except (KeyError, TypeError, ValueError):
                raise ConfigError("sweep.values: range form needs start, stop, num") from None
        values = list(_vec(values, len(values), "sweep.values")) if values else []
        if not values:
            raise ConfigError("sweep.values: must not be empty")
        sweep = {"component": comp, "values": values}

    init = raw.get("initial_pose")
    init = None if init is None else _vec(init, 6, "initial_pose")
    output = _merge({"dir": "out"}, raw.get("output"), "output")
    output["dir"] = str(output["dir"])
    skip = int(raw.get("transient_skip", 10))
    if skip < 0:
        raise ConfigError("transient_skip: must be non-negative")

    cfg = ExperimentConfig(
        name=str(raw.get("name", Path(source).stem if source != "<config>" else "experiment")),
        world=world, feature=feature.name, reference=reference, sweep=sweep, gains=gains,
        perception=perception, initial_pose=init, stop=stop, output=output, transient_skip=skip,
    )
    rng = cfg.ranges()
    for run in cfg.runs():
        problems = validate_reference(ReferenceSpec(Pose(*run.reference), feature), rng)
        if problems:
            tag = "" if run.sweep_value is None else f" (sweep value {run.sweep_value:g})"
            raise ConfigError("reference." + "; reference.".join(problems) + tag)
        if feature.kind is FeatureKind.SURFACE:
            step = math.hypot(run.reference[0], run.reference[1])
        else:
            step = abs(run.reference[1])
        if not DEPTH_RANGE[0] <= run.reference[2] <= DEPTH_RANGE[1]:
            raise ConfigError(f"reference.z={run.reference[2]:g} outside {list(DEPTH_RANGE)}")
        if step > 2.0 + 1e-12:
            raise ConfigError(f"reference: exploration step {step:.3g} mm exceeds 2 mm")
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML (or JSON) experiment config."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: parse error: {problem}") from None
    if isinstance(raw, dict) and "config" in raw and "runs" in raw:
        raw = raw["config"]  # a summary document embeds its resolved config
    return config_from_dict(raw, str(path))


# -- execution ----------------------------------------------------------------

def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _initial_pose(cfg: ExperimentConfig, world, feature, ref: ReferenceSpec) -> Pose:
    if cfg.initial_pose is not None:
        return Pose(*cfg.initial_pose)
    return reference_contact_pose(world, feature, ref)


def execute_run(cfg: ExperimentConfig, run: RunSpec, noiseless: bool = False):
    """Run one trajectory; returns ``(record, summary_entry)``."""
    world = build_world(cfg.world)
    feature = cfg.feature_class
    ref = ReferenceSpec(Pose(*run.reference), feature)
    perception = cfg.perception_config(noiseless)
    init = _initial_pose(cfg, world, feature, ref)
    header = {"config": cfg.to_dict(), "seed": perception.seed, "run": run.index,
              "reference": list(run.reference)}
    try:
        record = run_servo(world, feature, ref, perception, cfg.gain_config(), init,
                           cfg.stop_criteria(), _rng(perception.seed, run.index), header)
    except (ValueError, GeometryError) as exc:
        entry = {"id": run.index, "stop_reason": "invalid_start", "detail": str(exc),
                 "closure_mm": None, "deviations": None, "reference": list(run.reference),
                 "sweep_value": run.sweep_value, "steps": 0}
        return None, entry
    entry = {"id": run.index, "stop_reason": record.stop_reason, "detail": record.detail,
             "closure_mm": closure_error(record), "reference": list(run.reference),
             "sweep_value": run.sweep_value, "steps": len(record)}
    try:
        series = deviations(record, world, feature, ref)
        entry["deviations"] = summarize(series, cfg.transient_skip).to_dict()
    except (ValueError, GeometryError) as exc:
        entry["deviations"] = None
        entry["detail"] = (entry["detail"] + "; " if entry["detail"] else "") + f"no deviation summary: {exc}"
    return record, entry


def _worker(args):
    cfg, run, noiseless = args
    record, entry = execute_run(cfg, run, noiseless)
    return (None if record is None else record.to_csv_text()), entry


def sweep_fits(cfg: ExperimentConfig, entries: list[dict]) -> list[dict]:
    """Line fits of the mean true component against its reference value.

    The fitted quantity is the deviation from the feature itself (mean
    deviation from the reference plus the reference value), which is the
    one expected to vary linearly with the reference.
    """
    if not cfg.sweep or cfg.sweep["component"] not in cfg.feature_class.predictable:
        return []
    comp = cfg.sweep["component"]
    pairs = [(e["sweep_value"], e["deviations"][comp]["mean"] + e["sweep_value"])
             for e in entries if e.get("deviations")]
    if len(pairs) < 2:
        return []
    try:
        fit = linearity_fit(pairs)
    except ValueError:
        return []
    return [{"component": comp, "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}]


@dataclass
class ExperimentResult:
    summary: dict
    out_dir: Path
    csv_paths: list

    @property
    def ok(self) -> bool:
        return all(r["stop_reason"] in ("closure", "max_steps") for r in self.summary["runs"])


def run_experiment(cfg: ExperimentConfig, out_dir=None, seed: Optional[int] = None,
                   jobs: int = 1, noiseless: bool = False) -> ExperimentResult:
    """Execute every run, writing ``run_NNN.csv`` files and ``summary.json``.

    Runs are independent (each derives its own RNG stream from the seed and
    its index), so parallel and serial execution produce identical files.
    """
    if seed is not None:
        cfg = replace(cfg, perception={**cfg.perception, "seed": int(seed)})
    if noiseless:
        cfg = replace(cfg, perception={**cfg.perception, "noiseless": True})
    out = Path(out_dir if out_dir is not None else cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, run, False) for run in cfg.runs()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    paths, entries = [], []
    for (csv_text, entry), run in zip(results, cfg.runs()):
        if csv_text is not None:
            p = out / f"run_{run.index:03d}.csv"
            p.write_text(csv_text)
            paths.append(p)
        entries.append(entry)
    summary = {"config": cfg.to_dict(), "runs": entries, "fits": sweep_fits(cfg, entries)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return ExperimentResult(summary, out, paths)


def check_config(cfg: ExperimentConfig) -> list[str]:
    """Problems with the starting contact of each run (empty when all are usable)."""
    world = build_world(cfg.world)
    feature = cfg.feature_class
    rng = cfg.ranges()
    problems = []
    for run in cfg.runs():
        ref = ReferenceSpec(Pose(*run.reference), feature)
        try:
            init = _initial_pose(cfg, world, feature, ref)
            from .geometry import true_relative_pose

            true = true_relative_pose(world.contact_frame(init), init, feature)
        except GeometryError as exc:
            problems.append(f"run {run.index}: {exc}")
            continue
        for n in feature.predictable:
            v = getattr(true, n)
            if not rng[n][0] <= v <= rng[n][1]:
                problems.append(f"run {run.index}: initial_pose gives {n}={v:.4g} outside {list(rng[n])}")
    return problems


def read_record(path, **kw) -> TrajectoryRecord:
    return TrajectoryRecord.read_csv(path, **kw)
