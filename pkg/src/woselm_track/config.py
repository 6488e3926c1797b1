"""Plain-text run configuration (INI sections per module) and its echo."""

from __future__ import annotations

import configparser
import dataclasses
import io
import os
from pathlib import Path

from .geometry import RingSpec
from .selector import SelectorConfig
from .sequences import SequenceSpec
from .tracker import TrackerConfig

OUTPUT_ENV = "WOSELM_TRACK_OUTPUT"
DEFAULT_OUTPUT = "results"

_RING_KEYS = {"r_lo": "r_lo", "r_hi": "r_hi", "clamp_x": "clamp_half_width_x",
              "clamp_y": "clamp_half_width_y", "step": "step"}
_TRACKER_KEYS = ("search_radius", "feature_dim", "n_hidden", "C", "projection_seed",
                 "hidden_seed", "activation", "standardize", "regularizer_mode",
                 "rho_mode", "rho_value")


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class RunConfig:
    tracker: TrackerConfig = dataclasses.field(default_factory=TrackerConfig)
    sequence: SequenceSpec | None = None
    init_box: tuple[int, int, int, int] | None = None   # 1-based x,y,w,h override
    output_dir: Path = dataclasses.field(
        default_factory=lambda: Path(os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)))
    plots: bool = True


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(raw: str, like, where: str):
    try:
        if isinstance(like, bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(like, int):
            return int(raw)
        if isinstance(like, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(like).__name__}") from None


def to_parser(cfg: RunConfig) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    t = cfg.tracker
    cp["tracker"] = {k: _fmt(getattr(t, k)) for k in _TRACKER_KEYS}
    for name, ring in (("positive_ring", t.pos_ring), ("negative_ring", t.neg_ring)):
        cp[name] = {k: _fmt(getattr(ring, attr)) for k, attr in _RING_KEYS.items()}
    cp["selector"] = {f.name: _fmt(getattr(t.selector, f.name))
                      for f in dataclasses.fields(SelectorConfig)}
    if cfg.sequence is not None:
        s = cfg.sequence
        sec = {"image_dir": os.path.abspath(s.image_dir), "pattern": s.pattern,
               "start_index": str(s.start_index)}
        if s.groundtruth is not None:
            sec["groundtruth"] = os.path.abspath(s.groundtruth)
        if s.n_frames is not None:
            sec["n_frames"] = str(s.n_frames)
        if s.attributes:
            sec["attributes"] = ",".join(s.attributes)
        if cfg.init_box is not None:
            sec["init_box"] = ",".join(map(str, cfg.init_box))
        cp["sequence"] = sec
    cp["output"] = {"dir": os.path.abspath(cfg.output_dir), "plots": _fmt(cfg.plots)}
    return cp


def to_text(cfg: RunConfig) -> str:
    buf = io.StringIO()
    to_parser(cfg).write(buf)
    return buf.getvalue()


def tracker_to_text(t: TrackerConfig) -> str:
    """Only the tracker-side sections, independent of paths and working directory."""
    cp = to_parser(RunConfig(tracker=t))
    cp.remove_section("output")
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def from_parser(cp: configparser.ConfigParser, base: RunConfig | None = None,
                base_dir: Path | None = None) -> RunConfig:
    base = base or RunConfig()
    known = {"tracker", "positive_ring", "negative_ring", "selector", "sequence", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

    def section(name, defaults: dict, rename=None):
        out = dict(defaults)
        if name in cp:
            for key, raw in cp[name].items():
                attr = (rename or {}).get(key, key)
                if attr not in defaults:
                    raise ConfigError(f"[{name}] unknown key {key!r}")
                out[attr] = _coerce(raw, defaults[attr], f"[{name}] {key}")
        return out

    t = base.tracker
    rings = {}
    for name, ring in (("positive_ring", t.pos_ring), ("negative_ring", t.neg_ring)):
        rings[name] = RingSpec(**section(name, dataclasses.asdict(ring), _RING_KEYS))
    sel = SelectorConfig(**section("selector", dataclasses.asdict(t.selector)))
    tk = section("tracker", {k: getattr(t, k) for k in _TRACKER_KEYS})
    try:
        tracker = TrackerConfig(pos_ring=rings["positive_ring"], neg_ring=rings["negative_ring"],
                                selector=sel, **tk)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    seq, init_box = base.sequence, base.init_box
    if "sequence" in cp:
        s = cp["sequence"]
        if "image_dir" not in s and seq is None:
            raise ConfigError("[sequence] requires image_dir")

        def path(key):
            p = Path(s[key])
            return p if p.is_absolute() or base_dir is None else base_dir / p

        seq = SequenceSpec(
            image_dir=path("image_dir") if "image_dir" in s else seq.image_dir,
            pattern=s.get("pattern", seq.pattern if seq else SequenceSpec.pattern),
            groundtruth=path("groundtruth") if "groundtruth" in s else (seq.groundtruth if seq else None),
            start_index=_coerce(s.get("start_index", "1"), 1, "[sequence] start_index"),
            n_frames=(_coerce(s["n_frames"], 1, "[sequence] n_frames") if "n_frames" in s
                      else (seq.n_frames if seq else None)),
            attributes=[a.strip() for a in s.get("attributes", "").split(",") if a.strip()],
        )
        if "init_box" in s:
            parts = s["init_box"].split(",")
            if len(parts) != 4:
                raise ConfigError("[sequence] init_box must be x,y,w,h")
            init_box = tuple(_coerce(p, 1, "[sequence] init_box") for p in parts)
        unknown_keys = set(s) - {"image_dir", "pattern", "groundtruth", "start_index",
                                 "n_frames", "attributes", "init_box"}
        if unknown_keys:
            raise ConfigError(f"[sequence] unknown key(s): {', '.join(sorted(unknown_keys))}")

    out_dir, plots = base.output_dir, base.plots
    if "output" in cp:
        o = cp["output"]
        if "dir" in o:
            out_dir = Path(o["dir"])
        if "plots" in o:
            plots = _coerce(o["plots"], True, "[output] plots")
    return RunConfig(tracker=tracker, sequence=seq, init_box=init_box,
                     output_dir=out_dir, plots=plots)


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    return cp


def from_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cp = _parser()
    cp.read_string(text)
    return from_parser(cp, base)


def load(path, base: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    cp = _parser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return from_parser(cp, base, base_dir=path.parent)


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``section.key=value`` strings on top of ``cfg``."""
    if not overrides:
        return cfg
    cp = to_parser(cfg)
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not section.key=value")
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][name.strip()] = value.strip()
    return from_parser(cp)
