"""Flat key-value experiment configuration with preset includes.

Config files are plain text, one ``key = value`` per line, ``#`` comments.
An ``include <name-or-path>`` line splices another file at that point;
bare names resolve against the presets shipped with the package, paths
against the including file's directory.  Later assignments win.
"""

from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

DEFAULTS = {
    # coding (structural facts; not overridable knobs)
    "coding": "5g-nr-ldpc-bg2",
    "data_bits": "1280",
    "coded_bits": "2176",
    # system rates
    "sample_rate_hz": "100e6",
    "bit_rate_hz": "5e6",
    # link geometry
    "depth_m": "0.47",
    "height_m": "0.8",
    "n_streams": "3",
    "led_spacing_m": "1.0",
    "layout": "triangle",
    # channel
    "attenuation_c": "0.16",
    "background_mw": "40",
    "gain_scale": "0.02",
    "noise_std": "0.0633",
    "surface": "calm",
    "modulation_depth": "0.770",
    "wave_components": "0.30:1.5:0.0,0.25:2.5:1.7,0.20:4.0:3.9,0.15:5.5:0.9,0.10:7.0:2.6",
    # modem
    "vpp": "9.06675",
    "dc_bias_v": "10.8",
    "sync_threshold": "0.6",
    "llr_clip": "30",
    "sigma_floor": "1e-4",
    # decoding
    "min_sum_alpha": "0.75",
    "max_iters": "20",
    "decode_latency_s": "70e-6",
    "stagger_s": "80e-6",
    "mode": "shared",
    # run
    "n_frames": "1000",
    "seed": "1",
}


class ConfigError(ValueError):
    pass


def parse_config(path) -> dict[str, str]:
    """Parse a config file into a key-value dict, resolving includes."""
    merged = dict(DEFAULTS)
    merged.update(_parse_file(Path(path)))
    return merged


def _parse_file(path: Path, depth: int = 0) -> dict[str, str]:
    if depth > 8:
        raise ConfigError("include nesting too deep")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("include"):
            target = line[len("include"):].strip()
            if not target:
                raise ConfigError(f"{path}:{lineno}: include needs a name or path")
            out.update(_parse_file(_resolve_include(target, path), depth + 1))
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        out[key] = value
    return out


def _resolve_include(target: str, including: Path) -> Path:
    if "/" not in target and not target.endswith(".cfg"):
        return preset_path(target)
    cand = (including.parent / target).resolve()
    if cand.exists():
        return cand
    return preset_path(Path(target).stem)


def preset_path(name: str) -> Path:
    res = resources.files("w2a_owc").joinpath("configs", f"{name}.cfg")
    with resources.as_file(res) as p:
        if not p.exists():
            raise ConfigError(f"unknown preset '{name}'")
        return Path(p)


def preset_config(name: str) -> dict[str, str]:
    return parse_config(preset_path(name))


def _get_float(cfg: dict, key: str) -> float:
    try:
        return float(cfg[key])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad numeric value for '{key}'") from exc


def _get_int(cfg: dict, key: str) -> int:
    value = _get_float(cfg, key)
    if value != int(value):
        raise ConfigError(f"'{key}' must be an integer")
    return int(value)


def parse_wave_components(text: str) -> tuple[tuple[float, float, float], ...]:
    comps = []
    for part in text.split(","):
        try:
            a, f, phi = (float(x) for x in part.split(":"))
        except ValueError as exc:
            raise ConfigError(f"bad wave component '{part}'") from exc
        comps.append((a, f, phi))
    return tuple(comps)


@dataclass(frozen=True)
class ExperimentSettings:
    """Validated, typed view of a merged configuration."""

    surface: str = "calm"
    n_frames: int = 1000
    n_streams: int = 3
    vpp: float = 9.06675
    seed: int = 1
    mode: str = "shared"
    sample_rate_hz: float = 100e6
    bit_rate_hz: float = 5e6
    depth_m: float = 0.47
    height_m: float = 0.8
    led_spacing_m: float = 1.0
    attenuation_c: float = 0.16
    background_mw: float = 40.0
    gain_scale: float = 0.02
    noise_std: float = 0.0633
    modulation_depth: float = 0.770
    wave_components: tuple = ()
    sync_threshold: float = 0.6
    llr_clip: float = 30.0
    sigma_floor: float = 1e-4
    min_sum_alpha: float = 0.75
    max_iters: int = 20
    decode_latency_s: float = 70e-6
    stagger_s: float = 80e-6
    payload_file: str | None = None

    def __post_init__(self):
        if self.n_frames < 1:
            raise ConfigError("n_frames must be >= 1")
        if self.vpp <= 0:
            raise ConfigError("vpp must be positive")
        if self.mode not in ("shared", "individual"):
            raise ConfigError("mode must be 'shared' or 'individual'")
        if self.surface not in ("calm", "wavy"):
            raise ConfigError("surface must be 'calm' or 'wavy'")
        if self.n_streams < 1:
            raise ConfigError("n_streams must be >= 1")


def settings_from_dict(cfg: dict[str, str], **overrides) -> ExperimentSettings:
    known = {f.name for f in fields(ExperimentSettings)}
    kwargs = {}
    for name in known:
        if name == "wave_components":
            kwargs[name] = parse_wave_components(cfg["wave_components"])
        elif name in ("n_frames", "n_streams", "seed", "max_iters"):
            kwargs[name] = _get_int(cfg, name)
        elif name in ("surface", "mode"):
            kwargs[name] = cfg[name]
        elif name == "payload_file":
            kwargs[name] = cfg.get("payload_file")
        else:
            kwargs[name] = _get_float(cfg, name)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown setting '{key}'")
        kwargs[key] = value
    return ExperimentSettings(**kwargs)


def load_settings(path=None, preset: str | None = None, **overrides) -> ExperimentSettings:
    if path is not None:
        cfg = parse_config(path)
    elif preset is not None:
        cfg = preset_config(preset)
    else:
        cfg = dict(DEFAULTS)
    return settings_from_dict(cfg, **overrides)
