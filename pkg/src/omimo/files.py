"""
Config, manifest and CSV formats.

Config files are flat ``key = value`` text; ``#`` starts a comment. Keys::

    mt, mr, nr          integer antenna counts
    dt, dr              element spacing in wavelengths
    theta_s_deg         target direction
    interferers         "angle:power_db;angle:power_db" (empty for none)
    k_list              "1,5,10,20"
    k                   subarray count for SINR trials
    snr_db, signal_power_db
    trials, seed
    grid                "min:max:step" in degrees
    num_samples, index_mode ("linear" | "paper-literal"), nsp (true/false)

Channel CSVs are recognized by their header:

* paired columns ``h<r>_<c>_re, h<r>_<c>_im`` on a single data row;
* two blocks ``re_0..re_<n-1>, im_0..im_<n-1>``, one row per channel row;
* ``c0..c<n-1>`` holding Python-style complex literals such as ``1.5-0.2j``.

Numeric CSV output uses 12 significant digits.
"""

import csv
import json
import re
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from omimo.scenario import ConfigError, ScenarioConfig

FLOAT_FMT = "{:.12g}"

_INT_KEYS = {"mt", "mr", "nr", "k", "trials", "seed", "num_samples"}
_FLOAT_KEYS = {"dt", "dr", "theta_s_deg", "snr_db", "signal_power_db"}


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return FLOAT_FMT.format(float(value))


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "interferers":
            if not raw:
                return ()
            out = []
            for item in raw.split(";"):
                if item.strip():
                    angle, power = item.split(":")
                    out.append((float(angle), float(power)))
            return tuple(out)
        if key == "k_list":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if key == "grid":
            lo, hi, step = (float(v) for v in raw.split(":"))
            return (lo, hi, step)
        if key == "index_mode":
            return raw
        if key == "nsp":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        values[key] = _parse_value(key, raw)
    return values


def parse_overrides(pairs) -> dict:
    values = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not KEY=VALUE")
        key, raw = pair.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), raw)
    return values


def config_to_strings(config: ScenarioConfig) -> dict:
    out = {}
    for f in fields(config):
        v = getattr(config, f.name)
        if f.name == "interferers":
            out[f.name] = ";".join(f"{fmt(a)}:{fmt(p)}" for a, p in v)
        elif f.name == "k_list":
            out[f.name] = ",".join(str(k) for k in v)
        elif f.name == "grid":
            out[f.name] = ":".join(fmt(x) for x in v)
        elif f.name == "index_mode":
            out[f.name] = v
        else:
            out[f.name] = fmt(v)
    return out


def load_config(path=None, overrides=None) -> tuple[ScenarioConfig, dict]:
    """
    Resolve a config from defaults, a config or manifest file, and overrides.

    Returns the config and any CLI options recorded in a manifest.
    """
    values, options = {}, {}
    if path is not None:
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".json":
            manifest = json.loads(text)
            values = {k: _parse_value(k, v) for k, v in manifest["config"].items()}
            options = manifest.get("options", {})
        else:
            values = parse_config_text(text)
    values.update(overrides or {})
    try:
        return ScenarioConfig(**values), options
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def write_manifest(out_dir: Path, command: str, config: ScenarioConfig | None, outputs, options=None,
                   timestamp: str = "") -> Path:
    from omimo import __version__

    manifest = {
        "command": command,
        "version": __version__,
        "seed": config.seed if config is not None else None,
        "timestamp": timestamp,
        "config": config_to_strings(config) if config is not None else {},
        "options": options or {},
        "outputs": [Path(o).name for o in outputs],
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return Path(path)


# ------------------------------------------------------------ channel CSV

_PAIRED = re.compile(r"^h(\d+)_(\d+)_(re|im)$")


def read_channel_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty channel file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    try:
        if all(_PAIRED.match(h) for h in header):
            if len(body) != 1:
                raise ValueError("paired-column layout needs exactly one data row")
            parsed = [_PAIRED.match(h).groups() for h in header]
            nrow = max(int(r) for r, _, _ in parsed) + 1
            ncol = max(int(c) for _, c, _ in parsed) + 1
            H = np.zeros((nrow, ncol), dtype=complex)
            for (r, c, part), val in zip(parsed, body[0]):
                v = float(val)
                H[int(r), int(c)] += v if part == "re" else 1j * v
            return H
        if header and header[0].startswith("re_"):
            n = sum(h.startswith("re_") for h in header)
            if header != [f"re_{i}" for i in range(n)] + [f"im_{i}" for i in range(n)]:
                raise ValueError("two-block header must be re_0..re_{n-1}, im_0..im_{n-1}")
            data = np.array([[float(v) for v in row] for row in body])
            return data[:, :n] + 1j * data[:, n:]
        if header and all(re.fullmatch(r"c\d+", h) for h in header):
            return np.array([[complex(v.strip().replace(" ", "")) for v in row] for row in body])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed channel CSV ({exc})") from exc
    raise ValueError(f"{path}: unrecognized channel CSV header {header[:4]}...")


def write_channel_csv(path, H) -> Path:
    H = np.asarray(H, dtype=complex)
    n = H.shape[1]
    header = [f"re_{i}" for i in range(n)] + [f"im_{i}" for i in range(n)]
    # full precision so a written channel reads back bit-identically
    rows = [["{:.17g}".format(v) for v in (*row.real, *row.imag)] for row in H]
    return write_csv(path, header, rows)
