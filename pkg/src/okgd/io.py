"""File formats: run configuration, stream CSV, ground truth, score traces and bench reports."""
from __future__ import annotations

import configparser
import csv
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .detector import DetectionResult, DetectorConfig


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class DataError(ValueError):
    """Malformed or missing input data."""


# -- run configuration -------------------------------------------------------

_DETECTOR_KEYS = {
    "lambda": "lam", "gamma": "gamma", "mu0": "mu0", "bp": "bp", "n_pre": "n_pre",
    "n_post": "n_post", "c": "c", "kappa": "kappa", "threshold_warmup": "threshold_warmup",
    "seed": "seed", "kernel": "kernel", "bandwidth": "bandwidth",
}
_INT_FIELDS = {"bp", "n_pre", "n_post", "threshold_warmup", "seed"}
_AUTO_FIELDS = {"lam", "threshold_warmup", "bandwidth"}


@dataclass
class RunConfig:
    """Everything ``okgd detect`` needs.

    ``graph`` is one of ``{"kind": "edges", "path": ...}``,
    ``{"kind": "sbm", n_clusters, cluster_size, p_intra, p_inter, seed}`` or
    ``{"kind": "knn", "path": ..., "k": ...}``; ``stream`` is
    ``{"kind": "csv", "path": ...}`` or a synthetic scenario description.
    """

    detector: DetectorConfig = field(default_factory=DetectorConfig)
    graph: dict = field(default_factory=dict)
    stream: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _parse_detector(section) -> DetectorConfig:
    kwargs = {}
    for key, raw in section.items():
        if key not in _DETECTOR_KEYS:
            raise ConfigError(f"unknown key [detector] {key}")
        name = _DETECTOR_KEYS[key]
        raw = raw.strip()
        try:
            if raw.lower() == "auto":
                if name not in _AUTO_FIELDS:
                    raise ConfigError(f"[detector] {key} cannot be 'auto'")
                kwargs[name] = None
            elif name == "kernel":
                kwargs[name] = raw
            elif name == "bandwidth" and "," in raw:
                kwargs[name] = tuple(float(x) for x in raw.split(","))
            elif name in _INT_FIELDS:
                kwargs[name] = int(raw)
            else:
                kwargs[name] = float(raw)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"[detector] {key} = {raw!r} is not a valid value") from None
    try:
        return DetectorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[detector] {exc}") from None


def _coerce(raw: str):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def parse_config_text(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    unknown = set(parser.sections()) - {"detector", "graph", "stream", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    det = _parse_detector(parser["detector"]) if parser.has_section("detector") else DetectorConfig()
    sections = {}
    for name in ("graph", "stream", "output"):
        items = dict(parser[name]) if parser.has_section(name) else {}
        sections[name] = {k: (v if k in ("path", "kind", "dir", "trace", "summary") else _coerce(v))
                          for k, v in items.items()}
    for name in ("graph", "stream"):
        kind = sections[name].get("kind")
        allowed = {"graph": ("edges", "sbm", "knn"), "stream": ("csv", "cluster-swap", "random-locations", "null")}
        if kind is not None and kind not in allowed[name]:
            raise ConfigError(f"[{name}] kind must be one of {allowed[name]}, got {kind!r}")
    return RunConfig(det, sections["graph"], sections["stream"], sections["output"])


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)


def format_config(cfg: RunConfig) -> str:
    lines = ["[detector]"]
    inverse = {v: k for k, v in _DETECTOR_KEYS.items()}
    for f in fields(DetectorConfig):
        lines.append(f"{inverse[f.name]} = {_fmt(getattr(cfg.detector, f.name))}")
    for name in ("graph", "stream", "output"):
        section = getattr(cfg, name)
        if section:
            lines.append("")
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {_fmt(v)}" for k, v in section.items())
    return "\n".join(lines) + "\n"


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(format_config(cfg))


# -- stream CSV ----------------------------------------------------------------

_COLUMN = re.compile(r"^v(\d+)_d(\d+)$")


def stream_header(dims) -> list[str]:
    return ["t"] + [f"v{v}_d{j}" for v, d in enumerate(dims) for j in range(d)]


def write_stream(path, streams, times=None) -> None:
    """Write per-node arrays ``(T, d_v)`` as a stream CSV."""
    streams = [np.atleast_2d(np.asarray(s, dtype=float).T).T for s in streams]
    n = streams[0].shape[0]
    times = np.arange(1, n + 1) if times is None else np.asarray(times)
    block = np.hstack(streams)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(stream_header([s.shape[1] for s in streams]))
        for t, row in zip(times, block):
            w.writerow([int(t)] + [repr(float(x)) for x in row])


def _schema(header, path) -> list[int]:
    if not header or header[0].strip() != "t":
        raise DataError(f"{path}: header must start with 't'")
    dims: list[int] = []
    for col in header[1:]:
        m = _COLUMN.match(col.strip())
        if not m:
            raise DataError(f"{path}: bad column name {col!r}, expected v<node>_d<dim>")
        v, j = int(m.group(1)), int(m.group(2))
        if v == len(dims) and j == 0:
            dims.append(1)
        elif v == len(dims) - 1 and j == dims[-1]:
            dims[-1] += 1
        else:
            raise DataError(f"{path}: column {col!r} out of order")
    if not dims:
        raise DataError(f"{path}: no node columns")
    return dims


def ingest_stream(path) -> tuple[list[np.ndarray], list[int], np.ndarray]:
    """Read a stream CSV; returns per-node arrays ``(T, d_v)``, the dimension schema and the times."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read stream {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        dims = _schema(header, path)
        width = 1 + sum(dims)
        times, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DataError(f"{path}:{lineno}: expected {width} cells, got {len(row)}")
            try:
                t = int(row[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: time {row[0]!r} is not an integer") from None
            if times and t <= times[-1]:
                raise DataError(f"{path}:{lineno}: time {t} does not increase")
            values = []
            for cell in row[1:]:
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"{path}:{lineno}: missing value")
                try:
                    x = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric cell {cell!r}") from None
                if not math.isfinite(x):
                    raise DataError(f"{path}:{lineno}: non-finite cell {cell!r}")
                values.append(x)
            times.append(t)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    block = np.array(rows)
    bounds = np.concatenate([[0], np.cumsum(dims)])
    streams = [block[:, bounds[v]:bounds[v + 1]].copy() for v in range(len(dims))]
    return streams, dims, np.array(times, dtype=np.int64)


def ar1_filter(streams, fit_length: int) -> list[np.ndarray]:
    """Residuals ``y_t - phi y_{t-1}`` per channel, ``phi`` fit by least squares on the first ``fit_length`` rows.

    The first row is kept as is.
    """
    if fit_length < 2:
        raise ValueError("need at least two rows to fit the AR(1) coefficient")
    out = []
    for s in streams:
        s = np.asarray(s, dtype=float)
        prev, cur = s[: fit_length - 1], s[1:fit_length]
        denom = np.sum(prev * prev, axis=0)
        phi = np.divide(np.sum(prev * cur, axis=0), denom, out=np.zeros(s.shape[1]), where=denom > 0)
        res = s.copy()
        res[1:] = s[1:] - phi * s[:-1]
        out.append(res)
    return out


# -- ground truth ----------------------------------------------------------------

def write_truth(path, tau, changed) -> None:
    lines = []
    if tau is not None:
        lines.append(f"tau={int(tau)}")
    lines.append("changed=" + ",".join(str(int(v)) for v in changed))
    Path(path).write_text("\n".join(lines) + "\n")


def read_truth(path) -> tuple[int | None, list[int]]:
    tau, changed = None, []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read ground truth {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        try:
            if sep and key.strip() == "tau":
                tau = int(value)
            elif sep and key.strip() == "changed":
                changed = [int(x) for x in value.split(",") if x.strip()]
            else:
                raise ValueError
        except ValueError:
            raise DataError(f"{path}:{lineno}: cannot parse {line!r}") from None
    return tau, changed


# -- outputs ---------------------------------------------------------------------

def write_trace(path, result: DetectionResult, squared: bool = False) -> None:
    """One row per scored step: ``t,||g||,eps_t,alarm,g_1..g_N``.

    With ``squared`` the per-node columns hold ``g_v^2`` instead.
    """
    n = result.scores.shape[1] if result.scores.ndim == 2 else 0
    prefix = "g2_" if squared else "g_"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "||g||", "eps_t", "alarm"] + [f"{prefix}{v + 1}" for v in range(n)])
        for i, t in enumerate(result.times):
            g = result.scores[i] ** 2 if squared else result.scores[i]
            w.writerow([int(t), repr(float(result.score_norms[i])), repr(float(result.thresholds[i])),
                        int(bool(result.alarm_flags[i]))] + [repr(float(x)) for x in g])


def read_trace(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(header)))
    return {
        "t": data[:, 0].astype(int), "norm": data[:, 1], "eps": data[:, 2],
        "alarm": data[:, 3].astype(bool), "scores": data[:, 4:], "header": header,
    }


def write_summary(path, result: DetectionResult, extra: dict | None = None) -> None:
    lines = [
        f"detected={'true' if result.detected else 'false'}",
        f"tau_hat={'' if result.tau_hat is None else result.tau_hat}",
        "alarms=" + ",".join(str(a) for a in result.alarms),
        f"scored_steps={len(result.times)}",
        "dictionary_sizes=" + ",".join(str(s) for s in result.dictionary_sizes),
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_summary(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return out
