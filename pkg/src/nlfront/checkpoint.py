"""Self-describing JSON checkpoints for free-boundary runs.

A checkpoint stores the configuration echo, the full state and the series
recorded so far, plus a SHA-256 checksum of the payload.  Floats are
written with ``repr`` precision, so a resumed run continues bitwise.
"""

from __future__ import annotations

import hashlib
import json
from typing import Mapping

import numpy as np

from .errors import ConfigDrift, CorruptCheckpoint, VersionMismatch
from .free_boundary import FrontState, TimeSeries

__all__ = ["FORMAT", "VERSION", "save_checkpoint", "load_checkpoint", "config_digest"]

FORMAT = "nlfront-checkpoint"
VERSION = 1


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_digest(echo: Mapping) -> str:
    return hashlib.sha256(_canonical(dict(echo)).encode()).hexdigest()


def save_checkpoint(path, state: FrontState, series: TimeSeries, config_echo: Mapping) -> None:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "config": dict(config_echo),
        "config_digest": config_digest(config_echo),
        "state": {
            "t": state.t,
            "g": state.g,
            "h": state.h,
            "dx": state.dx,
            "i0": int(state.i0),
            "steps": int(state.steps),
            "u": [float(v) for v in state.u],
        },
        "series": [list(map(float, r)) for r in series.rows],
    }
    payload["checksum"] = hashlib.sha256(_canonical(payload).encode()).hexdigest()
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_checkpoint(path, config_echo: Mapping):
    """Return ``(state, series)``; the stored config must match ``config_echo``.

    Raises
    ------
    CorruptCheckpoint
        Unreadable file or checksum mismatch.
    VersionMismatch
        Written by a different format version.
    ConfigDrift
        Written under a different configuration.
    """
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CorruptCheckpoint(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CorruptCheckpoint(f"{path} is not a checkpoint file")
    stored = payload.pop("checksum", None)
    if stored != hashlib.sha256(_canonical(payload).encode()).hexdigest():
        raise CorruptCheckpoint(f"checksum mismatch in {path}")
    if payload.get("version") != VERSION:
        raise VersionMismatch(f"checkpoint version {payload.get('version')} != {VERSION}")
    if payload["config_digest"] != config_digest(config_echo):
        old, new = payload["config"], dict(config_echo)
        changed = sorted(k for k in set(old) | set(new) if old.get(k) != new.get(k))
        raise ConfigDrift(f"configuration changed since the checkpoint: {', '.join(changed)}")
    s = payload["state"]
    state = FrontState(s["t"], s["g"], s["h"], s["dx"], s["i0"], np.array(s["u"], dtype=float), s["steps"])
    series = TimeSeries([tuple(r) for r in payload["series"]])
    return state, series
