"""Run configuration: a sectioned INI file with units in the key names.

Example::

    [kernel]
    family = uniform
    a_length = 1.0

    [model]
    d_rate = 1.0
    mu_rate = 1.0
    h0_length = 1.0

Every key has a default; :func:`parse_config` reports all problems at once.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

from .errors import NlfrontError, ParseError, ValidationError
from .free_boundary import PROFILES, SimConfig
from .kernels import FAMILIES, Kernel, KernelSpec, make_kernel, read_tabulated_kernel
from .reactions import REACTION_FAMILIES, Reaction, ReactionSpec, make_reaction, read_tabulated_reaction

__all__ = ["SCHEMA", "RunConfig", "parse_config", "parse_text"]

# section -> key -> (type, default)
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "kernel": {
        "family": ("str", "uniform"),
        "a_length": ("float", 1.0),
        "s_length": ("float", 1.0),
        "b_length": ("float", 1.0),
        "alpha_exponent": ("float", 1.5),
        "beta_exponent": ("float", 2.0),
        "lam_tail": ("float", 0.25),
        "shift_length": ("float", 0.0),
        "samples_path": ("str", ""),
    },
    "reaction": {
        "family": ("str", "logistic"),
        "r_rate": ("float", 1.0),
        "a_coeff": ("float", 0.0),
        "samples_path": ("str", ""),
    },
    "model": {
        "d_rate": ("float", 1.0),
        "mu_rate": ("float", 1.0),
        "h0_length": ("float", 1.0),
    },
    "initial": {
        "shape": ("str", "cosine"),
        "amplitude": ("float", 1.0),
    },
    "numerics": {
        "dx_length": ("float", 0.05),
        "dt_time": ("float", 0.2),
        "T_max_time": ("float", 100.0),
        "picard_iters": ("int", 0),
        "record_every": ("int", 5),
        "max_nodes": ("int", 0),
    },
    "eigen": {
        "half_lengths": ("floats", (1.0, 2.0, 4.0, 8.0, 16.0)),
        "n_nodes": ("int", 512),
        "c_speed": ("float", 0.0),
        "method": ("str", "inverse"),
        "tol": ("float", 1e-10),
    },
    "ell_star": {
        "tol_length": ("float", 1e-4),
    },
    "mu_star": {
        "bracket_lo": ("float", 1e-3),
        "bracket_hi": ("float", 10.0),
        "tol_rel": ("float", 1e-2),
    },
    "semiwave": {
        "c_speeds": ("floats", (0.5,)),
        "X_length": ("float", 40.0),
        "n_nodes": ("int", 2561),
        "deltas": ("floats", (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)),
        "tol": ("float", 1e-10),
    },
    "speed": {
        "window_frac": ("float", 0.5),
        "c0_tol": ("float", 1e-6),
    },
    "accelerate": {
        "model": ("str", "auto"),
        "window_frac": ("float", 0.5),
        "max_nodes": ("int", 4000),
    },
    "harness": {
        "n_pairs": ("int", 20),
        "T_time": ("float", 30.0),
    },
    "output": {
        "outdir": ("str", "runs"),
        "seed": ("int", 0),
    },
}

# keys whose change invalidates a checkpoint
_SIM_SECTIONS = ("kernel", "reaction", "model", "initial", "numerics")
_RESUMABLE = {("numerics", "T_max_time")}

_KERNEL_KEYS = {
    "a_length": "a",
    "s_length": "s",
    "b_length": "b",
    "alpha_exponent": "alpha",
    "beta_exponent": "beta",
    "lam_tail": "lam",
}
_KERNEL_PARAMS = {
    "uniform": ("a",),
    "triangular": ("a",),
    "gaussian": ("s",),
    "laplace": ("b",),
    "compact_bump": ("a",),
    "power_tail": ("alpha", "lam"),
    "log_tail": ("beta", "lam"),
    "tabulated": (),
}


def _fmt(kind: str, value) -> str:
    if kind == "float":
        return repr(float(value))
    if kind == "floats":
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def _convert(kind: str, text: str):
    text = text.strip()
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    if kind == "int":
        return int(text)
    if kind == "floats":
        vals = tuple(float(t) for t in text.replace(",", " ").split())
        if not vals:
            raise ValueError("empty list")
        return vals
    return text


@dataclass
class RunConfig:
    values: Dict[str, Dict[str, object]]
    source: Optional[str] = None
    kernel: Optional[Kernel] = field(default=None, repr=False)
    reaction: Optional[Reaction] = field(default=None, repr=False)

    def __getitem__(self, section: str) -> Dict[str, object]:
        return self.values[section]

    def to_ini(self) -> str:
        """Canonical serialization; parsing it back yields the same text."""
        out: List[str] = []
        for section, keys in SCHEMA.items():
            out.append(f"[{section}]")
            for key, (kind, _) in keys.items():
                out.append(f"{key} = {_fmt(kind, self.values[section][key])}")
            out.append("")
        return "\n".join(out)

    def sim_echo(self) -> Dict[str, str]:
        """Flat ``section.key -> text`` map of everything a checkpoint depends on."""
        echo = {}
        for section in _SIM_SECTIONS:
            for key, (kind, _) in SCHEMA[section].items():
                if (section, key) not in _RESUMABLE:
                    echo[f"{section}.{key}"] = _fmt(kind, self.values[section][key])
        return echo

    def sim_config(self, **overrides) -> SimConfig:
        m, i, n = self["model"], self["initial"], self["numerics"]
        cfg = SimConfig(
            kernel=self.kernel,
            reaction=self.reaction,
            d=m["d_rate"],
            mu=m["mu_rate"],
            h0=m["h0_length"],
            dx=n["dx_length"],
            dt=n["dt_time"],
            T_max=n["T_max_time"],
            u0=i["shape"],
            u0_amplitude=i["amplitude"],
            picard_iters=n["picard_iters"],
            record_every=n["record_every"],
            max_nodes=n["max_nodes"] or None,
        )
        return replace(cfg, **overrides) if overrides else cfg


def _kernel_spec(sec, base: Path) -> KernelSpec:
    fam = sec["family"]
    params = {}
    for key, name in _KERNEL_KEYS.items():
        if name in _KERNEL_PARAMS.get(fam, ()):
            params[name] = sec[key]
    samples = None
    if fam == "tabulated":
        if not sec["samples_path"]:
            raise ValueError("tabulated kernel needs samples_path")
        samples = read_tabulated_kernel(base / sec["samples_path"])
    return KernelSpec(fam, params, shift=sec["shift_length"], samples=samples)


def _reaction_spec(sec, base: Path) -> ReactionSpec:
    fam = sec["family"]
    if fam == "logistic":
        return ReactionSpec(fam, {"r": sec["r_rate"]})
    if fam == "cubic_kpp":
        return ReactionSpec(fam, {"r": sec["r_rate"], "a": sec["a_coeff"]})
    if fam == "tabulated":
        if not sec["samples_path"]:
            raise ValueError("tabulated reaction needs samples_path")
        return ReactionSpec(fam, {}, read_tabulated_reaction(base / sec["samples_path"]))
    return ReactionSpec(fam, {})


def _validate(rc: RunConfig, base: Path) -> List[str]:
    v = rc.values
    problems: List[str] = []

    def need(cond, msg):
        if not cond:
            problems.append(msg)

    need(v["kernel"]["family"] in FAMILIES, f"kernel.family must be one of {FAMILIES}")
    need(v["reaction"]["family"] in REACTION_FAMILIES, f"reaction.family must be one of {REACTION_FAMILIES}")
    if v["kernel"]["family"] in FAMILIES:
        try:
            rc.kernel = make_kernel(_kernel_spec(v["kernel"], base))
        except (NlfrontError, ValueError, OSError) as exc:
            problems.append(f"kernel: {exc}")
    if v["reaction"]["family"] in REACTION_FAMILIES:
        try:
            rc.reaction = make_reaction(_reaction_spec(v["reaction"], base))
        except (NlfrontError, ValueError, OSError) as exc:
            problems.append(f"reaction: {exc}")
    for sec, key in (
        ("model", "d_rate"),
        ("model", "mu_rate"),
        ("model", "h0_length"),
        ("initial", "amplitude"),
        ("numerics", "dx_length"),
        ("numerics", "dt_time"),
        ("numerics", "T_max_time"),
        ("eigen", "tol"),
        ("ell_star", "tol_length"),
        ("mu_star", "bracket_lo"),
        ("mu_star", "bracket_hi"),
        ("mu_star", "tol_rel"),
        ("semiwave", "X_length"),
        ("semiwave", "tol"),
        ("speed", "c0_tol"),
        ("harness", "T_time"),
    ):
        need(v[sec][key] > 0, f"{sec}.{key} must be > 0")
    need(v["initial"]["shape"] in PROFILES, f"initial.shape must be one of {PROFILES}")
    need(v["numerics"]["picard_iters"] >= 0, "numerics.picard_iters must be >= 0")
    need(v["numerics"]["record_every"] >= 1, "numerics.record_every must be >= 1")
    need(v["numerics"]["max_nodes"] == 0 or v["numerics"]["max_nodes"] >= 16, "numerics.max_nodes must be 0 (off) or >= 16")
    need(all(x > 0 for x in v["eigen"]["half_lengths"]), "eigen.half_lengths must all be > 0")
    need(v["eigen"]["n_nodes"] >= 8, "eigen.n_nodes must be >= 8")
    need(v["eigen"]["method"] in ("inverse", "power"), "eigen.method must be 'inverse' or 'power'")
    need(all(c > 0 for c in v["semiwave"]["c_speeds"]), "semiwave.c_speeds must all be > 0")
    need(v["semiwave"]["n_nodes"] >= 8, "semiwave.n_nodes must be >= 8")
    d = v["semiwave"]["deltas"]
    need(
        len(d) >= 3 and all(0 < x < 1 for x in d) and all(b < a for a, b in zip(d, d[1:])),
        "semiwave.deltas must be >= 3 decreasing values in (0, 1)",
    )
    for sec in ("speed", "accelerate"):
        need(0 < v[sec]["window_frac"] <= 0.5, f"{sec}.window_frac must lie in (0, 0.5]")
    need(v["accelerate"]["model"] in ("auto", "power", "t_log", "exp_root"), "accelerate.model must be auto, power, t_log or exp_root")
    need(v["accelerate"]["max_nodes"] >= 16, "accelerate.max_nodes must be >= 16")
    need(v["harness"]["n_pairs"] >= 1, "harness.n_pairs must be >= 1")
    if not problems and rc.kernel is not None and rc.reaction is not None:
        try:
            rc.sim_config().validate()
        except ValidationError as exc:
            problems.extend(f"simulation: {p}" for p in exc.violations)
        except NlfrontError as exc:
            problems.append(f"simulation: {exc}")
    return problems


def parse_text(text: str, base: Path = Path("."), source: Optional[str] = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.MissingSectionHeaderError as exc:
        if exc.line.lstrip().startswith("["):
            raise ParseError(f"malformed section header {exc.line.strip()!r}", exc.lineno, 1) from exc
        raise ParseError("key outside of any [section]", exc.lineno, 1) from exc
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ParseError(str(exc).split(":")[-1].strip(), exc.lineno, 1) from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"cannot parse {line.strip()!r}", lineno, 1) from exc

    problems = []
    values = {s: {k: default for k, (_, default) in keys.items()} for s, keys in SCHEMA.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                problems.append(f"unknown key {section}.{key}")
                continue
            kind = SCHEMA[section][key][0]
            try:
                values[section][key] = _convert(kind, raw)
            except ValueError:
                problems.append(f"{section}.{key} = {raw!r} is not a valid {kind}")
    rc = RunConfig(values, source)
    problems.extend(_validate(rc, base))
    if problems:
        raise ValidationError(problems)
    return rc


def parse_config(path) -> RunConfig:
    """Read and fully validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_text(text, path.parent, str(path))
