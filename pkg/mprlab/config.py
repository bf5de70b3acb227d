"""Scenario configuration: INI grammar, typed parameters and up-front validation.

A config file holds an optional ``[global]`` section (``seed``, ``out``), an
optional ``[timing]`` section overriding :class:`~mprlab.params.FrameTiming`
fields, and one section per scenario. A scenario section is named after its
kind, optionally followed by a dot and a label (``[scaling.basic]``)::

    [global]
    seed = 7

    [scaling.basic]
    mode = basic
    M = 1..10

Keys are case-insensitive. Every parameter is converted and checked against
the preconditions of the operation it feeds before anything runs.
"""
from __future__ import annotations

import configparser
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from .errors import ConfigError, DomainError
from .params import AccessMode, BackoffParams, FrameTiming, MacTimingParams, NetworkParams
from .phy import ALPHABETS
from .success import success_model
from .utils import parse_bool, parse_list, parse_number, sanitize_id

log = logging.getLogger(__name__)

DEFAULT_SEED = 1
DEFAULT_OUT = "results"

KINDS = (
    "scaling",
    "fixed-point",
    "optimal-r",
    "beb-efficiency",
    "simulate",
    "simo-compare",
    "phy-demo",
    "r-sweep",
    "throughput-vs-n",
)
DETECTORS = ("zf", "mmse", "exhaustive", "ilsp")


def default_table1() -> Tuple[MacTimingParams, NetworkParams]:
    """802.11g timing and the N=50, M=1 network used by default."""
    table = FrameTiming()
    return table.mac_timing(), table.network()


# ---------------------------------------------------------------------------
# Value converters
# ---------------------------------------------------------------------------

def _int(text: str) -> int:
    value = parse_number(text)
    if not isinstance(value, int):
        raise ValueError(f"not an integer: {text!r}")
    return value


def _ints(text: str) -> List[int]:
    return [_int(str(v)) for v in parse_list(text)]


def _reals(text: str) -> List[float]:
    return [float(v) for v in parse_list(text)]


def _modes(text: str) -> List[AccessMode]:
    return [AccessMode.parse(part) for part in text.split(",") if part.strip()]


def _strs(text: str) -> List[str]:
    return [part.strip().lower() for part in text.split(",") if part.strip()]


CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "int": _int,
    "real": lambda s: float(parse_number(s)),
    "bool": parse_bool,
    "str": lambda s: s.strip().lower(),
    "ints": _ints,
    "reals": _reals,
    "mode": AccessMode.parse,
    "modes": _modes,
    "strs": _strs,
}

_SUCCESS = {"success": ("str", "ideal"), "epsilon": ("real", "0"), "spread": ("real", "0.1")}
_SIM = {"warmup": ("int", "100000"), "measure": ("int", "1000000")}

# kind -> key -> (type, default text)
SCHEMAS: Dict[str, Dict[str, Tuple[str, str]]] = {
    "scaling": {
        "mode": ("mode", "aloha"),
        "m": ("ints", "1..10"),
        "finite_n": ("int", "0"),
        "mpr_frames": ("bool", "false"),
        **_SUCCESS,
    },
    "fixed-point": {
        "n": ("ints", "50"),
        "m": ("ints", "1"),
        "r": ("reals", "2"),
        "w0": ("ints", "16"),
        "mode": ("mode", "aloha"),
        "simulate": ("bool", "true"),
        **_SIM,
        **_SUCCESS,
    },
    "optimal-r": {
        "mode": ("modes", "aloha"),
        "m": ("ints", "1..10"),
        "r_max": ("real", "64"),
        "mpr_frames": ("bool", "false"),
        **_SUCCESS,
    },
    "simulate": {
        "n": ("ints", "50"),
        "m": ("ints", "1"),
        "r": ("reals", "2"),
        "w0": ("ints", "16"),
        "mode": ("modes", "aloha,basic,rts-cts"),
        **_SIM,
        **_SUCCESS,
    },
    "simo-compare": {
        "m": ("ints", "1..10"),
        "mode": ("mode", "aloha"),
        "log_base": ("real", "2"),
        "bandwidth": ("real", "1"),
    },
    "phy-demo": {
        "detector": ("strs", "zf,mmse"),
        "k": ("ints", "2"),
        "m_ant": ("ints", "4"),
        "snr_db": ("reals", "30"),
        "n_sym": ("int", "200"),
        "trials": ("int", "50"),
        "alphabet": ("str", "bpsk"),
        "max_iter": ("int", "100"),
        "restarts": ("int", "8"),
    },
    "r-sweep": {
        "mode": ("modes", "aloha"),
        "m": ("ints", "1,2,4,8"),
        "r": ("reals", "1.1,1.25,1.5,1.75,2,2.5,3,4,6,8,12,16"),
        **_SUCCESS,
    },
    "throughput-vs-n": {
        "n": ("ints", "10,20,50,100,200,500,1000"),
        "m": ("ints", "1"),
        "r": ("reals", "2"),
        "w0": ("ints", "16,32"),
        "mode": ("modes", "aloha"),
        **_SUCCESS,
    },
}
SCHEMAS["beb-efficiency"] = dict(SCHEMAS["optimal-r"])


@dataclass(frozen=True)
class Scenario:
    """One runnable scenario: a kind, typed parameters and where its CSV goes."""

    kind: str
    params: Mapping[str, Any]
    output_path: Optional[Path] = None
    name: str = ""
    seed: int = DEFAULT_SEED
    timing: FrameTiming = field(default_factory=FrameTiming)

    @property
    def label(self) -> str:
        return self.name or self.kind

    def resolved(self) -> Dict[str, Any]:
        """JSON-ready record of everything that determines the output."""
        params = {}
        for key, value in self.params.items():
            if isinstance(value, AccessMode):
                value = value.value
            elif isinstance(value, list):
                value = [v.value if isinstance(v, AccessMode) else v for v in value]
            params[key] = value
        return {
            "kind": self.kind,
            "name": self.label,
            "params": params,
            "seed": self.seed,
            "timing": asdict(self.timing),
        }


@dataclass(frozen=True)
class ConfigFile:
    scenarios: List[Scenario]
    seed: int = DEFAULT_SEED
    out: str = DEFAULT_OUT


# ---------------------------------------------------------------------------
# Building scenarios
# ---------------------------------------------------------------------------

def split_section(section: str) -> Tuple[str, str]:
    kind, _, label = section.strip().lower().partition(".")
    return kind, label


def parse_params(kind: str, raw: Mapping[str, str], where: str = "") -> Dict[str, Any]:
    """Typed parameters for a kind, defaults filled in."""
    if kind not in SCHEMAS:
        raise ConfigError(f"{where}unknown scenario kind {kind!r} (expected one of {', '.join(KINDS)})")
    schema = SCHEMAS[kind]
    raw = {k.strip().lower(): v for k, v in raw.items()}
    unknown = sorted(set(raw) - set(schema) - {"output"})
    if unknown:
        raise ConfigError(f"{where}unknown key(s) for {kind}: {', '.join(unknown)}")

    params: Dict[str, Any] = {}
    for key, (typ, default) in schema.items():
        text = raw.get(key, default)
        try:
            params[key] = CONVERTERS[typ](str(text))
        except DomainError as exc:
            raise ConfigError(f"{where}{key}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"{where}{key} = {text!r}: {exc}") from exc
    return params


def parse_timing(raw: Mapping[str, str], where: str = "[timing] ") -> FrameTiming:
    names = {f.name: f.type for f in fields(FrameTiming)}
    kwargs: Dict[str, Any] = {}
    for key, text in raw.items():
        key = key.strip().lower()
        if key not in names:
            raise ConfigError(f"{where}unknown timing key {key!r}")
        try:
            value = parse_number(text)
        except ValueError as exc:
            raise ConfigError(f"{where}{key} = {text!r}: {exc}") from exc
        kwargs[key] = int(value) if names[key] in ("int", int) else float(value)
    try:
        return FrameTiming(**kwargs)
    except DomainError as exc:
        raise ConfigError(f"{where}{exc}") from exc


def _check(cond: bool, condition: str, detail: str = "") -> None:
    if not cond:
        raise DomainError(condition, detail)


def validate(s: Scenario) -> None:
    """Check every precondition the scenario's operations will rely on.

    Raises ConfigError naming the violated condition.
    """
    p = s.params
    try:
        for M in p.get("m", []):
            _check(M >= 1, "M >= 1", f"M = {M}")
        for N in p.get("n", []):
            _check(N >= 1, "N >= 1", f"N = {N}")
        for r in p.get("r", []):
            _check(r > 1, "r > 1", f"r = {r}")
        for w0 in p.get("w0", []):
            _check(w0 >= 2, "w0 >= 2", f"w0 = {w0}")
        for r in p.get("r", [2.0]):
            for w0 in p.get("w0", [16]):
                BackoffParams(r=r, w0=w0)
        if "success" in p:
            success_model(p["success"], p["epsilon"], p["spread"])
        if "warmup" in p:
            _check(p["warmup"] >= 0, "warmup_slots >= 0", f"warmup = {p['warmup']}")
            _check(p["measure"] >= 1, "measure_slots >= 1", f"measure = {p['measure']}")
        if "r_max" in p:
            _check(p["r_max"] > 1, "r_max > 1", f"r_max = {p['r_max']}")
        if "log_base" in p:
            _check(p["log_base"] > 1, "log_base > 1", f"log_base = {p['log_base']}")

        if s.kind == "scaling":
            _check(max(p["m"]) >= 2, "M_max >= 2", f"M = {p['m']}")
            if p["finite_n"]:
                _check(max(p["m"]) <= p["finite_n"], "M_max <= N", f"M = {max(p['m'])}, N = {p['finite_n']}")
        if s.kind in ("fixed-point", "simulate", "throughput-vs-n"):
            for N in p["n"]:
                _check(N >= 2 or s.kind == "simulate", "N >= 2", f"N = {N}")
        if s.kind == "phy-demo":
            _validate_phy(p)
    except DomainError as exc:
        raise ConfigError(f"[{s.label}] {exc}") from exc


def _validate_phy(p: Mapping[str, Any]) -> None:
    for det in p["detector"]:
        _check(det in DETECTORS, "detector in {zf, mmse, exhaustive, ilsp}", f"got {det!r}")
    _check(p["alphabet"] in ALPHABETS, "alphabet in {bpsk, qpsk}", f"got {p['alphabet']!r}")
    _check(p["n_sym"] >= 1, "N_sym >= 1", f"N_sym = {p['n_sym']}")
    _check(p["trials"] >= 1, "trials >= 1", f"trials = {p['trials']}")
    _check(p["max_iter"] >= 1 and p["restarts"] >= 1, "max_iter >= 1 and restarts >= 1")
    size = len(ALPHABETS[p["alphabet"]].symbols)
    for K in p["k"]:
        _check(K >= 1, "K >= 1", f"K = {K}")
        for M_ant in p["m_ant"]:
            _check(K <= M_ant, "K <= M_ant", f"K = {K}, M_ant = {M_ant}")
        if "exhaustive" in p["detector"]:
            _check(
                size ** (K * p["n_sym"]) <= 2 ** 24,
                "|alphabet|^(K*N_sym) <= 16777216",
                f"{size}^{K * p['n_sym']} candidates",
            )


def output_path_for(kind: str, name: str, out: Optional[str], explicit: Optional[str] = None) -> Optional[Path]:
    """Where a scenario's CSV goes; None means stdout (``out = -``)."""
    if explicit:
        return Path(explicit)
    if out in (None, "-"):
        return None
    if str(out).endswith(".csv"):
        return Path(out)
    return Path(out) / f"{sanitize_id(kind + ('-' + name if name else ''))}.csv"


def make_scenario(
    kind: str,
    raw: Mapping[str, str],
    *,
    name: str = "",
    seed: int = DEFAULT_SEED,
    out: Optional[str] = DEFAULT_OUT,
    timing: Optional[FrameTiming] = None,
) -> Scenario:
    """Build and validate a scenario from raw key/value text."""
    where = f"[{kind}{'.' + name if name else ''}] "
    params = parse_params(kind, raw, where)
    path = output_path_for(kind, name, out, {k.lower(): v for k, v in raw.items()}.get("output"))
    scenario = Scenario(
        kind=kind, params=params, output_path=path, name=name, seed=seed, timing=timing or FrameTiming()
    )
    validate(scenario)
    return scenario


def load_config(
    path: Path,
    *,
    seed: Optional[int] = None,
    out: Optional[str] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> ConfigFile:
    """Read a config file; ``seed``/``out``/``overrides`` from the command line win over the file."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    glob = dict(parser["global"]) if parser.has_section("global") else {}
    unknown = sorted(set(glob) - {"seed", "out"})
    if unknown:
        raise ConfigError(f"[global] unknown key(s): {', '.join(unknown)}")
    try:
        file_seed = _int(glob["seed"]) if "seed" in glob else DEFAULT_SEED
    except ValueError as exc:
        raise ConfigError(f"[global] seed = {glob['seed']!r}: {exc}") from exc
    seed = file_seed if seed is None else seed
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"[global] precondition '0 <= seed < 2**64' violated (seed = {seed})")
    out = out if out is not None else glob.get("out", DEFAULT_OUT)
    timing = parse_timing(parser["timing"]) if parser.has_section("timing") else FrameTiming()

    # an override lands only in sections whose kind has that key
    pending = {k.strip().lower(): v for k, v in (overrides or {}).items()}
    used = set()
    scenarios = []
    for section in parser.sections():
        if section.lower() in ("global", "timing"):
            continue
        kind, label = split_section(section)
        applies = {k: v for k, v in pending.items() if k in SCHEMAS.get(kind, {})}
        used.update(applies)
        raw = {**dict(parser[section]), **applies}
        scenarios.append(make_scenario(kind, raw, name=label, seed=seed, out=out, timing=timing))
    if not scenarios:
        raise ConfigError(f"{path}: no scenario sections")
    unused = sorted(set(pending) - used)
    if unused:
        raise ConfigError(f"unknown override(s) for this config: {', '.join(unused)}")
    targets = [s.output_path for s in scenarios if s.output_path is not None]
    if len(set(targets)) != len(targets):
        raise ConfigError(f"{path}: several scenarios write the same file; set out to a directory")
    log.info("loaded %d scenario(s) from %s", len(scenarios), path)
    return ConfigFile(scenarios=scenarios, seed=seed, out=out)


__all__ = [
    "KINDS",
    "DETECTORS",
    "SCHEMAS",
    "Scenario",
    "ConfigFile",
    "default_table1",
    "parse_params",
    "parse_timing",
    "validate",
    "make_scenario",
    "output_path_for",
    "load_config",
    "split_section",
]
