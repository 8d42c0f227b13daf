# hybridq/services/documents.py
"""
Flat key=value run documents.

    mode=semiclassical
    delta_c=70000        # MHz
    omega_coll=40
    delta_width=60
    r=2                  # or eta=...
    n_spins=10000
    n_classes=200

Parsed with python-dotenv (comments, quotes, `export` prefixes all allowed),
validated through the pydantic models, serialized back with repr floats so
parse_config(serialize_config(c)) == c.
"""
import hashlib
import io
import logging
import math
import re
from typing import Any, Dict, List, Optional, Tuple

from dotenv import dotenv_values
from pydantic import ValidationError

from hybridq.core.enums import RunModeEnum
from hybridq.core.errors import ConfigError
from hybridq.model import INSTABILITY_MESSAGE, SystemParams, drive_for_r
from hybridq.models import PropagatorConfig, RunConfig

log = logging.getLogger(__name__)

PARAM_KEYS = tuple(SystemParams.model_fields)
PROPAGATOR_KEYS = tuple(PropagatorConfig.model_fields)
RUN_KEYS = tuple(k for k in RunConfig.model_fields if k not in ("params", "propagator"))
LIST_KEYS = ("r_values", "delta_values")
INT_KEYS = (
    "n_spins", "n_classes", "n_spins_quantum", "fock_cutoff", "max_rank", "krylov_dim",
    "save_rho_every", "wigner_resolution", "workers", "seed",
)
EXTRA_KEYS = ("r",)
KNOWN_KEYS = set(PARAM_KEYS) | set(PROPAGATOR_KEYS) | set(RUN_KEYS) | set(EXTRA_KEYS)
REQUIRED_KEYS = ("mode", "delta_c", "omega_coll", "delta_width")
MEAN_FIELD_MODES = (RunModeEnum.SEMICLASSICAL, RunModeEnum.SWEEP)

_KEY_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*(=|$)")


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _key_lines(text: str) -> Dict[str, int]:
    lines: Dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        m = _KEY_LINE.match(raw)
        if m and not raw.lstrip().startswith("#"):
            lines[m.group(1).lower()] = no
    return lines


def _coerce(key: str, value: str, line: Optional[int]) -> Any:
    value = value.strip()
    if value == "":
        return None
    try:
        if key in LIST_KEYS:
            return [float(tok) for tok in value.replace(";", ",").split(",") if tok.strip()]
        if key in INT_KEYS:
            number = float(value)
            if not number.is_integer():
                raise ValueError(f"{value!r} is not an integer")
            return int(number)
    except ValueError as e:
        raise ConfigError(f"cannot read value {value!r}: {e}", key=key, line=line) from e
    return value


def _float(raw: Dict[str, Any], key: str, lines: Dict[str, int]) -> float:
    try:
        return float(raw[key])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"expected a number, got {raw[key]!r}", key=key, line=lines.get(key)) from e


def _locate(loc: Tuple[Any, ...]) -> Optional[str]:
    names = [str(p) for p in loc if isinstance(p, str)]
    return names[-1] if names else None


def parse_config(text: str) -> RunConfig:
    """Validate a run document; every failure is a ConfigError naming key and line."""
    lines = _key_lines(text)
    values = dotenv_values(stream=io.StringIO(text), interpolate=False)

    raw: Dict[str, Any] = {}
    for key, value in values.items():
        k = key.strip().lower()
        line = lines.get(k)
        if k not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=k, line=line)
        if value is None:
            raise ConfigError("expected key=value", key=k, line=line)
        coerced = _coerce(k, value, line)
        if coerced is not None:
            raw[k] = coerced

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}", key=missing[0])
    try:
        mode = RunModeEnum(str(raw["mode"]).strip().lower())
    except ValueError as e:
        choices = ", ".join(m.value for m in RunModeEnum)
        raise ConfigError(f"mode must be one of {choices}", key="mode", line=lines.get("mode")) from e
    raw["mode"] = mode
    if mode in MEAN_FIELD_MODES and "n_spins" not in raw:
        raise ConfigError(f"{mode.value} mode requires n_spins", key="n_spins")

    delta_c = _float(raw, "delta_c", lines)
    if "r" in raw:
        r = _float(raw, "r", lines)
        if delta_c <= 0:
            raise ConfigError("delta_c must be positive", key="delta_c", line=lines.get("delta_c"))
        eta_r = drive_for_r(r, delta_c)
        if "eta" in raw and not math.isclose(_float(raw, "eta", lines), eta_r, rel_tol=1e-12, abs_tol=1e-12):
            raise ConfigError(f"eta={raw['eta']} disagrees with r={r} (eta = delta_c tanh 2r = {eta_r!r})",
                              key="r", line=lines.get("r"))
        raw["eta"] = repr(eta_r)
        del raw["r"]
    if "eta" in raw and abs(_float(raw, "eta", lines)) >= delta_c:
        key = "eta" if "eta" in lines else "r"
        raise ConfigError(INSTABILITY_MESSAGE, key=key, line=lines.get(key))
    if mode is RunModeEnum.SWEEP and not raw.get("r_values"):
        raise ConfigError("sweep mode needs a non-empty r_values list", key="r_values", line=lines.get("r_values"))

    params = {k: raw[k] for k in PARAM_KEYS if k in raw}
    propagator = {k: raw[k] for k in PROPAGATOR_KEYS if k in raw}
    run = {k: raw[k] for k in RUN_KEYS if k in raw}
    try:
        return RunConfig(**run, params=params, propagator=propagator)
    except ValidationError as e:
        first = e.errors()[0]
        key = _locate(first["loc"])
        raise ConfigError(first["msg"], key=key, line=lines.get(key) if key else None) from e


def _format(value: Any) -> str:
    if hasattr(value, "value"):          # enums
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return '"' + ",".join(repr(float(v)) for v in value) + '"'
    text = str(value).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{text}"'


def serialize_config(config: RunConfig) -> str:
    """Inverse of parse_config: one key=value line per non-empty field."""
    out: List[str] = []
    blocks = (
        (RUN_KEYS[:1], config),
        (PARAM_KEYS, config.params),
        (RUN_KEYS[1:], config),
        (PROPAGATOR_KEYS, config.propagator),
    )
    for keys, model in blocks:
        for key in keys:
            value = getattr(model, key)
            if value is None or (key in LIST_KEYS and not value):
                continue
            out.append(f"{key}={_format(value)}")
    return "\n".join(out) + "\n"


def schema() -> List[Dict[str, str]]:
    """key, type, default, description for every accepted key."""
    rows: List[Dict[str, str]] = []
    for model, keys in ((SystemParams, PARAM_KEYS), (RunConfig, RUN_KEYS), (PropagatorConfig, PROPAGATOR_KEYS)):
        for key in keys:
            info = model.model_fields[key]
            default = "required" if info.is_required() else (
                "[]" if info.default_factory is not None else repr(getattr(info.default, "value", info.default))
            )
            rows.append({
                "key": key,
                "type": getattr(info.annotation, "__name__", str(info.annotation)).replace("typing.", ""),
                "default": default,
                "description": info.description or "",
            })
        if model is SystemParams:
            rows.append({
                "key": "r",
                "type": "float",
                "default": "None",
                "description": "Squeezing parameter; sets eta = delta_c tanh(2r)",
            })
    return rows
