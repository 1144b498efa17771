"""Reader and printer for the ``[section]`` / ``key = value`` run configuration."""

import re
import typing
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError as PydanticValidationError

from chgsim.core.exceptions import ConfigError
from chgsim.core.logger import logger
from chgsim.models import BuiltinRef, RunConfig
from chgsim.services.coefficients import SCALAR_FIELDS, VECTOR_FIELDS
from chgsim.services.sources import BOUNDARY_SOURCES, INITIAL_CONDITIONS, SOURCES

SECTION_RE = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]$")
KEY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
BUILTIN_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)$")
INT_RE = re.compile(r"^[+-]?\d+$")

# registries each built-in key resolves against
REGISTRIES: Dict[Tuple[str, str], Tuple[str, Sequence[str]]] = {
    ("coefficients", "a"): ("vector field", tuple(VECTOR_FIELDS)),
    ("coefficients", "c"): ("vector field", tuple(VECTOR_FIELDS)),
    ("coefficients", "b"): ("scalar field", tuple(SCALAR_FIELDS)),
    ("initial", "psi0"): ("initial condition", tuple(INITIAL_CONDITIONS)),
    ("data", "f"): ("source", tuple(SOURCES) + ("manufactured",)),
    ("data", "g"): ("source", tuple(SOURCES) + ("manufactured",)),
    ("data", "h1"): ("boundary source", tuple(BOUNDARY_SOURCES) + ("manufactured",)),
    ("data", "h2"): ("boundary source", tuple(BOUNDARY_SOURCES) + ("manufactured",)),
    ("extend", "vector"): ("vector field", tuple(VECTOR_FIELDS)),
    ("extend", "scalar"): ("scalar field", tuple(SCALAR_FIELDS)),
}


def _section_models() -> Dict[str, type]:
    models = {}
    for name, info in RunConfig.model_fields.items():
        annotation = info.annotation
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        models[name] = args[0] if args else annotation
    return models


SECTION_MODELS = _section_models()


def _is_list_field(model: type, key: str) -> bool:
    annotation = model.model_fields[key].annotation
    candidates = [annotation] + list(typing.get_args(annotation))
    return any(typing.get_origin(a) in (list, List) for a in candidates)


# =====================================
# VALUES
# =====================================


def _split_top_level(text: str) -> List[str]:
    parts, depth, current = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    parts.append("".join(current).strip())
    return parts


def parse_scalar(token: str) -> Any:
    """true/false, integer, real, or a bare word."""
    token = token.strip()
    if token in ("true", "false"):
        return token == "true"
    if INT_RE.match(token):
        return int(token)
    try:
        return float(token)
    except ValueError:
        return token


def _parse_param(token: str) -> Any:
    token = token.strip()
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        return [parse_scalar(t) for t in _split_top_level(inner)] if inner else []
    return parse_scalar(token)


def parse_value(text: str) -> Any:
    """
    Parse the right-hand side of ``key = value``.

    Returns:
        A scalar, a list for comma lists, or a dict ``{"name", "params"}`` for
        ``name(key=value, ...)``
    """
    text = text.strip()
    match = BUILTIN_RE.match(text)
    if match:
        params: Dict[str, Any] = {}
        body = match.group(2).strip()
        if body:
            for part in _split_top_level(body):
                if "=" not in part:
                    raise ValueError(f"built-in parameter '{part}' needs the form key=value")
                key, raw = part.split("=", 1)
                params[key.strip()] = _parse_param(raw)
        return {"name": match.group(1), "params": params}
    if "," in text:
        return [parse_scalar(t) for t in _split_top_level(text)]
    return parse_scalar(text)


def _as_builtin(value: Any) -> Any:
    if isinstance(value, dict):
        return value
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return {"name": "constant", "params": {"value": value}}
    if isinstance(value, list):
        return {"name": "constant", "params": {"values": value}}
    return {"name": str(value), "params": {}}


# =====================================
# PARSER
# =====================================


def _pydantic_errors(exc: PydanticValidationError, lines: Dict[Tuple[str, ...], int]) -> List[Dict[str, Any]]:
    errors = []
    for err in exc.errors():
        loc = tuple(str(part) for part in err["loc"])
        line = lines.get(loc[:2]) or lines.get(loc[:1])
        message = err["msg"]
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]
        errors.append({"line": line, "key": ".".join(loc), "message": message})
    return errors


def parse_config(text: str, required: Sequence[str] = ()) -> RunConfig:
    """
    Parse and validate a run configuration.

    Args:
        text: configuration text
        required: sections that must be present (e.g. ``("grid", "time")``)

    Returns:
        RunConfig with defaults filled

    Raises:
        ConfigError: listing every problem with its line number
    """
    data: Dict[str, Dict[str, Any]] = {}
    lines: Dict[Tuple[str, ...], int] = {}
    errors: List[Dict[str, Any]] = []
    section: Optional[str] = None
    skipping = False

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = SECTION_RE.match(line)
        if header:
            section = header.group(1)
            skipping = section not in SECTION_MODELS
            if skipping:
                errors.append({"line": number, "key": section, "message": f"unknown section [{section}]"})
                section = None
                continue
            if section in data:
                errors.append({"line": number, "key": section, "message": f"duplicate section [{section}]"})
            data.setdefault(section, {})
            lines[(section,)] = number
            continue

        entry = KEY_RE.match(line)
        if entry is None:
            errors.append({"line": number, "key": "", "message": f"expected 'key = value', got '{line}'"})
            continue
        if section is None:
            if not skipping:
                errors.append({"line": number, "key": entry.group(1), "message": "key before any section"})
            continue

        key, raw_value = entry.group(1), entry.group(2)
        model = SECTION_MODELS[section]
        if key not in model.model_fields:
            errors.append({"line": number, "key": f"{section}.{key}",
                           "message": f"unknown key '{key}' in [{section}]"})
            continue
        if key in data[section]:
            errors.append({"line": number, "key": f"{section}.{key}", "message": "duplicate key"})
            continue
        try:
            value = parse_value(raw_value)
        except ValueError as exc:
            errors.append({"line": number, "key": f"{section}.{key}", "message": str(exc)})
            continue

        if (section, key) in REGISTRIES:
            value = _as_builtin(value)
            registry, names = REGISTRIES[(section, key)]
            if isinstance(value, dict) and value["name"] not in names:
                errors.append({
                    "line": number,
                    "key": f"{section}.{key}",
                    "message": f"unknown {registry} built-in '{value['name']}' "
                               f"(registry {registry}: {', '.join(sorted(names))})",
                })
                continue
        elif _is_list_field(model, key) and not isinstance(value, list):
            value = [value]
        data[section][key] = value
        lines[(section, key)] = number

    for name in required:
        if name not in data:
            errors.append({"line": None, "key": name, "message": f"missing mandatory section [{name}]"})

    if errors:
        raise ConfigError("invalid configuration", errors)

    try:
        config = RunConfig.model_validate(data)
    except PydanticValidationError as exc:
        raise ConfigError("invalid configuration", _pydantic_errors(exc, lines)) from exc

    logger.debug("Parsed configuration", sections=sorted(data))
    return config


# =====================================
# PRINTER
# =====================================


def format_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _format_param(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(format_scalar(v) for v in value) + "]"
    return format_scalar(value)


def format_builtin(ref: BuiltinRef) -> str:
    if not ref.params:
        return ref.name
    args = ", ".join(f"{key}={_format_param(value)}" for key, value in ref.params.items())
    return f"{ref.name}({args})"


def format_value(value: Any) -> str:
    if isinstance(value, BuiltinRef):
        return format_builtin(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(format_scalar(v) for v in value)
    return format_scalar(value)


def format_config(config: RunConfig) -> str:
    """Print a RunConfig in the grammar read by ``parse_config``."""
    blocks = []
    for name in RunConfig.model_fields:
        block = getattr(config, name)
        if block is None:
            continue
        lines = [f"[{name}]"]
        for key in type(block).model_fields:
            value = getattr(block, key)
            if value is None:
                continue
            lines.append(f"{key} = {format_value(value)}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# =====================================
# SWEEP PATHS
# =====================================


def set_path(config: RunConfig, path: str, value: Any) -> RunConfig:
    """
    Copy of config with one entry replaced.

    Paths are ``section.key``, ``section.key.param`` for a built-in parameter,
    or ``coefficients.omega`` which sets omega on both a and c.

    Raises:
        ConfigError: unknown path or a value the section rejects
    """
    parts = path.split(".")
    data = config.model_dump()

    def fail(message: str) -> ConfigError:
        return ConfigError(f"invalid sweep parameter '{path}'", [{"key": path, "message": message}])

    if len(parts) < 2 or parts[0] not in SECTION_MODELS:
        raise fail("expected section.key or section.key.param")
    section = parts[0]
    if data.get(section) is None:
        data[section] = {}

    if path == "coefficients.omega":
        targets = [k for k in ("a", "c") if data[section].get(k) and "omega" in data[section][k]["params"]]
        if not targets:
            raise fail("neither coefficients.a nor coefficients.c has an omega parameter")
        for key in targets:
            data[section][key]["params"]["omega"] = value
    elif len(parts) == 2:
        if parts[1] not in SECTION_MODELS[section].model_fields:
            raise fail(f"unknown key '{parts[1]}' in [{section}]")
        data[section][parts[1]] = value
    elif len(parts) == 3:
        ref = data[section].get(parts[1])
        if not isinstance(ref, dict) or "params" not in ref:
            raise fail(f"{section}.{parts[1]} is not a built-in reference")
        ref["params"][parts[2]] = value
    else:
        raise fail("too many path components")

    try:
        return RunConfig.model_validate(data)
    except PydanticValidationError as exc:
        raise ConfigError(f"invalid sweep value for '{path}'", _pydantic_errors(exc, {})) from exc
