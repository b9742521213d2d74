"""Plain-text model files: parse, validate, serialize.

The format is INI-style sections of key = value pairs:

    [model]
    kind = landau_zener

    [parameters]
    delta = 0.2
    slope = 1.0
    r_cross = 3.0
    ...

Supported kinds: ``landau_zener`` and ``constant_gap`` build a
:class:`~semiclab.channels.ChannelSystem`; ``cubic`` and ``harmonic``
build a :class:`~semiclab.wkb.PotentialModel`. Serialization writes the
same layout back, so load -> dump -> load is the identity on parameters.
"""

import configparser
import io
from typing import Union

from . import channels, wkb
from .errors import ParseError, ValidationError

__all__ = ["load_model", "loads_model", "dump_model", "save_model"]

_CHANNEL_KINDS = {
    "landau_zener": channels.landau_zener_system,
    "constant_gap": channels.constant_gap_system,
}

_CHANNEL_DEFAULTS = {
    "landau_zener": {
        "delta": 0.2, "slope": 1.0, "r_cross": 3.0, "saturation": 1.0,
        "mass": 1.0, "energy": 10.0, "z1z2": 0.0, "L": 0, "hbar": 1.0,
        "r_max": 12.0,
    },
    "constant_gap": {
        "gap": 0.0, "amplitude": 0.3, "width": 1.0, "r_cross": 3.0,
        "mass": 1.0, "energy": 10.0, "z1z2": 0.0, "L": 0, "hbar": 1.0,
        "r_max": 12.0,
    },
}

_POTENTIAL_KINDS = ("cubic", "harmonic")

# invariants enforced with the names the error reports
_NAMED_INVARIANTS = {
    "mass": ("M > 0", lambda v: v > 0),
    "hbar": ("hbar > 0", lambda v: v > 0),
    "r_max": ("r_max > 0", lambda v: v > 0),
    "L": ("L >= 0", lambda v: v >= 0 and int(v) == v),
    "delta": ("delta > 0", lambda v: v > 0),
    "slope": ("slope > 0", lambda v: v > 0),
    "saturation": ("saturation > 0", lambda v: v > 0),
    "width": ("width > 0", lambda v: v > 0),
    "g": ("g > 0", lambda v: v > 0),
    "omega": ("omega > 0", lambda v: v > 0),
}


def _parse_ini(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ParseError(f"{source}: {exc}", line=line, column=1) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"{source}: {exc}", line=exc.lineno, column=1) from exc
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from exc
    return parser


def _get_float(section, key, default, source):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ParseError(f"{source}: parameter {key!r} is not numeric: {raw!r}") from exc


def _check_invariant(key, value):
    named = _NAMED_INVARIANTS.get(key)
    if named is not None:
        name, ok = named
        if not ok(value):
            raise ValidationError(f"invariant violated: {name} (got {value!r})",
                                  invariant=name)


def loads_model(text: str, source: str = "<string>") -> Union[
        "channels.ChannelSystem", "wkb.PotentialModel"]:
    """Parse a model definition from text. See module docstring for layout."""
    parser = _parse_ini(text, source)
    if not parser.has_section("model"):
        raise ParseError(f"{source}: missing [model] section", line=1, column=1)
    kind = parser.get("model", "kind", fallback=None)
    if kind is None:
        raise ParseError(f"{source}: [model] section must set 'kind'")
    params_section = parser["parameters"] if parser.has_section("parameters") else {}

    if kind in _CHANNEL_KINDS:
        defaults = _CHANNEL_DEFAULTS[kind]
        unknown = set(params_section) - set(defaults)
        if unknown:
            raise ParseError(
                f"{source}: unknown parameter(s) for {kind}: {sorted(unknown)}"
            )
        values = {}
        for key, default in defaults.items():
            v = _get_float(params_section, key, float(default), source)
            _check_invariant(key, v)
            values[key] = v
        values["L"] = int(values["L"])
        try:
            return _CHANNEL_KINDS[kind](**values)
        except ValueError as exc:
            raise ValidationError(f"invariant violated: {exc}", invariant=str(exc)) from exc

    if kind == "cubic":
        g = _get_float(params_section, "g", None, source)
        if g is None:
            raise ParseError(f"{source}: cubic potential requires parameter 'g'")
        _check_invariant("g", g)
        return wkb.cubic_potential(g)
    if kind == "harmonic":
        omega = _get_float(params_section, "omega", 1.0, source)
        _check_invariant("omega", omega)
        return wkb.harmonic_potential(omega)

    raise ParseError(
        f"{source}: unknown model kind {kind!r} "
        f"(expected one of {sorted(_CHANNEL_KINDS) + list(_POTENTIAL_KINDS)})"
    )


def load_model(path) -> Union["channels.ChannelSystem", "wkb.PotentialModel"]:
    """Load and validate a model file.

    Raises
    ------
    ParseError
        Unreadable or malformed file (carries line/column when known).
    ValidationError
        Well-formed file whose values violate a named invariant.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    return loads_model(text, source=str(path))


def _format_value(v) -> str:
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def dump_model(model) -> str:
    """Serialize a model produced by this package back to the text format."""
    buf = io.StringIO()
    if isinstance(model, channels.ChannelSystem):
        if model.kind is None or model.params is None:
            raise ValidationError(
                "only bundled channel models (with kind/params) can be serialized",
                invariant="kind is not None",
            )
        buf.write("[model]\n")
        buf.write(f"kind = {model.kind}\n\n[parameters]\n")
        for key in _CHANNEL_DEFAULTS[model.kind]:
            buf.write(f"{key} = {_format_value(model.params[key])}\n")
        return buf.getvalue()
    if isinstance(model, wkb.PotentialModel):
        if model.kind not in _POTENTIAL_KINDS or model.params is None:
            raise ValidationError(
                f"potential {model.label!r} is not a serializable bundled kind",
                invariant="bundled potential",
            )
        buf.write("[model]\n")
        buf.write(f"kind = {model.kind}\n\n[parameters]\n")
        for key, value in model.params.items():
            buf.write(f"{key} = {_format_value(value)}\n")
        return buf.getvalue()
    raise ValidationError(f"cannot serialize object of type {type(model).__name__}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_model(model))
