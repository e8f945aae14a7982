"""Operator spec files and zero tables."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .spectral import OperatorSpec, SpectralError, SpectrumPoint


class InputError(ValueError):
    """Malformed input file; the message names the line or field."""


def _complex_entry(value, where: str) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise InputError(f"{where}: expected [re, im], got {value!r}")
    return complex(value[0], value[1])


def _matrix(rows, where: str):
    if not isinstance(rows, list) or not rows:
        raise InputError(f"{where}: expected a non-empty list of rows")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise InputError(f"{where}[{i}]: expected a list")
        out.append([_complex_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    if any(len(r) != len(out) for r in out):
        raise InputError(f"{where}: matrix must be square")
    return out


def parse_operator(payload) -> OperatorSpec:
    """Build an operator from the decoded JSON object.

    Accepted shapes::

        {"dim": 4, "spectral": [{"re": 0.5, "im": 1.0, "mult": 1}, ...], "basis": [[[re, im], ...], ...]}
        {"dense": [[[re, im], ...], ...]}

    ``basis`` is optional; ``dim`` is checked against the multiplicities.
    """
    if not isinstance(payload, dict):
        raise InputError("top level: expected a JSON object")
    if ("spectral" in payload) == ("dense" in payload):
        raise InputError("top level: exactly one of 'spectral' or 'dense' is required")
    try:
        if "dense" in payload:
            op = OperatorSpec.from_matrix(_matrix(payload["dense"], "dense"))
        else:
            raw = payload["spectral"]
            if not isinstance(raw, list) or not raw:
                raise InputError("spectral: expected a non-empty list")
            points = []
            for i, item in enumerate(raw):
                where = f"spectral[{i}]"
                if not isinstance(item, dict):
                    raise InputError(f"{where}: expected an object")
                for key in ("re", "im"):
                    if not isinstance(item.get(key), (int, float)) or isinstance(item.get(key), bool):
                        raise InputError(f"{where}.{key}: expected a number")
                mult = item.get("mult", 1)
                if not isinstance(mult, int) or isinstance(mult, bool) or mult < 1:
                    raise InputError(f"{where}.mult: expected a positive integer")
                points.append(SpectrumPoint(complex(item["re"], item["im"]), mult))
            basis = _matrix(payload["basis"], "basis") if "basis" in payload else None
            op = OperatorSpec.spectral(points, basis)
    except SpectralError as exc:
        raise InputError(str(exc)) from exc
    if "dim" in payload and payload["dim"] != op.dim:
        raise InputError(f"dim: declared {payload['dim']!r} but the operator has dimension {op.dim}")
    return op


def load_operator(path) -> OperatorSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_operator(payload)


def parse_zero_table(text: str, source: str = "<table>") -> OperatorSpec:
    """One positive ordinate gamma per line becomes the pair 1/2 +- i gamma.

    Blank lines and lines starting with '#' are skipped.
    """
    points = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            gamma = float(line)
        except ValueError:
            raise InputError(f"{source}: line {lineno}: not a number: {line!r}") from None
        if not gamma > 0:
            raise InputError(f"{source}: line {lineno}: ordinate must be positive, got {line}")
        points.append(SpectrumPoint(complex(0.5, gamma), 1))
        points.append(SpectrumPoint(complex(0.5, -gamma), 1))
    if not points:
        raise InputError(f"{source}: zero table is empty")
    return OperatorSpec.spectral(points)


def load_zero_table(path) -> OperatorSpec:
    return parse_zero_table(Path(path).read_text(encoding="utf-8"), str(path))


def bundled_zero_table() -> OperatorSpec:
    """The first ten nontrivial zeta ordinates shipped with the package."""
    text = resources.files(__package__).joinpath("data/zeta_zeros_10.txt").read_text(encoding="utf-8")
    return parse_zero_table(text, "zeta_zeros_10.txt")


def load_input(path, kind: str = "auto") -> OperatorSpec:
    """Dispatch on ``kind`` ('json', 'zeros', or 'auto' by file suffix)."""
    if kind == "auto":
        kind = "json" if Path(path).suffix.lower() == ".json" else "zeros"
    if kind == "json":
        return load_operator(path)
    if kind == "zeros":
        return load_zero_table(path)
    raise InputError(f"unknown input kind {kind!r}")
