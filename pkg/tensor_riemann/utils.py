"""
Utility functions for tensor_riemann.
"""

import json
from typing import Any, Dict, Iterable, Sequence

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finalizer on a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def replicate_seed(base_seed: int, coords: Sequence[int]) -> int:
    """``base_seed XOR h(coords)``, folding each coordinate through splitmix64.

    The result depends only on the seed and the run coordinates, never on the
    order in which runs execute.
    """
    h = 0
    for c in coords:
        h = splitmix64(h ^ (int(c) & MASK64))
    return (int(base_seed) & MASK64) ^ h


def flatten_dict(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Flatten nested dicts into ``section.key`` entries."""
    flat = {}
    for key, value in data.items():
        name = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, dict):
            flat.update(flatten_dict(value, name))
        else:
            flat[name] = value
    return flat


def parse_override_value(raw: str) -> Any:
    """Parse a command-line override as JSON, falling back to the raw string."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_overrides(args: Iterable[str]) -> Dict[str, Any]:
    """Turn ``--section.key=value`` arguments into ``{"section.key": value}``.

    Raises:
        ValueError: If an argument is not of that form.
    """
    overrides = {}
    for arg in args:
        if not arg.startswith("--") or "=" not in arg:
            raise ValueError(f"expected --section.key=value, got '{arg}'")
        key, raw = arg[2:].split("=", 1)
        if "." not in key:
            raise ValueError(f"override key '{key}' must name a section")
        overrides[key] = parse_override_value(raw)
    return overrides


def format_shape(values: Sequence[int]) -> str:
    """Format a shape or rank tuple as ``30x30x30``."""
    return "x".join(str(int(v)) for v in values)
