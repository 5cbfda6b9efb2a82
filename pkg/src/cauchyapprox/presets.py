"""Named function specifications used by the command line and the tests."""
from __future__ import annotations

import copy

from .errors import InvalidInputError
from .model import CauchyFunction

# JSON-shaped so a preset is interchangeable with an inline "function" block
_PRESETS: dict[str, dict] = {
    "markov-arcsine": {
        "measure": {"interval": ["-1", "1"], "h": "1"},
    },
    "markov-half": {
        "measure": {"interval": ["-0.5", "0.5"], "h": "1"},
    },
    # density 7 e^{it} on [-0.7, 0] and (it + 1) on [0, 0.4] against dt/sqrt((t+0.7)(0.4-t)),
    # i.e. pi times that relative to the arcsine distribution; plus 1/(5! (z - 0.7 - 0.2i)^6)
    "two-piece-sextic": {
        "measure": {
            "interval": ["-0.7", "0.4"],
            "pieces": [
                {"interval": ["-0.7", "0"], "h": "7*pi*exp(i*t)"},
                {"interval": ["0", "0.4"], "h": "pi*(i*t+1)"},
            ],
        },
        "rational": {"p": [["1/120", "0"]], "q_roots": [["0.7", "0.2", 6]]},
    },
    "smooth-positive": {
        "measure": {"interval": ["-1", "1"], "h": "2+cos(t)"},
    },
}

# the experiment preset is also reachable under its established short name
_ALIASES = {"paper-sec8": "two-piece-sextic"}


def preset_names() -> list[str]:
    return sorted(list(_PRESETS) + list(_ALIASES))


def preset_dict(name: str) -> dict:
    key = _ALIASES.get(name, name)
    if key not in _PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    return copy.deepcopy(_PRESETS[key])


def preset(name: str) -> CauchyFunction:
    return CauchyFunction.from_dict(preset_dict(name))
