"""Run configurations behind the reference figure datasets.

Shared values: gamma = 1e-2, g1 = 0.01, g2 = 0.05, kappa = 0.1, nbar = 0.
The chain has 10 ports with chi = kappa and its curves sweep kappa over
{0.05, 0.1, 0.5}.
"""
import logging
from typing import Callable, Dict, List

import numpy as np

from app.builders import chain_labels
from app.exceptions import ConfigError
from app.models.run import RunConfig
from app.sweeps import parse_config

logger = logging.getLogger(__name__)

FIG2_PARAMETERS = {"g1": 0.01, "g2": 0.05, "kappa": 0.1, "gamma": 0.01, "nbar": 0.0}
CHAIN_PORTS = 10
CHAIN_KAPPAS = [0.05, 0.1, 0.5]


def _grid(start: float, stop: float, num: int) -> List[float]:
    return [round(float(x), 10) for x in np.linspace(start, stop, num)]


def _fig2a() -> dict:
    return {
        "name": "fig2a",
        "model": "model1",
        "parameters": FIG2_PARAMETERS,
        "sweep": [{"name": "kappa", "values": _grid(0.01, 1.0, 34)}],
        "observables": [{"kind": "log_negativity", "modes": ["b1", "b2"]}],
        "feedback": "both",
    }


def _fig2b() -> dict:
    return {
        "name": "fig2b",
        "model": "model1",
        "parameters": FIG2_PARAMETERS,
        "sweep": [{"name": "nbar", "values": _grid(0.0, 1.0, 41)}],
        "observables": [{"kind": "log_negativity", "modes": ["b1", "b2"]}],
        "feedback": "both",
    }


def _fig3() -> dict:
    return {
        "name": "fig3",
        "model": "model1",
        "parameters": FIG2_PARAMETERS,
        "sweep": [
            {"name": "g1", "values": _grid(0.005, 0.05, 10)},
            {"name": "g2", "values": _grid(0.005, 0.05, 10)},
        ],
        "observables": [{"kind": "log_negativity", "modes": ["b1", "b2"]}],
        "feedback": "both",
    }


def _fig4() -> dict:
    return {
        "name": "fig4",
        "model": "model1",
        "parameters": FIG2_PARAMETERS,
        "sweep": [{"name": "kappa", "values": _grid(0.01, 1.0, 34)}],
        "observables": [
            {"kind": "abs_correlator", "modes": ["b1", "b2"]},
            {"kind": "adiabatic_abs_correlator", "modes": ["b1", "b2"]},
        ],
        "feedback": "both",
    }


def _fig6() -> dict:
    return {
        "name": "fig6",
        "model": "model2",
        "parameters": {"g2": 0.05, "gamma1": 0.01, "nbar": 0.0},
        "sweep": [{"name": "g1", "values": _grid(0.001, 0.05, 50)}],
        "observables": [
            {"kind": "log_negativity", "modes": ["a1", "b"]},
            {"kind": "log_negativity", "modes": ["a2", "b"]},
        ],
        "feedback": "both",
    }


def _fig8() -> dict:
    reference = chain_labels(1)[1]
    return {
        "name": "fig8",
        "model": "chain",
        "parameters": {"n_ports": CHAIN_PORTS, "port": FIG2_PARAMETERS, "chi": None},
        "sweep": [{"name": "port.kappa", "values": CHAIN_KAPPAS}],
        "observables": [
            {"kind": "log_negativity", "modes": [reference, chain_labels(j)[3]]}
            for j in range(1, CHAIN_PORTS + 1)
        ],
        "feedback": "both",
    }


PRESETS: Dict[str, Callable[[], dict]] = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig6": _fig6,
    "fig8": _fig8,
}


def preset(name: str) -> RunConfig:
    factory = PRESETS.get(name)
    if factory is None:
        raise ConfigError(f"unknown preset '{name}' (available: {', '.join(PRESETS)})", "preset")
    logger.info(f"Resolved preset {name}")
    return parse_config(factory())
