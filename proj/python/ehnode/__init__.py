"""Python bindings for the ehnode energy-harvesting node simulator."""

import csv
import io
import json

from ._core import (
    ApplicationMode,
    ConfigError,
    ContractViolation,
    Controller,
    ConverterModel,
    HarvesterModel,
    LoadModel,
    NodeConfig,
    NodeLog,
    QosTable,
    SupercapState,
    TraceError,
    __version__,
    charge,
    darkness_survival,
    discharge,
    harvest_power,
    input_efficiency,
    interval_for,
    link_delivery,
    lookup_state,
    min_lux_for_perpetual,
    run_node,
    standby_power,
    steady_state_power,
    stored_energy,
    trend,
)
from . import _core


def run_deployment(config, light, events=None, duration=15 * 86400.0, seed=0):
    """Run a deployment and return the summary as a dict.

    ``config`` is a deployment config (dict or JSON string); ``light`` and
    ``events`` map node ids to sequences of ``(time_s, value)`` pairs.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core._run_deployment_json(text, light, events or {}, duration, seed))


def sweep(grid):
    """Frontier rows for a grid config (dict or JSON string) as a list of dicts."""
    text = grid if isinstance(grid, str) else json.dumps(grid)
    return list(csv.DictReader(io.StringIO(_core._sweep_frontier_csv(text))))
