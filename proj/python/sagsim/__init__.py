"""Python access to the sagsim ruling-set simulator."""

from __future__ import annotations

import json
from typing import Any, Optional

from ._sagsim import (
    RUN_SCHEMA,
    CapacityError,
    ConfigError,
    Error,
    ExecutionError,
    Graph,
    ParseError,
    _run_json,
    sparsify_degree_bound,
    verify_domination,
    verify_independent,
    verify_maximal_independent,
)

__all__ = [
    "RUN_SCHEMA",
    "CapacityError",
    "ConfigError",
    "Error",
    "ExecutionError",
    "Graph",
    "ParseError",
    "run",
    "sparsify_degree_bound",
    "verify_domination",
    "verify_independent",
    "verify_maximal_independent",
]


def run(
    graph: Graph,
    algo: str = "2rs",
    *,
    engine: str = "mpc-v1",
    beta: Optional[int] = None,
    epsilon: float = 0.5,
    memory: str = "unrestricted",
    seed: int = 1,
    f: Optional[float] = None,
    ell: Optional[int] = None,
    overflow: str = "shrink",
    direct_only: bool = False,
    emit_set: bool = True,
    label: str = "python",
) -> dict[str, Any]:
    """Run one algorithm and return the record with the same schema as ``sagsim run``."""
    text = _run_json(graph, algo, engine, beta, epsilon, memory, seed, f, ell, overflow,
                     direct_only, emit_set, label)
    return json.loads(text)
