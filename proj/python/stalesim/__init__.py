"""Staleness-bounded rollout control plane and discrete-event simulator."""

import json

from ._stalesim import (
    BufferLedger,
    CostCoefficients,
    LedgerConfig,
    StalesimError,
    compare_suites,
    decode_step_latency,
    estimate_throughput,
    fit_coefficients,
    generate_profile,
    ideal_gain,
    load_config,
    marginal_gain,
    plan_communication,
    report,
)
from ._stalesim import run_simulation as _run_simulation


def run_simulation(config, seed=1):
    """Runs one simulation. `config` is a JSON string or a dict.

    Returns a dict with the parsed summary, the trace lines and the final
    ledger dump.
    """
    if not isinstance(config, str):
        config = json.dumps(config)
    out = _run_simulation(config, seed)
    out["summary"] = json.loads(out["summary"])
    return out


__all__ = [
    "BufferLedger",
    "CostCoefficients",
    "LedgerConfig",
    "StalesimError",
    "compare_suites",
    "decode_step_latency",
    "estimate_throughput",
    "fit_coefficients",
    "generate_profile",
    "ideal_gain",
    "load_config",
    "marginal_gain",
    "plan_communication",
    "report",
    "run_simulation",
]
