"""Uniform mean estimation over product Bernoulli families."""

from ._ume import (
    ConfigError,
    EmptyAtFirstRound,
    Error,
    EstimatorError,
    EstimatorReport,
    Family,
    HorizonExceeded,
    InconsistentRows,
    MeanVector,
    NoBranchAccepted,
    NoCandidateAccepted,
    NoSurvivorAtFirstRound,
    NotSeparable,
    SampleSet,
    TruthNotInFamily,
    demo_failure,
    empirical_mean,
    first_violation,
    learn,
    prefix_linf,
    sup_distance,
    threshold,
    tree_recovery,
)
from ._ume import sweep as _sweep


def sweep(**config):
    """Risk sweep; keyword arguments mirror the `key = value` config keys.

    Returns (csv_text, summary_dict).
    """
    entries = []
    for key, value in config.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        entries.append((key, str(value)))
    return _sweep(entries)


__all__ = [name for name in dir() if not name.startswith("_")]
