"""Reader for the harness run-CSV schema and per-policy aggregation.

The schema is the harness's external interface:
``trial,t,arm,reward,inst_regret,cum_regret,beta,round_time_ns``.
Inputs are never modified; every function returns fresh arrays.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

EXPECTED_HEADER = [
    "trial", "t", "arm", "reward", "inst_regret", "cum_regret", "beta",
    "round_time_ns",
]


class SchemaError(ValueError):
    """Run CSV whose header does not match the harness schema."""


def _check_header(header, path):
    if header == EXPECTED_HEADER:
        return
    for got, want in zip(header, EXPECTED_HEADER):
        if got != want:
            raise SchemaError(f"{path}: unexpected column {got!r} (expected {want!r})")
    if len(header) < len(EXPECTED_HEADER):
        missing = EXPECTED_HEADER[len(header)]
        raise SchemaError(f"{path}: missing column {missing!r}")
    raise SchemaError(f"{path}: extra column {header[len(EXPECTED_HEADER)]!r}")


def policy_label(path):
    """Policy name from the CSV file name (the harness writes one per policy)."""
    stem = os.path.splitext(os.path.basename(path))[0]
    if stem.startswith("bench_"):
        stem = stem[len("bench_"):]
    return stem


@dataclass
class RunTable:
    """All rows of one run CSV, column-wise."""

    label: str
    trial: np.ndarray
    t: np.ndarray
    cum_regret: np.ndarray
    round_time_ns: np.ndarray

    @property
    def trials(self):
        return np.unique(self.trial)


def read_run_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        _check_header(header, path)
        rows = [row for row in reader if row and not row[0].startswith("#")]
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(EXPECTED_HEADER)))
    return RunTable(
        label=policy_label(path),
        trial=data[:, 0].astype(int),
        t=data[:, 1].astype(int),
        cum_regret=data[:, 5],
        round_time_ns=data[:, 7],
    )


@dataclass
class RegretStats:
    """Across-trial mean and standard deviation of cumulative regret."""

    label: str
    t: np.ndarray
    mean: np.ndarray
    std: np.ndarray


def regret_stats(path):
    """Column-wise mean/std of cumulative regret across a file's trials."""
    table = read_run_csv(path)
    trials = table.trials
    if trials.size == 0:
        raise SchemaError(f"{path}: no data rows")
    horizon = int(table.t.max())
    curves = np.full((trials.size, horizon), np.nan)
    for k, trial in enumerate(trials):
        mask = table.trial == trial
        curves[k, table.t[mask] - 1] = table.cum_regret[mask]
    if np.isnan(curves).any():
        raise SchemaError(f"{path}: trials cover different round ranges")
    return RegretStats(
        label=table.label,
        t=np.arange(1, horizon + 1),
        mean=curves.mean(axis=0),
        std=curves.std(axis=0),
    )


def total_runtime_seconds(path):
    """Mean over trials of the summed per-round times, in seconds."""
    table = read_run_csv(path)
    trials = table.trials
    if trials.size == 0:
        raise SchemaError(f"{path}: no data rows")
    totals = [table.round_time_ns[table.trial == trial].sum() for trial in trials]
    return table.label, float(np.mean(totals)) * 1e-9
