"""Experiment orchestration and CSV export.

A run is a grid of cells ``(size, fraction, protocol, repetition)``. Each
``(size, repetition)`` pair gets one network and one field, shared by all
fractions and protocols so energy comparisons are paired.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path

import numpy as np

from ._validation import InvalidParameterError
from .cs import derive_seed
from .energy import RadioModel
from .field import (
    DEFAULT_BASE,
    DEFAULT_BUMP_COUNT,
    DEFAULT_DECAY,
    DEFAULT_HEIGHT,
    DEFAULT_HIGH,
    DEFAULT_LOW,
    DEFAULT_NOISE_VARIANCE,
    FieldKind,
    gen_gaussian_bumps,
    gen_piecewise,
)
from .metrics import condition_census, disabled_stats, mse_per_level, root_mse
from .protocols import global_sparsity, run_protocol
from .topology import NODES_COLUMNS, build_hierarchy, node_rows, place_nodes

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "Network",
    "build_network",
    "run_experiment",
    "sweep_threshold",
    "RUNS_COLUMNS",
    "LEVELS_COLUMNS",
    "CENSUS_COLUMNS",
    "SWEEP_COLUMNS",
]

PROTOCOLS = ("ahdacs", "hdacs")
DEFAULT_SWEEP = (0.005, 0.01, 0.0225, 0.03, 0.05)

RUNS_COLUMNS = [
    "protocol", "field", "nodes", "n", "T", "fraction", "rep", "seed", "K_T",
    "total_tx_J", "total_rx_J", "total_bits", "enabled", "disabled", "root_mse", "config",
]
LEVELS_COLUMNS = [
    "protocol", "field", "nodes", "fraction", "rep", "level", "mse", "rho",
    "enabled_count", "disabled_count",
]
CENSUS_COLUMNS = ["field", "nodes", "fraction", "rep", "scope", "condition", "count"]
SWEEP_COLUMNS = ["fraction", "field", "protocol", "nodes", "rep", "root_mse"]


class ConfigError(InvalidParameterError):
    """An experiment configuration value is invalid; ``field`` names it."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    field: str = "piecewise"
    nodes: list = dc_field(default_factory=lambda: [400])
    extent: float = 4000.0
    branching: int = 4
    levels: int = 4
    fractions: list = dc_field(default_factory=lambda: [0.01])
    protocols: list = dc_field(default_factory=lambda: list(PROTOCOLS))
    seed: int = 0
    reps: int = 1
    out: str = "results"
    # field parameters
    bump_count: int = DEFAULT_BUMP_COUNT
    height: float = DEFAULT_HEIGHT
    decay: float = DEFAULT_DECAY
    base: float = DEFAULT_BASE
    low: float = DEFAULT_LOW
    high: float = DEFAULT_HIGH
    noise_variance: float = DEFAULT_NOISE_VARIANCE
    # radio
    power_control: str = "fixed"
    radio_range: float = 100.0
    jobs: int = 1

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        try:
            FieldKind(self.field)
        except ValueError:
            raise ConfigError("field", f"must be 'piecewise' or 'gaussian-bumps', got {self.field!r}")
        if isinstance(self.nodes, int):
            self.nodes = [self.nodes]
        if not self.nodes or any(not isinstance(n, int) or isinstance(n, bool) or n < 1 for n in self.nodes):
            raise ConfigError("nodes", "must be a non-empty list of positive integers")
        if isinstance(self.fractions, (int, float)):
            self.fractions = [self.fractions]
        if not self.fractions or any(not (0 < float(f) < 1) for f in self.fractions):
            raise ConfigError("fractions", "every truncation fraction must lie in (0, 1)")
        self.fractions = [float(f) for f in self.fractions]
        if isinstance(self.protocols, str):
            self.protocols = [self.protocols]
        if not self.protocols or any(p not in PROTOCOLS for p in self.protocols):
            raise ConfigError("protocols", f"must be drawn from {list(PROTOCOLS)}")
        if not isinstance(self.branching, int) or self.branching < 2:
            raise ConfigError("branching", "must be an integer >= 2")
        if not isinstance(self.levels, int) or self.levels < 2:
            raise ConfigError("levels", "must be an integer >= 2")
        for n in self.nodes:
            if self.branching ** (self.levels - 1) > n:
                raise ConfigError(
                    "nodes", f"{n} nodes cannot fill {self.branching}**{self.levels - 1} leaf cells"
                )
        if not isinstance(self.reps, int) or self.reps < 1:
            raise ConfigError("reps", "must be an integer >= 1")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed", "must be an integer")
        if not self.extent > 0:
            raise ConfigError("extent", "must be positive")
        for name in ("height", "decay"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")
        if self.noise_variance < 0:
            raise ConfigError("noise_variance", "must be non-negative")
        if not isinstance(self.bump_count, int) or self.bump_count < 0:
            raise ConfigError("bump_count", "must be a non-negative integer")
        if self.power_control not in ("fixed", "adaptive"):
            raise ConfigError("power_control", "must be 'fixed' or 'adaptive'")
        if not self.radio_range >= 0:
            raise ConfigError("radio_range", "must be non-negative")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("jobs", "must be an integer >= 1")
        return self

    def fingerprint(self):
        """Short hash of every setting that affects results."""
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("jobs")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @property
    def radio(self):
        return RadioModel(self.power_control, self.radio_range)


@dataclass
class Network:
    field: object
    nodes: object
    tree: object
    seed: int


def build_network(config, size, rep):
    """Field, placed nodes (with readings) and hierarchy for one (size, rep)."""
    seed = derive_seed(config.seed, size, rep)
    if config.field == FieldKind.PIECEWISE.value:
        fld = gen_piecewise(config.extent, config.low, config.high, config.noise_variance, seed)
    else:
        fld = gen_gaussian_bumps(config.extent, config.bump_count, config.height, config.decay,
                                 seed, base=config.base)
    nodes = place_nodes(size, config.extent, seed).with_readings(fld)
    tree = build_hierarchy(nodes, config.branching, config.levels)
    return Network(fld, nodes, tree, seed)


def _fraction_key(f):
    return int(round(f * 1e9))


def protocol_seed(config, size, fraction, protocol, rep):
    return derive_seed(config.seed, size, _fraction_key(fraction), PROTOCOLS.index(protocol), rep)


def _fmt(x):
    return repr(float(x))


def _run_cell(args):
    """All fractions and protocols for one (size, rep); returns plain rows."""
    config, size, rep = args
    net = build_network(config, size, rep)
    runs, levels, census, energy = [], [], [], []
    fp = config.fingerprint()
    for frac in config.fractions:
        K_T = global_sparsity(net.tree, net.nodes, frac)
        traces = {}
        for proto in config.protocols:
            seed = protocol_seed(config, size, frac, proto, rep)
            tr = run_protocol(net.tree, net.nodes, proto, frac, seed, K_T=K_T, radio=config.radio)
            traces[proto] = tr
            en, dis = tr.counts()
            runs.append([
                proto, config.field, size, config.branching, config.levels, _fmt(frac), rep, seed,
                K_T, _fmt(tr.ledger.total_tx), _fmt(tr.ledger.total_rx), tr.ledger.total_bits,
                en, dis, _fmt(root_mse(tr, net.nodes)), fp,
            ])
            mse = mse_per_level(tr, net.nodes)
            stats = {j: disabled_stats(tr, j).rho[j] for j in range(1, tr.T)}
            for lvl in range(1, tr.T + 1):
                row = tr.level(lvl)
                levels.append([
                    proto, config.field, size, _fmt(frac), rep, lvl, _fmt(mse[lvl - 1]),
                    _fmt(stats[lvl]) if lvl in stats else "",
                    sum(d.enabled for d in row), sum(d.status.value == "cs-disabled" for d in row),
                ])
            energy.append((proto, size, frac, tr.ledger.total))
        if set(PROTOCOLS) <= set(traces):
            for scope in ("above-cutoff", "all"):
                counts = condition_census(traces["ahdacs"], traces["hdacs"], K_T, scope=scope)
                for cond, cnt in counts.items():
                    census.append([config.field, size, _fmt(frac), rep, scope, cond, cnt])
    return size, rep, runs, levels, census, energy, net


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _iter_cells(config):
    cells = [(config, size, rep) for size in config.nodes for rep in range(config.reps)]
    if config.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    # output order never depends on completion order
    return sorted(results, key=lambda r: (r[0], r[1]))


def run_experiment(config):
    """Run every cell of ``config`` and write the CSV bundle to ``config.out``.

    Returns the summary dict that is also written to ``summary.json``.
    """
    config.validate()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    results = _iter_cells(config)

    runs, levels, census = [], [], []
    totals = {}
    node_rows = []
    for size, rep, r, lv, ce, energy, net in results:
        runs += r
        levels += lv
        census += ce
        for proto, sz, frac, joules in energy:
            totals[(proto, sz, frac)] = totals.get((proto, sz, frac), 0.0) + joules
        node_rows.append((size, rep, net))

    _write_csv(out / "runs.csv", RUNS_COLUMNS, runs)
    _write_csv(out / "levels.csv", LEVELS_COLUMNS, levels)
    _write_csv(out / "census.csv", CENSUS_COLUMNS, census)
    _write_nodes(out / "nodes.csv", node_rows)

    ratios = []
    for size in config.nodes:
        for frac in config.fractions:
            a = totals.get(("ahdacs", size, frac))
            h = totals.get(("hdacs", size, frac))
            if a is not None and h is not None:
                ratios.append({
                    "nodes": size, "fraction": frac, "ahdacs_J": a, "hdacs_J": h,
                    "ratio": a / h if h > 0 else None,
                })
    summary = {
        "config": dataclasses.asdict(config) | {"fingerprint": config.fingerprint()},
        "energy_ratio": ratios,
    }
    summary["config"].pop("jobs")
    summary["config"].pop("out")
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _write_nodes(path, node_rows_by_net):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nodes", "rep"] + NODES_COLUMNS)
        for size, rep, net in node_rows_by_net:
            w.writerows([size, rep] + row for row in node_rows(net.tree, net.nodes))


def sweep_threshold(config, fractions=None):
    """Root MSE for each truncation fraction; writes ``sweep.csv`` if ``out`` is set.

    Returns rows ``(fraction, field, protocol, nodes, rep, root_mse)``.
    """
    fractions = list(fractions if fractions is not None else DEFAULT_SWEEP)
    config = dataclasses.replace(config, fractions=fractions)
    config.validate()
    rows = []
    for size in config.nodes:
        for rep in range(config.reps):
            net = build_network(config, size, rep)
            for frac in config.fractions:
                for proto in config.protocols:
                    seed = protocol_seed(config, size, frac, proto, rep)
                    tr = run_protocol(net.tree, net.nodes, proto, frac, seed, radio=config.radio)
                    rows.append((frac, config.field, proto, size, rep, root_mse(tr, net.nodes)))
    rows.sort(key=lambda r: (r[2], r[3], r[4], r[0]))
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "sweep.csv", SWEEP_COLUMNS,
                   [[_fmt(f), fld, p, n, rep, _fmt(m)] for f, fld, p, n, rep, m in rows])
    return rows


def mean_by_fraction(rows):
    """Average root MSE per (protocol, fraction) over sweep rows."""
    acc = {}
    for frac, _, proto, _, _, m in rows:
        acc.setdefault((proto, frac), []).append(m)
    return {k: float(np.mean(v)) for k, v in sorted(acc.items())}
