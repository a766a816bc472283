"""Seeded Monte Carlo sweeps, result summaries and single external-data runs."""

from __future__ import annotations

import configparser
import csv
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .datagen import SubspaceModel, generate, load_matrix
from .metrics import clustering_error
from .pipeline import AlgorithmParams, Variant, run

# cross-product order; also the column order of the results file
AXES = ("variant", "noise_level", "subspace_dim", "samples_per_subspace", "d", "b", "p")
AXIS_TYPES = {
    "variant": Variant,
    "noise_level": float,
    "subspace_dim": int,
    "samples_per_subspace": int,
    "d": int,
    "b": float,
    "p": float,
}
SCALARS = {
    "ambient_dim": int,
    "n_subspaces": int,
    "trials": int,
    "master_seed": int,
    "output": str,
    "alpha": float,
    "restarts": int,
    "record_time": bool,
}
METRICS = ("error_rate", "mean_connectivity", "sdp_percentage", "inner_products", "wall_time")


class ConfigError(ValueError):
    pass


def fmt(value) -> str:
    if isinstance(value, Variant):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


@dataclass
class SweepSpec:
    ambient_dim: int
    n_subspaces: int
    axes: dict
    trials: int = 100
    master_seed: int = 0
    output: str = "results.csv"
    alpha: float = 20.0
    restarts: int = 10
    record_time: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.ambient_dim < 1 or self.n_subspaces < 1:
            raise ConfigError("ambient_dim and n_subspaces must be >= 1")
        missing = [a for a in AXES if a not in self.axes]
        if missing:
            raise ConfigError(f"missing axes: {', '.join(missing)}")
        for name, values in self.axes.items():
            if name not in AXES:
                raise ConfigError(f"unknown axis {name!r}")
            if not values:
                raise ConfigError(f"axis {name!r} is empty")
        # fail early on cells the pipeline would reject
        for cell in self.cells():
            self.model_for(cell, 0)
            self.params_for(cell, 0)

    def cells(self) -> list[dict]:
        return [dict(zip(AXES, combo)) for combo in itertools.product(*(self.axes[a] for a in AXES))]

    def model_for(self, cell: dict, seed: int) -> SubspaceModel:
        try:
            return SubspaceModel.uniform(
                self.ambient_dim,
                self.n_subspaces,
                cell["subspace_dim"],
                cell["samples_per_subspace"],
                cell["noise_level"],
                seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def params_for(self, cell: dict, seed: int) -> AlgorithmParams:
        """Pipeline parameters for a cell; ``b`` and ``p`` only reach A-OMP-SSC."""
        variant = Variant(cell["variant"])
        active = variant is Variant.A_OMP_SSC
        try:
            return AlgorithmParams(
                variant,
                d=cell["d"],
                b=cell["b"] if active else 0.0,
                p=cell["p"] if active else 0.0,
                alpha=self.alpha,
                seed=seed,
                restarts=self.restarts,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def columns(self) -> list[str]:
        cols = ["cell", "trial", "seed", *AXES, "error_rate", "mean_connectivity", "sdp_percentage", "inner_products"]
        if self.record_time:
            cols.append("wall_time")
        return cols


def _parse_value(kind, raw: str):
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return kind(raw)


def parse_config(text: str) -> SweepSpec:
    """Parse flat ``key = value`` text; axes take comma-separated lists."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[sweep]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    section = cp["sweep"]
    scalars, axes = {}, {}
    for key, raw in section.items():
        try:
            if key in SCALARS:
                scalars[key] = _parse_value(SCALARS[key], raw)
            elif key in AXIS_TYPES:
                axes[key] = [_parse_value(AXIS_TYPES[key], v) for v in raw.split(",") if v.strip()]
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{key}: {exc}") from exc
    for key in ("ambient_dim", "n_subspaces"):
        if key not in scalars:
            raise ConfigError(f"missing required key {key!r}")
    return SweepSpec(axes=axes, **scalars)


def load_config(path) -> SweepSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def child_seed(master_seed: int, cell: int, trial: int) -> int:
    """63-bit seed for one (cell, trial), independent of execution order."""
    state = np.random.SeedSequence([master_seed, cell, trial]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) | (int(state[1]) >> 1)


def _run_trial(task) -> dict:
    spec, cell_index, cell, trial = task
    seed = child_seed(spec.master_seed, cell_index, trial)
    data = generate(spec.model_for(cell, seed))
    params = spec.params_for(cell, seed)
    res = run(data, params)
    row = {"cell": cell_index, "trial": trial, "seed": seed, **cell, "b": params.b, "p": params.p}
    row.update(
        error_rate=res.error_rate,
        mean_connectivity=res.mean_connectivity,
        sdp_percentage=res.sdp_percentage,
        inner_products=res.inner_products,
        wall_time=res.wall_time,
    )
    return row


def sweep_rows(spec: SweepSpec, jobs: Optional[int] = None) -> list[dict]:
    tasks = [(spec, ci, cell, t) for ci, cell in enumerate(spec.cells()) for t in range(spec.trials)]
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(tasks) == 1:
        return [_run_trial(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order regardless of completion order
        return list(pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def write_rows(path, columns: Sequence[str], rows: list[dict]):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])


def run_sweep(spec: SweepSpec, output=None, jobs: Optional[int] = None) -> Path:
    """Run every (cell, trial) of ``spec`` and write the results CSV."""
    out = Path(output or spec.output)
    rows = sweep_rows(spec, jobs)
    write_rows(out, spec.columns, rows)
    return out


@dataclass
class SummaryRow:
    key: tuple
    count: int
    stats: dict = field(default_factory=dict)  # metric -> (mean, stderr)


def read_results(path) -> tuple[list[str], list[dict]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            header = reader.fieldnames or []
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    if not header:
        raise ValueError(f"{path}: no header row")
    return header, rows


def summarize(path, group_by: Sequence[str], output=None) -> list[SummaryRow]:
    """Mean and standard error of each metric per group; writes ``.csv`` and ``.dat``.

    The ``.dat`` file is whitespace separated with a ``#`` header line, one
    line per group, suitable for gnuplot.
    """
    header, rows = read_results(path)
    for g in group_by:
        if g not in header:
            raise ValueError(f"{path}: no column {g!r} to group by")
    metrics = [m for m in METRICS if m in header]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[g] for g in group_by), []).append(row)

    summary = []
    for key, members in groups.items():
        sr = SummaryRow(key, len(members))
        for m in metrics:
            try:
                vals = np.array([float(r[m]) for r in members if r[m] not in ("", "None")])
            except ValueError as exc:
                raise ValueError(f"{path}: bad value in column {m!r}: {exc}") from exc
            if vals.size == 0:
                sr.stats[m] = (float("nan"), float("nan"))
                continue
            se = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
            sr.stats[m] = (float(vals.mean()), float(se))
        summary.append(sr)

    out = Path(output) if output else Path(path).with_name(Path(path).stem + "_summary.csv")
    columns = [*group_by, "count"] + [f"{m}_{s}" for m in metrics for s in ("mean", "stderr")]
    lines = []
    for sr in summary:
        vals = [*sr.key, fmt(sr.count)] + [fmt(v) for m in metrics for v in sr.stats[m]]
        lines.append(vals)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(lines)
    with open(out.with_suffix(".dat"), "w") as fh:
        fh.write("# " + " ".join(columns) + "\n")
        for vals in lines:
            fh.write(" ".join(vals) + "\n")
    return summary


def run_single(data_path, labels_path, params: AlgorithmParams) -> dict:
    """Cluster an external CSV matrix; metrics need a labels file."""
    data = load_matrix(data_path, labels_path)
    res = run(data, params)
    record = {
        "n_points": data.n_points,
        "variant": params.variant.value,
        "inner_products": res.inner_products,
        "wall_time": res.wall_time,
        "n_trivial": res.n_trivial,
    }
    if data.truth is not None:
        record["error_rate"] = res.error_rate
        record["mean_connectivity"] = res.mean_connectivity
        record["sdp_percentage"] = res.sdp_percentage
    record["labels"] = res.labels
    return record


def subset_trials(data, k: int, trials: int, params: dict, seed: int = 0) -> dict:
    """Repeatedly cluster ``k`` randomly chosen ground-truth groups of ``data``.

    Each trial picks ``k`` distinct labels, gathers their columns in random
    order and runs every entry of ``params`` (name -> AlgorithmParams) on
    them. Returns name -> array of per-trial error rates.
    """
    if data.truth is None:
        raise ValueError("subset trials need ground-truth labels")
    groups = np.unique(data.truth)
    if k > groups.size:
        raise ValueError(f"k={k} exceeds the {groups.size} labelled groups")
    rng = np.random.default_rng(seed)
    errors = {name: [] for name in params}
    for t in range(trials):
        chosen = rng.choice(groups, k, replace=False)
        cols = rng.permutation(np.flatnonzero(np.isin(data.truth, chosen)))
        X, truth = data.X[:, cols], data.truth[cols]
        for name, p in params.items():
            res = run(X, replace(p, k=k, seed=child_seed(seed, 0, t)))
            errors[name].append(clustering_error(res.labels, truth))
    return {name: np.array(v) for name, v in errors.items()}
