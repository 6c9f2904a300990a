"""Project datasets, communities, and the CSV/manifest loaders.

A community is a named group of project datasets that share one
attribute schema; classification labels are reduced to {0, 1} by a
positive-class rule applied to the raw class column.
"""

import csv
import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataValidationError, SchemaMismatchError


class TaskKind(Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


_RULE_RE = re.compile(r"^\s*(?:[A-Za-z_]\w*\s*)?(>=|<=|==|!=|>|<)\s*(-?\d+(?:\.\d+)?)\s*$")

_OPS = {
    ">": lambda v, c: v > c,
    ">=": lambda v, c: v >= c,
    "<": lambda v, c: v < c,
    "<=": lambda v, c: v <= c,
    "==": lambda v, c: v == c,
    "!=": lambda v, c: v != c,
}

DEFAULT_POSITIVE_RULE = "> 0"


def parse_positive_rule(rule: str):
    """Turn a rule string like '> 0' or 'bug >= 1' into a vectorized predicate."""
    m = _RULE_RE.match(rule)
    if not m:
        raise ConfigError(f"cannot parse positive-class rule {rule!r}")
    op, const = _OPS[m.group(1)], float(m.group(2))
    return lambda values: op(values, const)


@dataclass(frozen=True)
class ProjectDataset:
    """One project's numeric instance matrix plus its label column."""

    name: str
    attributes: tuple
    features: np.ndarray  # (n_rows, n_attrs) float64
    labels: np.ndarray  # {0,1} for classification, reals for regression
    task: TaskKind
    version: str | None = None

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise DataValidationError(f"{self.name}: dataset needs at least one row")
        if feats.shape[1] != len(self.attributes):
            raise DataValidationError(
                f"{self.name}: {feats.shape[1]} feature columns vs "
                f"{len(self.attributes)} attribute names"
            )
        if len(set(self.attributes)) != len(self.attributes):
            raise DataValidationError(f"{self.name}: duplicate attribute names")
        if labels.shape != (feats.shape[0],):
            raise DataValidationError(f"{self.name}: label count does not match row count")
        if not np.isfinite(feats).all():
            raise DataValidationError(f"{self.name}: non-finite feature value")
        if not np.isfinite(labels).all():
            raise DataValidationError(f"{self.name}: non-finite class value")
        if self.task is TaskKind.CLASSIFICATION and not np.isin(labels, (0.0, 1.0)).all():
            raise DataValidationError(f"{self.name}: classification labels must be 0/1")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "attributes", tuple(self.attributes))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def positive_count(self) -> int:
        if self.task is not TaskKind.CLASSIFICATION:
            raise DataValidationError(f"{self.name}: positive_count on regression data")
        return int(self.labels.sum())

    def replace(self, **kwargs) -> "ProjectDataset":
        fields = dict(
            name=self.name,
            attributes=self.attributes,
            features=self.features,
            labels=self.labels,
            task=self.task,
            version=self.version,
        )
        fields.update(kwargs)
        return ProjectDataset(**fields)


@dataclass(frozen=True)
class Community:
    """Datasets sharing one attribute schema and one task kind."""

    name: str
    datasets: tuple
    task: TaskKind
    positive_rule: str = DEFAULT_POSITIVE_RULE

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))

    def __len__(self) -> int:
        return len(self.datasets)

    def names(self) -> list:
        return [d.name for d in self.datasets]


def load_csv(
    path,
    positive_rule: str | None = DEFAULT_POSITIVE_RULE,
    class_column: str | None = None,
    task: TaskKind = TaskKind.CLASSIFICATION,
    name: str | None = None,
    version: str | None = None,
) -> ProjectDataset:
    """Load one dataset from a headered CSV.

    The class column defaults to the last column. For classification the
    raw class values are mapped to {0, 1} by `positive_rule`; rows with
    missing or non-numeric cells are rejected outright.
    """
    path = Path(path)
    if not path.is_file():
        raise DataValidationError(f"no such dataset file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: empty file") from None
        rows = list(reader)
    header = [h.strip() for h in header]
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataValidationError(f"{path}: no data rows")
    if class_column is None:
        class_idx = len(header) - 1
    else:
        try:
            class_idx = header.index(class_column)
        except ValueError:
            raise DataValidationError(f"{path}: class column {class_column!r} absent") from None
    attrs = tuple(h for i, h in enumerate(header) if i != class_idx)
    matrix = np.empty((len(rows), len(header)), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataValidationError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}"
            )
        for j, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                raise DataValidationError(f"{path}: row {i + 2} column {header[j]!r} is empty")
            try:
                matrix[i, j] = float(cell)
            except ValueError:
                raise DataValidationError(
                    f"{path}: non-numeric value {cell!r} at row {i + 2}, column {header[j]!r}"
                ) from None
    feature_cols = [j for j in range(len(header)) if j != class_idx]
    features = matrix[:, feature_cols]
    raw_class = matrix[:, class_idx]
    if task is TaskKind.CLASSIFICATION:
        rule = parse_positive_rule(positive_rule or DEFAULT_POSITIVE_RULE)
        labels = rule(raw_class).astype(np.float64)
    else:
        labels = raw_class
    return ProjectDataset(
        name=name or path.stem,
        attributes=attrs,
        features=features,
        labels=labels,
        task=task,
        version=version,
    )


def save_csv(dataset: ProjectDataset, path, class_column: str = "klass") -> None:
    """Write a dataset back out; inverse of load_csv on loaded values."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.attributes) + [class_column])
        for feats, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in feats] + [repr(float(label))])


def make_community(
    name: str,
    datasets,
    task: TaskKind,
    positive_rule: str = DEFAULT_POSITIVE_RULE,
) -> Community:
    """Group datasets into a community, enforcing one schema and task kind."""
    datasets = list(datasets)
    if not datasets:
        raise DataValidationError(f"community {name!r} needs at least one dataset")
    ref = datasets[0]
    ref_set = set(ref.attributes)
    aligned = [ref]
    for ds in datasets[1:]:
        if ds.task is not task or ref.task is not task:
            raise DataValidationError(
                f"community {name!r}: dataset {ds.name!r} task {ds.task.value} != {task.value}"
            )
        ds_set = set(ds.attributes)
        if ds_set != ref_set:
            odd = sorted((ds_set ^ ref_set))
            raise SchemaMismatchError(
                f"community {name!r}: dataset {ds.name!r} schema mismatch on {', '.join(odd)}"
            )
        if ds.attributes != ref.attributes:
            # Same attribute set, different column order: align to the first dataset.
            perm = [ds.attributes.index(a) for a in ref.attributes]
            ds = ds.replace(attributes=ref.attributes, features=ds.features[:, perm])
        aligned.append(ds)
    if ref.task is not task:
        raise DataValidationError(
            f"community {name!r}: dataset {ref.name!r} task {ref.task.value} != {task.value}"
        )
    return Community(name=name, datasets=tuple(aligned), task=task, positive_rule=positive_rule)


def _version_key(tag: str):
    parts = tag.split(".")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        return None


def order_versions(datasets) -> list:
    """Sort datasets oldest to newest by version tag (stable for equal tags)."""
    datasets = list(datasets)
    for ds in datasets:
        if ds.version is None:
            raise DataValidationError(f"dataset {ds.name!r} has no version tag")
    numeric = [_version_key(ds.version) for ds in datasets]
    if all(k is not None for k in numeric):
        return sorted(datasets, key=lambda d: _version_key(d.version))
    return sorted(datasets, key=lambda d: d.version)


def dataset_summary(dataset: ProjectDataset) -> dict:
    """Row counts, class balance, and data-quality counts for one dataset."""
    out = {
        "name": dataset.name,
        "version": dataset.version,
        "rows": dataset.n_rows,
        "attributes": len(dataset.attributes),
        "duplicate_rows": int(
            dataset.n_rows - len(np.unique(dataset.features, axis=0))
        ),
        "constant_columns": int(
            sum(1 for j in range(dataset.features.shape[1])
                if np.ptp(dataset.features[:, j]) == 0.0)
        ),
    }
    if dataset.task is TaskKind.CLASSIFICATION:
        pos = dataset.positive_count()
        out["positive"] = pos
        out["positive_pct"] = round(100.0 * pos / dataset.n_rows, 1)
    else:
        out["class_min"] = float(dataset.labels.min())
        out["class_max"] = float(dataset.labels.max())
    return out


def load_manifest(path) -> Community:
    """Load a community manifest (JSON) and every dataset it lists.

    Schema:
      {"name": str, "task": "classification"|"regression",
       "positive_rule": str?, "class_column": str?,
       "datasets": [{"name": str, "version": str?, "path": str}, ...]}
    CSV paths are resolved relative to the manifest file.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such manifest: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    for key in ("name", "task", "datasets"):
        if key not in doc:
            raise ConfigError(f"{path}: manifest missing {key!r}")
    try:
        task = TaskKind(doc["task"])
    except ValueError:
        raise ConfigError(f"{path}: unknown task kind {doc['task']!r}") from None
    rule = doc.get("positive_rule", DEFAULT_POSITIVE_RULE)
    if task is TaskKind.CLASSIFICATION:
        parse_positive_rule(rule)
    class_column = doc.get("class_column")
    if not isinstance(doc["datasets"], list) or not doc["datasets"]:
        raise ConfigError(f"{path}: manifest lists no datasets")
    datasets = []
    for entry in doc["datasets"]:
        if "path" not in entry or "name" not in entry:
            raise ConfigError(f"{path}: dataset entry needs 'name' and 'path'")
        csv_path = (path.parent / entry["path"]).resolve()
        datasets.append(
            load_csv(
                csv_path,
                positive_rule=rule,
                class_column=class_column,
                task=task,
                name=entry["name"],
                version=entry.get("version"),
            )
        )
    return make_community(doc["name"], datasets, task, positive_rule=rule)
