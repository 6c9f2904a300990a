"""Synthetic communities with a planted bellwether.

Used by the test suite and the bundled example manifest: one source is
generated straight from the target-generating rule, the rest get a
fraction of their labels flipped, so discovery should name the planted
source.
"""

import json
from pathlib import Path

import numpy as np

from .data import Community, ProjectDataset, TaskKind, make_community, save_csv


def _rule_labels(features: np.ndarray) -> np.ndarray:
    return (features[:, 0] + features[:, 1] > 1.0).astype(np.float64)


def make_planted_community(
    n_sources: int = 4,
    rows: int = 200,
    n_features: int = 6,
    noise: float = 0.3,
    seed: int = 0,
    name: str = "synthetic",
) -> Community:
    """Classification community: 'planted' is clean, the rest label-noisy."""
    rng = np.random.default_rng(seed)
    attrs = tuple(f"f{i}" for i in range(n_features))
    datasets = []
    for s in range(n_sources):
        feats = rng.random((rows, n_features))
        labels = _rule_labels(feats)
        if s > 0:
            n_flip = int(np.ceil(noise * rows))
            flip = rng.choice(rows, n_flip, replace=False)
            labels = labels.copy()
            labels[flip] = 1.0 - labels[flip]
        datasets.append(
            ProjectDataset(
                name="planted" if s == 0 else f"noisy{s}",
                attributes=attrs,
                features=feats,
                labels=labels,
                task=TaskKind.CLASSIFICATION,
            )
        )
    return make_community(name, datasets, TaskKind.CLASSIFICATION)


def make_regression_community(
    n_sources: int = 3,
    rows: int = 120,
    n_features: int = 4,
    seed: int = 0,
    name: str = "synthetic-effort",
) -> Community:
    """Regression community with a shared linear effort rule plus noise."""
    rng = np.random.default_rng(seed)
    attrs = tuple(f"f{i}" for i in range(n_features))
    weights = rng.uniform(1.0, 5.0, n_features)
    datasets = []
    for s in range(n_sources):
        feats = rng.random((rows, n_features))
        effort = feats @ weights + rng.normal(0.0, 0.1, rows) + 1.0
        datasets.append(
            ProjectDataset(
                name=f"proj{s}",
                attributes=attrs,
                features=feats,
                labels=effort,
                task=TaskKind.REGRESSION,
            )
        )
    return make_community(name, datasets, TaskKind.REGRESSION)


def write_community(community: Community, directory) -> Path:
    """Write a community to CSV files plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for ds in community.datasets:
        fname = f"{ds.name}{'-' + ds.version if ds.version else ''}.csv"
        save_csv(ds, directory / fname)
        entry = {"name": ds.name, "path": fname}
        if ds.version:
            entry["version"] = ds.version
        entries.append(entry)
    manifest = {
        "name": community.name,
        "task": community.task.value,
        "positive_rule": "> 0",
        "class_column": "klass",
        "datasets": entries,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return path
