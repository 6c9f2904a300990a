import numpy as np
import pytest

from bellwether.data import ProjectDataset, TaskKind


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, header, rows):
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


def separable_dataset(name="sep", rows=60, seed=0, task=TaskKind.CLASSIFICATION):
    """One informative feature: x0 < 0 -> negative, x0 > 0 -> positive."""
    rng = np.random.default_rng(seed)
    x0 = np.concatenate([rng.uniform(-2, -0.1, rows // 2), rng.uniform(0.1, 2, rows - rows // 2)])
    noise = rng.normal(size=(rows, 2))
    feats = np.column_stack([x0, noise])
    labels = (x0 > 0).astype(float)
    return ProjectDataset(
        name=name,
        attributes=("x0", "n1", "n2"),
        features=feats,
        labels=labels,
        task=task,
    )


@pytest.fixture
def separable():
    return separable_dataset()
