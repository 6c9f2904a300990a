"""Non-parametric ranking machinery: A12, bootstrap test, Scott-Knott.

Scott-Knott sorts sample sets by median, finds the between-set split
maximizing the expected squared mean difference E(delta), and commits
the split only when BOTH the mean-difference bootstrap test and the A12
effect size agree the halves differ. Ranks are contiguous from 1, best
first.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataValidationError


@dataclass(frozen=True)
class SampleSet:
    """One named distribution of repeated-run scores."""

    name: str
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DataValidationError(f"sample set {self.name!r} is empty")
        if not all(np.isfinite(vals)):
            raise DataValidationError(f"sample set {self.name!r} has non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def iqr(self) -> float:
        q75, q25 = np.percentile(self.values, [75, 25])
        return float(q75 - q25)


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # keep pytest from collecting this as a test class

    bootstrap_resamples: int = 512
    confidence: float = 0.99
    a12_threshold: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError("confidence must lie in (0, 1)")
        if not 0.5 <= self.a12_threshold <= 1.0:
            raise ConfigError("a12_threshold must lie in [0.5, 1]")
        if self.bootstrap_resamples < 1:
            raise ConfigError("bootstrap_resamples must be >= 1")


@dataclass(frozen=True)
class RankedGroups:
    """Contiguous ranks (1 = best) over named sample sets."""

    groups: tuple  # of (rank, tuple of names)
    direction: str  # "higher" or "lower" is better

    def rank_of(self, name: str) -> int:
        for rank, members in self.groups:
            if name in members:
                return rank
        raise KeyError(name)

    def top(self) -> tuple:
        return self.groups[0][1]

    def all_names(self) -> list:
        return [n for _, members in self.groups for n in members]


def a12(xs, ys) -> float:
    """P(x > y) with ties half-weighted, over all cross pairs."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size == 0 or ys.size == 0:
        raise DataValidationError("a12 needs non-empty samples")
    ys_sorted = np.sort(ys)
    greater = np.searchsorted(ys_sorted, xs, side="left").sum()
    ties = (np.searchsorted(ys_sorted, xs, side="right") -
            np.searchsorted(ys_sorted, xs, side="left")).sum()
    return (float(greater) + 0.5 * float(ties)) / (xs.size * ys.size)


def bootstrap_test(xs, ys, cfg: TestConfig = TestConfig(), seed=None) -> dict:
    """Efron-Tibshirani mean-difference bootstrap.

    Both samples are shifted to the pooled mean, resampled with
    replacement, and the observed |mean difference| is compared against
    the resampled distribution. Significant iff the exceedance fraction
    falls below 1 - confidence.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2 or ys.size < 2:
        raise DataValidationError("bootstrap_test needs >= 2 values per sample")
    observed = abs(float(xs.mean()) - float(ys.mean()))
    pooled_mean = float(np.concatenate([xs, ys]).mean())
    xs_c = xs - xs.mean() + pooled_mean
    ys_c = ys - ys.mean() + pooled_mean
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    b = cfg.bootstrap_resamples
    bx = xs_c[rng.integers(0, xs.size, (b, xs.size))].mean(axis=1)
    by = ys_c[rng.integers(0, ys.size, (b, ys.size))].mean(axis=1)
    exceed = float(np.mean(np.abs(bx - by) >= observed))
    return {
        "significant": bool(exceed < 1.0 - cfg.confidence),
        "observed": observed,
        "p": exceed,
    }


def expected_delta(values, split_point: int) -> float:
    """E(delta) of splitting a sorted list at split_point.

    (ms/ls)*(mean(m) - mean(l))^2 + (ns/ls)*(mean(n) - mean(l))^2
    for m = values[:split_point], n = values[split_point:].
    """
    values = np.asarray(values, dtype=np.float64)
    ls = values.size
    if not 1 <= split_point < ls:
        raise DataValidationError(f"split point {split_point} out of range for {ls} values")
    mu = values.mean()
    m = values[:split_point]
    n = values[split_point:]
    return float(
        (m.size / ls) * (m.mean() - mu) ** 2 + (n.size / ls) * (n.mean() - mu) ** 2
    )


def _split_agrees(left, right, cfg, seed) -> bool:
    boot = bootstrap_test(left, right, cfg, seed=seed)
    if not boot["significant"]:
        return False
    effect = a12(left, right)
    return max(effect, 1.0 - effect) >= cfg.a12_threshold


def _scott_knott(ordered, cfg, rank, counter, out):
    """Recurse over sample sets already sorted best-first."""
    if len(ordered) == 1:
        out.append((rank, tuple(s.name for s in ordered)))
        return rank + 1
    pooled = [np.asarray(s.values) for s in ordered]
    flat = np.concatenate(pooled)
    best_split, best_delta = None, 0.0
    offset = 0
    for i in range(1, len(ordered)):
        offset += pooled[i - 1].size
        delta = expected_delta(flat, offset)
        if delta > best_delta:
            best_delta, best_split = delta, i
    committed = False
    if best_split is not None:
        offset = sum(p.size for p in pooled[:best_split])
        left, right = flat[:offset], flat[offset:]
        if left.size >= 2 and right.size >= 2:
            counter[0] += 1
            seed = np.random.SeedSequence([cfg.seed, counter[0]]).generate_state(1)[0]
            committed = _split_agrees(left, right, cfg, seed)
    if committed:
        rank = _scott_knott(ordered[:best_split], cfg, rank, counter, out)
        rank = _scott_knott(ordered[best_split:], cfg, rank, counter, out)
        return rank
    out.append((rank, tuple(s.name for s in ordered)))
    return rank + 1


def scott_knott(samples, cfg: TestConfig = TestConfig(), direction: str = "higher") -> RankedGroups:
    """Rank sample sets; members of one rank are statistically indistinguishable."""
    samples = list(samples)
    if not samples:
        raise DataValidationError("scott_knott needs at least one sample set")
    if direction not in ("higher", "lower"):
        raise ConfigError(f"unknown direction {direction!r}")
    names = [s.name for s in samples]
    if len(set(names)) != len(names):
        raise DataValidationError("duplicate sample-set names")
    sign = -1.0 if direction == "higher" else 1.0
    ordered = sorted(samples, key=lambda s: (sign * s.median, s.name))
    out = []
    counter = [0]  # deterministic per-split seed indexing
    _scott_knott(ordered, cfg, 1, counter, out)
    return RankedGroups(groups=tuple(out), direction=direction)
