"""DISCOVER / TRANSFER / MONITOR, plus the comparison studies.

Every repeated evaluation derives its seed from the master seed and the
(holdout, source, target, repeat) indices, so results are identical at
any worker count and the pair grid can be evaluated in any order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Community, ProjectDataset, TaskKind, make_community
from .errors import DataValidationError, SchemaMismatchError
from .forest import ForestParams, feature_importance, make_strategy, rebalance, train_forest
from .metrics import g_from_labels, sa
from .stats import RankedGroups, SampleSet, TestConfig, a12, bootstrap_test, scott_knott


@dataclass(frozen=True)
class PairEvaluation:
    source: str
    target: str
    metric: str  # "G" or "SA"
    scores: SampleSet


@dataclass(frozen=True)
class HoldoutResult:
    holdout: str
    ranking: RankedGroups
    bellwethers: tuple  # top-rank source names
    pooled_median: float
    pooled_iqr: float
    holdout_median: float  # top source applied to the holdout itself
    holdout_iqr: float


@dataclass(frozen=True)
class BellwetherReport:
    community: str
    metric: str
    per_holdout: tuple  # of HoldoutResult
    overall_bellwether: tuple  # names; empty when NotFound
    verdict: str  # "Found" | "NotFound"


@dataclass(frozen=True)
class MonitorStatus:
    state: str  # "OK" | "Degraded"
    baseline_median: float
    recent_median: float
    significant: bool
    effect: float


@dataclass(frozen=True)
class WTL:
    method: str
    wins: int
    ties: int
    losses: int


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _metric_for(task: TaskKind) -> str:
    return "G" if task is TaskKind.CLASSIFICATION else "SA"


def _score(task: TaskKind, truth, predictions) -> float:
    if task is TaskKind.CLASSIFICATION:
        return g_from_labels(predictions, truth)
    return sa(truth, predictions)


def evaluate_pair(
    source: ProjectDataset,
    target: ProjectDataset,
    repeats: int = 30,
    seed: int = 0,
    strategy: str = "direct",
    params: ForestParams = ForestParams(),
    ratio=(1, 2),
    seed_key=None,
) -> PairEvaluation:
    """Fit on the source and score on the target, `repeats` times.

    `seed_key` overrides the default (seed, repeat) seed derivation so
    grid runs can key repeats by their position in the grid.
    """
    if source.attributes != target.attributes:
        raise SchemaMismatchError(
            f"{source.name} -> {target.name}: attribute schemas differ"
        )
    if (source.name, source.version) == (target.name, target.version):
        raise DataValidationError(f"{source.name}: source and target are the same dataset")
    if source.task is not target.task:
        raise DataValidationError("source/target task kinds differ")
    values = []
    for r in range(repeats):
        key = (seed, r) if seed_key is None else (*seed_key, r)
        run_seed = _derive_seed(*key)
        strat = make_strategy(strategy, ratio=ratio) if strategy == "direct" else make_strategy(strategy)
        try:
            strat.fit(source, replace(params, seed=run_seed))
            preds = strat.predict(target.features, target.attributes)
        except Exception as exc:
            raise type(exc)(f"run {r} ({source.name} -> {target.name}): {exc}") from exc
        values.append(_score(source.task, target.labels, preds))
    label = f"{source.name}->{target.name}"
    return PairEvaluation(
        source=source.name,
        target=target.name,
        metric=_metric_for(source.task),
        scores=SampleSet(name=label, values=tuple(values)),
    )


def _grid_tasks(community, holdout_idx):
    n = len(community)
    for i in range(n):
        if i == holdout_idx:
            continue
        for k in range(n):
            if k == holdout_idx or k == i:
                continue
            yield i, k


def discover(
    community: Community,
    repeats: int = 30,
    seed: int = 0,
    cfg: TestConfig = TestConfig(),
    params: ForestParams = ForestParams(),
    strategy: str = "direct",
    ratio=(1, 2),
    workers: int = 1,
) -> BellwetherReport:
    """Round-robin holdout protocol: name the community's bellwether.

    For each holdout, every remaining ordered source/target pair is
    evaluated; each source's scores are pooled across its targets and
    Scott-Knott ranked. A source top-ranked for a strict majority of
    holdouts is the overall bellwether.
    """
    n = len(community)
    if n < 3:
        raise DataValidationError(
            f"community {community.name!r} needs >= 3 datasets for discovery, has {n}"
        )
    datasets = community.datasets
    metric = _metric_for(community.task)

    tasks = []
    for j in range(n):
        for i, k in _grid_tasks(community, j):
            tasks.append((j, i, k))

    def run(task):
        j, i, k = task
        return task, evaluate_pair(
            datasets[i],
            datasets[k],
            repeats=repeats,
            seed=seed,
            strategy=strategy,
            params=params,
            ratio=ratio,
            seed_key=(seed, j, i, k),
        )

    def run_all(task_list):
        results = {}
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for key, ev in pool.map(run, task_list):
                    results[key] = ev
        else:
            for task in task_list:
                key, ev = run(task)
                results[key] = ev
        return results

    results = run_all(tasks)

    # rank sources per holdout, then evaluate each holdout's best source
    # against the holdout itself (seed key (seed, j, best, j))
    rankings = {}
    best_by_holdout = {}
    pooled_by_holdout = {}
    for j in range(n):
        pooled_sets = []
        for i in range(n):
            if i == j:
                continue
            vals = []
            for k in range(n):
                if k == j or k == i:
                    continue
                vals.extend(results[(j, i, k)].scores.values)
            pooled_sets.append(SampleSet(name=datasets[i].name, values=tuple(vals)))
        cfg_j = replace(cfg, seed=_derive_seed(seed, 7, j))
        ranking = scott_knott(pooled_sets, cfg_j, direction="higher")
        by_median = {s.name: s.median for s in pooled_sets}
        best = max(ranking.top(), key=lambda name: (by_median[name], name))
        rankings[j] = ranking
        best_by_holdout[j] = best
        pooled_by_holdout[j] = next(s for s in pooled_sets if s.name == best)

    names = community.names()
    applied_tasks = [(j, names.index(best_by_holdout[j]), j) for j in range(n)]
    applied_results = run_all(applied_tasks)

    per_holdout = []
    top_counts = {ds.name: 0 for ds in datasets}
    for j in range(n):
        ranking = rankings[j]
        top = ranking.top()
        applied = applied_results[(j, names.index(best_by_holdout[j]), j)].scores
        pooled_best = pooled_by_holdout[j]
        per_holdout.append(
            HoldoutResult(
                holdout=datasets[j].name,
                ranking=ranking,
                bellwethers=tuple(sorted(top)),
                pooled_median=pooled_best.median,
                pooled_iqr=pooled_best.iqr,
                holdout_median=applied.median,
                holdout_iqr=applied.iqr,
            )
        )
        for name in top:
            top_counts[name] += 1

    no_separation = all(len(h.ranking.groups) == 1 for h in per_holdout)
    winners = tuple(sorted(name for name, c in top_counts.items() if c * 2 > n))
    if no_separation or not winners:
        return BellwetherReport(
            community=community.name,
            metric=metric,
            per_holdout=tuple(per_holdout),
            overall_bellwether=(),
            verdict="NotFound",
        )
    return BellwetherReport(
        community=community.name,
        metric=metric,
        per_holdout=tuple(per_holdout),
        overall_bellwether=winners,
        verdict="Found",
    )


def transfer(
    bellwether: ProjectDataset,
    new_project: ProjectDataset,
    repeats: int = 30,
    seed: int = 0,
    strategy: str = "direct",
    params: ForestParams = ForestParams(),
    ratio=(1, 2),
) -> PairEvaluation:
    """Apply an already-discovered bellwether to one new project."""
    return evaluate_pair(
        bellwether,
        new_project,
        repeats=repeats,
        seed=seed,
        strategy=strategy,
        params=params,
        ratio=ratio,
    )


def monitor(
    history,
    baseline_len: int = 5,
    recent_len: int = 5,
    cfg: TestConfig = TestConfig(),
) -> MonitorStatus:
    """Flag degradation of the bellwether on a time-ordered history.

    Pools the first `baseline_len` evaluations against the last
    `recent_len`; Degraded only when the bootstrap test is significant
    AND the baseline is stochastically greater with A12 >= threshold.
    Improvement never triggers.
    """
    history = list(history)
    if len(history) < baseline_len + recent_len:
        raise DataValidationError(
            f"history of {len(history)} < baseline {baseline_len} + recent {recent_len}"
        )
    baseline = np.concatenate([np.asarray(ev.scores.values) for ev in history[:baseline_len]])
    recent = np.concatenate([np.asarray(ev.scores.values) for ev in history[-recent_len:]])
    boot = bootstrap_test(baseline, recent, cfg)
    effect = a12(baseline, recent)
    degraded = boot["significant"] and effect >= cfg.a12_threshold
    return MonitorStatus(
        state="Degraded" if degraded else "OK",
        baseline_median=float(np.median(baseline)),
        recent_median=float(np.median(recent)),
        significant=boot["significant"],
        effect=effect,
    )


def win_tie_loss(contexts, cfg: TestConfig = TestConfig()) -> list:
    """Per-method W/T/L over comparison contexts.

    Each context maps method names to SampleSets; a method wins a
    context when it is sole rank 1, ties when rank 1 is shared and it
    belongs to it, and loses otherwise.
    """
    contexts = list(contexts)
    if not contexts:
        raise DataValidationError("win_tie_loss needs at least one context")
    method_set = frozenset(s.name for s in contexts[0]["samples"])
    counts = {m: [0, 0, 0] for m in sorted(method_set)}
    for idx, ctx in enumerate(contexts):
        samples = list(ctx["samples"])
        if frozenset(s.name for s in samples) != method_set:
            raise DataValidationError(
                f"context {ctx.get('context', idx)!r} has a different method set"
            )
        cfg_c = replace(cfg, seed=_derive_seed(cfg.seed, 11, idx))
        ranking = scott_knott(samples, cfg_c, direction="higher")
        top = ranking.top()
        for m in method_set:
            if m in top:
                counts[m][0 if len(top) == 1 else 1] += 1
            else:
                counts[m][2] += 1
    return [WTL(method=m, wins=c[0], ties=c[1], losses=c[2]) for m, c in counts.items()]


def _group_versions(community: Community) -> dict:
    from .data import order_versions

    groups = {}
    for ds in community.datasets:
        groups.setdefault(ds.name, []).append(ds)
    return {name: order_versions(lst) for name, lst in groups.items()}


def _pick_bellwether(datasets, community, repeats, seed, cfg, params, strategy, ratio):
    """Discover among >= 3 datasets; fall back to pairwise medians below that."""
    if len(datasets) >= 3:
        sub = make_community(
            community.name, datasets, community.task, community.positive_rule
        )
        report = discover(
            sub, repeats=repeats, seed=seed, cfg=cfg, params=params,
            strategy=strategy, ratio=ratio,
        )
        if report.overall_bellwether:
            return report.overall_bellwether[0]
        top_counts = {}
        for h in report.per_holdout:
            for name in h.bellwethers:
                top_counts[name] = top_counts.get(name, 0) + 1
        return max(sorted(top_counts), key=lambda n: top_counts[n])
    if len(datasets) == 1:
        return datasets[0].name
    medians = {}
    for src in datasets:
        vals = []
        for tgt in datasets:
            if tgt is src:
                continue
            ev = evaluate_pair(
                src, tgt, repeats=repeats, seed=seed, strategy=strategy,
                params=params, ratio=ratio,
            )
            vals.extend(ev.scores.values)
        medians[src.name] = float(np.median(vals))
    return max(sorted(medians), key=lambda n: medians[n])


def compare_within_vs_bellwether(
    community: Community,
    repeats: int = 30,
    seed: int = 0,
    cfg: TestConfig = TestConfig(),
    params: ForestParams = ForestParams(),
    strategy: str = "direct",
    ratio=(1, 2),
) -> list:
    """Bellwether data vs each project's own previous version.

    Per project: hold out its newest version; the bellwether arm trains
    on the bellwether discovered from the other projects' second-newest
    versions, the local arm trains on the project's own second-newest
    version; both predict the held-out version.
    """
    versions = _group_versions(community)
    for name, lst in versions.items():
        if len(lst) < 2:
            raise DataValidationError(f"project {name!r} needs >= 2 versions")
    rows = []
    for p_idx, name in enumerate(sorted(versions)):
        holdout = versions[name][-1]
        local_train = versions[name][-2]
        others = [versions[o][-2] for o in sorted(versions) if o != name]
        bw_name = _pick_bellwether(
            others, community, repeats, _derive_seed(seed, 13, p_idx),
            cfg, params, strategy, ratio,
        )
        bw_train = next(d for d in others if d.name == bw_name)
        ev_bw = evaluate_pair(
            bw_train, holdout, repeats=repeats, seed=_derive_seed(seed, 17, p_idx),
            strategy=strategy, params=params, ratio=ratio,
        )
        ev_local = evaluate_pair(
            local_train, holdout, repeats=repeats, seed=_derive_seed(seed, 19, p_idx),
            strategy=strategy, params=params, ratio=ratio,
        )
        bw_set = SampleSet(name="bellwether", values=ev_bw.scores.values)
        local_set = SampleSet(name="local", values=ev_local.scores.values)
        ranking = scott_knott(
            [bw_set, local_set], replace(cfg, seed=_derive_seed(seed, 23, p_idx))
        )
        top = ranking.top()
        winner = "tie" if len(top) == 2 else top[0]
        rows.append(
            {
                "project": name,
                "bellwether": bw_name,
                "bellwether_median": bw_set.median,
                "local_median": local_set.median,
                "bellwether_scores": bw_set,
                "local_scores": local_set,
                "winner": winner,
            }
        )
    return rows


def _concat_datasets(datasets) -> ProjectDataset:
    base = datasets[0]
    features = np.vstack([d.features for d in datasets])
    labels = np.concatenate([d.labels for d in datasets])
    tag = "+".join(d.version or "?" for d in datasets)
    return ProjectDataset(
        name=f"{base.name}[{tag}]",
        attributes=base.attributes,
        features=features,
        labels=labels,
        task=base.task,
        version=None,
    )


def incremental_sufficiency(
    versions,
    targets,
    repeats: int = 30,
    seed: int = 0,
    cfg: TestConfig = TestConfig(),
    params: ForestParams = ForestParams(),
    strategy: str = "direct",
    ratio=(1, 2),
) -> dict:
    """How much bellwether history is enough?

    `versions` is ordered newest-first; cumulative unions {vN},
    {vN,vN-1}, ... are each scored against every target and Scott-Knott
    compared per target. Flags the smallest union that is statistically
    indistinguishable from the best.
    """
    versions = list(versions)
    targets = list(targets)
    if len(versions) < 2:
        raise DataValidationError("incremental study needs >= 2 versions")
    if not targets:
        raise DataValidationError("incremental study needs >= 1 target")
    unions = [_concat_datasets(versions[: i + 1]) for i in range(len(versions))]
    per_target = []
    for t_idx, target in enumerate(targets):
        sets = []
        for u_idx, union in enumerate(unions):
            ev = evaluate_pair(
                union, target, repeats=repeats, seed=seed, strategy=strategy,
                params=params, ratio=ratio, seed_key=(seed, 29, t_idx, u_idx),
            )
            sets.append(SampleSet(name=union.name, values=ev.scores.values))
        ranking = scott_knott(sets, replace(cfg, seed=_derive_seed(seed, 31, t_idx)))
        top = ranking.top()
        sufficient = next(u.name for u in unions if u.name in top)
        per_target.append(
            {
                "target": target.name,
                "ranking": ranking,
                "medians": {s.name: s.median for s in sets},
                "smallest_sufficient": sufficient,
            }
        )
    latest = unions[0].name
    latest_suffices = sum(1 for row in per_target if row["smallest_sufficient"] == latest)
    return {
        "unions": [u.name for u in unions],
        "per_target": per_target,
        "latest_sufficient_on": latest_suffices,
        "targets": len(per_target),
        "latest_sufficient_majority": latest_suffices * 2 > len(per_target),
    }


def source_instability_report(
    community: Community,
    params: ForestParams = ForestParams(),
    seed: int = 0,
    k: int = 5,
    bellwether: str | None = None,
    ratio=(1, 2),
) -> list:
    """Top-k important features per source; surfaces rank instability."""
    rows = []
    for idx, ds in enumerate(community.datasets):
        train = ds
        run_seed = _derive_seed(seed, 37, idx)
        if ds.task is TaskKind.CLASSIFICATION:
            train = rebalance(ds, ratio, seed=run_seed)
        forest = train_forest(train, replace(params, seed=run_seed))
        ranked = feature_importance(forest)[:k]
        rows.append(
            {
                "source": ds.name,
                "is_bellwether": ds.name == bellwether,
                "top_features": ranked,
            }
        )
    return rows
