"""Dynamic stochastic block model generator with a diminishing community.

Communities start as contiguous, near-equal id ranges (remainder to the last
community). At every step after the first, a fixed number of members of the
diminishing community migrate: each is relabeled to a uniformly chosen other
community and every edge incident to a migrant is resampled under the new
labels, while all other edges carry over unchanged. That keeps deltas small,
which is exactly the regime the incremental SVD update targets.

All randomness flows through one Rng stream in a documented order: initial
adjacency, then per step (migrant choice, destination draws, migrant
out-rows in ascending node order, migrant in-columns in ascending node
order). Identical (params, seed) reproduce the series bit-for-bit.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graphs import GraphSnapshot, SnapshotSequence
from .rng import Rng


@dataclass(frozen=True)
class SbmParams:
    node_num: int
    community_num: int
    length: int
    diminish_community: int
    node_change_num: int
    p_in: float = 0.1
    p_out: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.community_num < 2:
            raise ValueError("community_num must be >= 2")
        if self.node_num < self.community_num:
            raise ValueError("node_num must be >= community_num")
        if not 0 <= self.diminish_community < self.community_num:
            raise ValueError("diminish_community outside community range")
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise ValueError("probabilities must satisfy 0 <= p_out < p_in <= 1")
        migrations = self.node_change_num * (self.length - 1)
        initial = self.community_sizes()[self.diminish_community]
        if not 0 < migrations < initial:
            raise ValueError(
                f"total migrations {migrations} must be in (0, {initial}) "
                "so the diminishing community is never exhausted"
            )

    def community_sizes(self) -> list:
        base = self.node_num // self.community_num
        sizes = [base] * (self.community_num - 1)
        sizes.append(self.node_num - base * (self.community_num - 1))
        return sizes

    def initial_labels(self) -> np.ndarray:
        labels = np.empty(self.node_num, dtype=np.int64)
        start = 0
        for c, size in enumerate(self.community_sizes()):
            labels[start : start + size] = c
            start += size
        return labels


@dataclass(frozen=True)
class DynamicSbmSeries:
    """Generated sequence plus ground truth labels and migration records."""

    sequence: SnapshotSequence
    labels: list  # per snapshot, int64 array of community ids
    migrations: list  # per snapshot, list of (node, old_community, new_community)

    @property
    def migrated(self) -> list:
        """Per-snapshot set of node ids that changed community entering that step."""
        return [frozenset(node for node, _, _ in step) for step in self.migrations]


def generate_sbm_snapshot(labels, p_in: float, p_out: float, rng: Rng) -> GraphSnapshot:
    """Sample one directed SBM snapshot: each ordered pair u != v carries an
    edge of weight 1.0 with probability p_in (same community) or p_out."""
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    adj = kernels.block_sample(rng.random((n, n)), labels, float(p_in), float(p_out))
    return _snapshot_from_dense(adj)


def _snapshot_from_dense(adj: np.ndarray) -> GraphSnapshot:
    us, vs = np.nonzero(adj)
    return GraphSnapshot(adj.shape[0], zip(us.tolist(), vs.tolist(), adj[us, vs].tolist()))


def diminish_series(params: SbmParams, rng: Rng | None = None) -> DynamicSbmSeries:
    """Generate the full diminishing-community series for params."""
    if rng is None:
        rng = Rng(params.seed)
    n = params.node_num
    labels = params.initial_labels()
    adj = kernels.block_sample(
        rng.random((n, n)), labels, params.p_in, params.p_out
    )

    snapshots = [_snapshot_from_dense(adj)]
    label_history = [labels.copy()]
    migrations: list = [[]]
    others = [c for c in range(params.community_num) if c != params.diminish_community]

    for _ in range(1, params.length):
        members = np.flatnonzero(labels == params.diminish_community)
        if members.size < params.node_change_num:
            raise ValueError("diminishing community exhausted")
        movers = np.sort(rng.choice_no_replace(members, params.node_change_num))
        step_records = []
        for m in movers.tolist():
            dest = others[rng.integers(len(others))]
            step_records.append((m, int(labels[m]), dest))
            labels[m] = dest

        adj = adj.copy()
        mover_mask = np.zeros(n, dtype=bool)
        mover_mask[movers] = True
        # Out-rows first (covers migrant-migrant pairs), then in-columns for
        # the remaining non-migrant sources; one fresh uniform row per draw
        # keeps the stream layout independent of what gets accepted.
        for m in movers.tolist():
            u = rng.random(n)
            probs = np.where(labels == labels[m], params.p_in, params.p_out)
            row = (u < probs).astype(np.float64)
            row[m] = 0.0
            adj[m, :] = row
        for m in movers.tolist():
            u = rng.random(n)
            probs = np.where(labels == labels[m], params.p_in, params.p_out)
            col = (u < probs).astype(np.float64)
            adj[~mover_mask, m] = col[~mover_mask]

        snapshots.append(_snapshot_from_dense(adj))
        label_history.append(labels.copy())
        migrations.append(step_records)

    return DynamicSbmSeries(
        sequence=SnapshotSequence(snapshots),
        labels=label_history,
        migrations=migrations,
    )


def save_labels(series: DynamicSbmSeries, path) -> None:
    """Lines `t node community`, sorted by (t, node)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t, labels in enumerate(series.labels):
            for node, c in enumerate(labels.tolist()):
                fh.write(f"{t} {node} {c}\n")


def load_labels(path) -> list:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            t, node, c = (int(x) for x in s.split())
            rows.append((t, node, c))
    if not rows:
        raise ValueError(f"{path}: empty labels file")
    t_max = max(r[0] for r in rows)
    n = max(r[1] for r in rows) + 1
    out = [np.full(n, -1, dtype=np.int64) for _ in range(t_max + 1)]
    for t, node, c in rows:
        out[t][node] = c
    for t, labels in enumerate(out):
        if np.any(labels < 0):
            raise ValueError(f"{path}: missing labels at snapshot {t}")
    return out


def save_migrations(series: DynamicSbmSeries, path) -> None:
    """Lines `t node old_community new_community`, sorted by (t, node)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t, step in enumerate(series.migrations):
            for node, old, new in sorted(step):
                fh.write(f"{t} {node} {old} {new}\n")


def load_migrations(path, length: int) -> list:
    out: list = [[] for _ in range(length)]
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            t, node, old, new = (int(x) for x in s.split())
            if not 0 <= t < length:
                raise ValueError(f"{path}: migration at t={t} outside [0,{length})")
            out[t].append((node, old, new))
    return out
