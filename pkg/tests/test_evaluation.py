"""Evaluation harness: ranking metrics, splits, classification, migration
proximity, and the projection export.

Ranking metrics are compared for exact equality against the brute-force
oracles; both sides accumulate hit precisions in the same rank order, so
no float tolerance is needed.
"""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynembed.evaluation import (EvalError, EvalReport, ScoredPairs,
                                 average_precision, candidate_pairs,
                                 export_projection, mean_average_precision,
                                 migration_proximity_stat, node_classification,
                                 precision_at_k, reconstruction_eval,
                                 save_report, static_lp_eval, static_lp_split,
                                 temporal_lp_eval, _f1_scores)
from dynembed.graphs import GraphSnapshot, SnapshotSequence, dense_adjacency
from dynembed.rng import Rng
from dynembed.sbm import generate_sbm_snapshot
from dynembed.series import EmbeddingSeries

from oracles import (brute_average_precision, brute_map,
                     brute_precision_at_k, brute_ranking)


def _random_instance(seed, max_n=12):
    """Random candidate list, scores, and truth set on up to max_n nodes."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, max_n + 1))
    pairs = candidate_pairs(n)
    keep = rng.random(len(pairs)) < 0.7
    pairs = pairs[keep]
    scores = np.round(rng.random(len(pairs)), 2)  # coarse grid forces ties
    truth = {tuple(map(int, p)) for p in pairs[rng.random(len(pairs)) < 0.3]}
    return pairs, scores, truth


def _series_from(y, t_start=0):
    return EmbeddingSeries(y_src=[y], y_tgt=[y.copy()], method="test",
                           t_start=t_start)


# --- scored pairs -----------------------------------------------------------


def test_scored_pairs_validation():
    with pytest.raises(ValueError, match="length mismatch"):
        ScoredPairs(np.array([[0, 1]]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="finite"):
        ScoredPairs(np.array([[0, 1]]), np.array([np.nan]))
    with pytest.raises(ValueError, match="duplicate"):
        ScoredPairs(np.array([[0, 1], [0, 1]]), np.array([1.0, 2.0]))


def test_ranking_breaks_ties_lexicographically():
    sp = ScoredPairs(np.array([[1, 0], [0, 1], [0, 0]]),
                     np.array([1.0, 1.0, 2.0]))
    assert [tuple(p) for p in sp.ordered_pairs()] == [(0, 0), (0, 1), (1, 0)]


def test_ranking_matches_brute_force():
    for seed in range(10):
        pairs, scores, _ = _random_instance(seed)
        sp = ScoredPairs(pairs, scores)
        assert [tuple(map(int, p)) for p in sp.ordered_pairs()] == \
            brute_ranking(pairs, scores)


# --- precision@k and AP -----------------------------------------------------


def test_precision_at_k_hand_cases():
    sp = ScoredPairs(np.array([[0, 1], [0, 2], [0, 3]]),
                     np.array([3.0, 2.0, 1.0]))
    truth = {(0, 1), (0, 3)}
    assert precision_at_k(sp, truth, 1) == 1.0
    assert precision_at_k(sp, truth, 2) == 0.5
    assert precision_at_k(sp, truth, 3) == pytest.approx(2 / 3)


def test_precision_at_k_bounds():
    sp = ScoredPairs(np.array([[0, 1]]), np.array([1.0]))
    with pytest.raises(EvalError, match="k=0"):
        precision_at_k(sp, {(0, 1)}, 0)
    with pytest.raises(EvalError, match="k=2"):
        precision_at_k(sp, {(0, 1)}, 2)


def test_average_precision_hand_case():
    sp = ScoredPairs(np.array([[0, 1], [0, 2], [0, 3]]),
                     np.array([3.0, 2.0, 1.0]))
    assert average_precision(sp, {(0, 1), (0, 3)}) == pytest.approx(5 / 6)


def test_average_precision_empty_truth():
    sp = ScoredPairs(np.array([[0, 1]]), np.array([1.0]))
    with pytest.raises(EvalError, match="true edge"):
        average_precision(sp, set())


def test_metrics_match_brute_force_exactly():
    for seed in range(20):
        pairs, scores, truth = _random_instance(seed)
        if not truth:
            continue
        sp = ScoredPairs(pairs, scores)
        for k in (1, len(sp) // 2 or 1, len(sp)):
            assert precision_at_k(sp, truth, k) == \
                brute_precision_at_k(pairs, scores, truth, k)
        assert average_precision(sp, truth) == \
            brute_average_precision(pairs, scores, truth)
        assert mean_average_precision(sp, truth) == \
            brute_map(pairs, scores, truth)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_metric_oracle_equivalence_property(seed):
    pairs, scores, truth = _random_instance(seed)
    if not truth:
        return
    sp = ScoredPairs(pairs, scores)
    assert [tuple(map(int, p)) for p in sp.ordered_pairs()] == brute_ranking(pairs, scores)
    k = 1 + seed % len(sp)
    assert precision_at_k(sp, truth, k) == brute_precision_at_k(pairs, scores, truth, k)
    assert mean_average_precision(sp, truth) == brute_map(pairs, scores, truth)


def test_hit_counts_grow_with_k():
    pairs, scores, truth = _random_instance(3)
    sp = ScoredPairs(pairs, scores)
    hits = [precision_at_k(sp, truth, k) * k for k in range(1, len(sp) + 1)]
    assert all(b >= a - 1e-9 for a, b in zip(hits, hits[1:]))


def test_map_perfect_scores():
    g = generate_sbm_snapshot(np.repeat([0, 1], 5), 0.8, 0.2, Rng(5))
    pairs = candidate_pairs(10)
    scores = dense_adjacency(g)[pairs[:, 0], pairs[:, 1]]
    sp = ScoredPairs(pairs, scores)
    assert mean_average_precision(sp, set(g.edge_pairs())) == 1.0


def test_map_requires_a_contributing_node():
    sp = ScoredPairs(np.array([[0, 1]]), np.array([1.0]))
    with pytest.raises(EvalError, match="no node"):
        mean_average_precision(sp, set())


def test_map_counts_nodes_without_candidates():
    # node 1's true edge has no candidate, so its AP term is 0
    sp = ScoredPairs(np.array([[0, 1]]), np.array([1.0]))
    assert mean_average_precision(sp, {(0, 1), (1, 0)}) == 0.5


# --- splits and task evaluations ---------------------------------------------


def test_split_partitions_the_edge_set():
    g = generate_sbm_snapshot(np.repeat([0, 1], 10), 0.5, 0.1, Rng(1))
    edges = {(u, v) for u, v, _ in g.edges()}
    train, hidden = static_lp_split(g, 0.2, Rng(2))
    train_edges = {(u, v) for u, v, _ in train.edges()}
    assert train_edges | hidden == edges
    assert not train_edges & hidden
    assert len(hidden) == -(-len(edges) // 5)  # ceil(0.2 |E|)
    again_train, again_hidden = static_lp_split(g, 0.2, Rng(2))
    assert again_hidden == hidden and again_train == train


def test_split_validation():
    g = GraphSnapshot(3, [(0, 1, 1.0)])
    with pytest.raises(EvalError, match="2 edges"):
        static_lp_split(g, 0.5, Rng(0))
    with pytest.raises(ValueError, match="hide_fraction"):
        static_lp_split(g, 1.0, Rng(0))


def test_candidate_pairs_small():
    pairs = {tuple(p) for p in candidate_pairs(3)}
    assert pairs == {(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)}
    without = {tuple(p) for p in candidate_pairs(3, exclude={(0, 1), (2, 1)})}
    assert without == pairs - {(0, 1), (2, 1)}


def test_reconstruction_perfect_scores():
    g = generate_sbm_snapshot(np.repeat([0, 1], 6), 0.7, 0.1, Rng(3))
    report = reconstruction_eval(dense_adjacency(g), g, [1, g.num_edges],
                                 method="oracle")
    assert report.task == "reconstruction"
    assert report.precision_at_k == [1.0, 1.0]
    assert report.map == 1.0
    assert not report.empty_truth


def test_reconstruction_drops_oversized_k():
    g = GraphSnapshot(3, [(0, 1, 1.0), (1, 2, 1.0)])
    report = reconstruction_eval(dense_adjacency(g), g, [2, 500])
    assert report.k_grid == [2]


def test_static_lp_eval_ranks_hidden_edges():
    g = generate_sbm_snapshot(np.repeat([0, 1], 8), 0.6, 0.1, Rng(4))
    train, hidden = static_lp_split(g, 0.3, Rng(5))
    report = static_lp_eval(dense_adjacency(g), train, hidden,
                            [1, len(hidden)])
    assert report.task == "static_lp"
    assert report.precision_at_k == [1.0, 1.0]
    assert report.map == 1.0


def test_temporal_lp_perfect_oracle():
    seq = SnapshotSequence([
        generate_sbm_snapshot(np.repeat([0, 1], 6), 0.6, 0.1, Rng(6)),
        generate_sbm_snapshot(np.repeat([0, 1], 6), 0.6, 0.1, Rng(7)),
    ])
    scores = dense_adjacency(seq[1])
    report = temporal_lp_eval(scores, seq, 0, [seq[1].num_edges], mode="all")
    assert report.mode == "all"
    assert report.precision_at_k == [1.0]
    assert report.map == 1.0


def test_temporal_lp_no_new_edges_is_flagged():
    g = generate_sbm_snapshot(np.repeat([0, 1], 5), 0.5, 0.1, Rng(8))
    seq = SnapshotSequence([g, g])
    report = temporal_lp_eval(np.zeros((10, 10)), seq, 0, [5], mode="new")
    assert report.empty_truth
    assert report.k_grid == []
    assert report.precision_at_k is None and report.map is None


def test_temporal_lp_validation():
    g = GraphSnapshot(3, [(0, 1, 1.0)])
    seq = SnapshotSequence([g, g])
    with pytest.raises(ValueError, match="unknown mode"):
        temporal_lp_eval(np.zeros((3, 3)), seq, 0, [1], mode="future")
    with pytest.raises(EvalError, match="out of range"):
        temporal_lp_eval(np.zeros((3, 3)), seq, 1, [1])
    with pytest.raises(ValueError, match="shape"):
        temporal_lp_eval(np.zeros((2, 2)), seq, 0, [1])


def test_metrics_invariant_under_monotone_transform():
    g = generate_sbm_snapshot(np.repeat([0, 1], 8), 0.5, 0.1, Rng(9))
    scores = Rng(10).random((16, 16))
    a = reconstruction_eval(scores, g, [1, 5, 20])
    b = reconstruction_eval(2.0 * scores + 5.0, g, [1, 5, 20])
    assert a.precision_at_k == b.precision_at_k
    assert a.map == b.map


# --- node classification ------------------------------------------------------


def test_classification_separable_clusters():
    rng = np.random.default_rng(11)
    emb = np.vstack([rng.normal(5.0, 0.1, (20, 4)),
                     rng.normal(-5.0, 0.1, (20, 4))])
    labels = np.repeat([0, 1], 20)
    micro, macro = node_classification(emb, labels, 0.5, seed=0)
    assert micro == 1.0 and macro == 1.0


def test_classification_random_embeddings_score_near_chance():
    micros = []
    for seed in range(20):
        emb = np.random.default_rng(seed).standard_normal((40, 8))
        labels = np.repeat([0, 1], 20)
        micro, _ = node_classification(emb, labels, 0.5, seed=seed)
        micros.append(micro)
    assert 0.35 <= np.mean(micros) <= 0.65


def test_f1_hand_fixture():
    y_true = np.array([0, 0, 1, 1, 2, 2])
    y_pred = np.array([0, 1, 1, 1, 2, 0])
    micro, macro = _f1_scores(y_true, y_pred, np.array([0, 1, 2]))
    assert micro == pytest.approx(2 / 3)
    assert macro == pytest.approx((0.5 + 0.8 + 2 / 3) / 3)


def test_classification_singleton_class_cannot_split():
    emb = np.eye(5)
    labels = np.array([0, 0, 1, 1, 2])  # class 2 has one member
    with pytest.raises(EvalError, match="class 2 absent"):
        node_classification(emb, labels, 0.5)


def test_classification_validation():
    emb = np.eye(4)
    with pytest.raises(EvalError, match="2 classes"):
        node_classification(emb, [1, 1, 1, 1], 0.5)
    with pytest.raises(ValueError, match="length mismatch"):
        node_classification(emb, [0, 1, 0], 0.5)
    with pytest.raises(ValueError, match="train_frac"):
        node_classification(emb, [0, 1, 0, 1], 1.5)


def test_classification_is_seed_dependent_but_reproducible():
    rng = np.random.default_rng(12)
    emb = rng.standard_normal((30, 4))
    labels = np.repeat([0, 1, 2], 10)
    a = node_classification(emb, labels, 0.5, seed=3)
    b = node_classification(emb, labels, 0.5, seed=3)
    assert a == b


# --- migration proximity -------------------------------------------------------


def test_migration_stat_exact_centroid_placement():
    # nodes 0-2 at x=0 (community 0), 3-5 at x=10 (community 1); node 6
    # migrated 0 -> 1 and sits exactly on community 1's centroid
    y = np.zeros((7, 2))
    y[3:6, 0] = 10.0
    y[6, 0] = 10.0
    labels = np.array([0, 0, 0, 1, 1, 1, 1])
    series = _series_from(y)
    assert migration_proximity_stat(series, labels, [(6, 0, 1)], 0) == 1.0


def test_migration_stat_tie_counts_as_failure():
    y = np.zeros((5, 2))  # everything collapses to one point
    labels = np.array([0, 0, 1, 1, 1])
    series = _series_from(y)
    assert migration_proximity_stat(series, labels, [(4, 0, 1)], 0) == 0.0


def test_migration_stat_requires_records_and_members():
    y = np.zeros((4, 2))
    series = _series_from(y)
    with pytest.raises(EvalError, match="no migrated"):
        migration_proximity_stat(series, np.zeros(4, dtype=int), [], 0)
    # origin community 0 contains only the migrating node itself
    labels = np.array([0, 1, 1, 1])
    with pytest.raises(EvalError, match="community 0"):
        migration_proximity_stat(series, labels, [(0, 0, 1)], 0)


def test_migration_stat_counts_fraction():
    y = np.zeros((8, 2))
    y[4:, 0] = 10.0
    y[2, 0] = 10.0   # migrant 2 anticipates its destination
    y[3, 0] = 0.0    # migrant 3 does not
    labels = np.array([0, 0, 1, 1, 1, 1, 1, 1])
    series = _series_from(y)
    stat = migration_proximity_stat(series, labels, [(2, 0, 1), (3, 0, 1)], 0)
    assert stat == 0.5


# --- reports and projection -----------------------------------------------------


def test_report_key_order():
    report = EvalReport(task="temporal_lp", method="optsvd", seed=1,
                        config_digest="abc", mode="all", k_grid=[1, 2],
                        precision_at_k=[1.0, 0.5], map=0.75)
    assert list(report.to_dict().keys()) == [
        "task", "method", "seed", "config_digest", "mode", "k_grid",
        "precision_at_k", "map", "empty_truth"]
    cls = EvalReport(task="classification", method="optsvd", micro_f1=0.9,
                     macro_f1=0.8)
    keys = list(cls.to_dict().keys())
    assert keys.index("micro_f1") < keys.index("macro_f1")
    stat = EvalReport(task="migration_stat", method="d2v_ae", stat=0.4)
    assert "stat" in stat.to_dict()


def test_report_json_round_trip(tmp_path):
    report = EvalReport(task="reconstruction", method="optsvd", k_grid=[1],
                        precision_at_k=[1.0], map=1.0)
    assert report.to_json() == report.to_json()
    path = tmp_path / "report.json"
    save_report(report, path)
    assert json.loads(path.read_text()) == report.to_dict()
    assert path.read_text().endswith("\n")


def test_projection_single_node_is_origin(tmp_path):
    series = _series_from(np.array([[3.0, 4.0, 5.0]]))
    path = tmp_path / "proj.txt"
    export_projection(series, 0, [2], [0], path)
    assert path.read_text() == "0 0 0 2 1\n"


def test_projection_rows_and_flags(tmp_path):
    rng = np.random.default_rng(13)
    y = rng.standard_normal((12, 6))
    labels = np.arange(12) % 3
    series = _series_from(y)
    path = tmp_path / "proj.txt"
    export_projection(series, 0, labels, {4, 7}, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 12
    for node, line in enumerate(lines):
        cols = line.split()
        assert cols[0] == str(node)
        assert cols[3] == str(labels[node])
        assert cols[4] == ("1" if node in {4, 7} else "0")
    path2 = tmp_path / "proj2.txt"
    export_projection(series, 0, labels, {4, 7}, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_projection_length_mismatch(tmp_path):
    series = _series_from(np.zeros((3, 2)))
    with pytest.raises(ValueError, match="length mismatch"):
        export_projection(series, 0, [0, 1], [], tmp_path / "p.txt")
