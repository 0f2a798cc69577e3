import math

import numpy as np
import pytest

import graphkd


def unit_rows(rng, n, d):
    m = rng.standard_normal((n, d))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def test_knn_graph_is_row_stochastic_and_self_free():
    rng = np.random.default_rng(3)
    pts = rng.standard_normal((25, 6))
    g = graphkd.build_knn_graph(pts, k=4, sigma=0.8)
    assert g.n_nodes == 25 and g.k == 4 and not g.bipartite
    for node in range(g.n_nodes):
        nbrs = g.neighbors(node)
        assert len(nbrs) == 4
        targets = [t for t, _, _ in nbrs]
        assert node not in targets
        assert len(set(targets)) == 4
        assert math.isclose(sum(p for _, p, _ in nbrs), 1.0, abs_tol=1e-12)


def test_cross_knn_targets_reference_side():
    rng = np.random.default_rng(4)
    queries = rng.standard_normal((7, 5))
    refs = rng.standard_normal((12, 5))
    g = graphkd.build_cross_knn(queries, refs, k=3)
    assert g.bipartite and g.n_nodes == 7 and g.n_targets == 12
    for node in range(7):
        assert all(0 <= t < 12 for t, _, _ in g.neighbors(node))


def test_smoothing_alpha_one_is_identity():
    rng = np.random.default_rng(5)
    pts = rng.standard_normal((15, 4))
    z = unit_rows(rng, 15, 8)
    g = graphkd.build_knn_graph(pts, k=3)
    out = graphkd.smooth_embeddings(z, g, alpha=1.0)
    assert np.array_equal(out, z)
    mixed = graphkd.smooth_embeddings(z, g, alpha=0.5)
    assert np.linalg.norm(mixed - z) > 0


def test_imputation_gates_on_labels_and_falls_back():
    rng = np.random.default_rng(6)
    ref_bio = rng.standard_normal((10, 4))
    ref_emb = unit_rows(rng, 10, 6)
    query = rng.standard_normal((3, 4))
    ps = graphkd.impute_priors(query, ref_bio, ref_emb,
                               query_labels=[1, 0, 1], ref_labels=[1, 0] * 5,
                               k=4, sigma=1.0)
    assert ps.priors.shape == (3, 6)
    assert all(ps.gated) and ps.fallback_rate() == 0.0
    np.testing.assert_allclose(np.linalg.norm(ps.priors, axis=1), 1.0, atol=1e-12)

    # no same-label neighbor anywhere: every row must take the ungated fallback
    forced = graphkd.impute_priors(query, ref_bio, ref_emb,
                                   query_labels=[1, 1, 1], ref_labels=[0] * 10,
                                   k=4, sigma=1.0)
    assert not any(forced.gated) and forced.fallback_rate() == 1.0


def test_metric_spot_values():
    scores = np.array([0.2, 0.4, 0.6, 0.8])
    labels = [0, 1, 0, 1]
    assert graphkd.auc(np.array([0.1, 0.9]), [0, 1]) == 1.0
    assert graphkd.auc(scores, labels) == 0.75
    assert graphkd.youden_threshold(scores, labels) == pytest.approx(0.3)
    c = graphkd.confusion_metrics(scores, labels, 0.3)
    assert c["sensitivity"] == 1.0 and c["specificity"] == 0.5
    assert 0.0 < graphkd.auprc(scores, labels) <= 1.0


def test_stratified_kfold_partitions_each_class():
    labels = [0, 1] * 20
    folds = graphkd.stratified_kfold(labels, n_folds=5, seed=1)
    assert len(folds) == 5
    seen = []
    for train_idx, val_idx in folds:
        assert not set(train_idx) & set(val_idx)
        assert sorted(set(train_idx) | set(val_idx)) == list(range(40))
        assert sum(labels[i] for i in val_idx) == 4  # 8 rows, half positive
        seen.extend(val_idx)
    assert sorted(seen) == list(range(40))


def test_generated_cohorts_and_cv_are_deterministic():
    sc = graphkd.SynthConfig()
    sc.n_mri = 60
    sc.n_fundus = 50
    sc.latent_dim = 4
    sc.biomarker_dim = 6
    sc.teacher_dim = 8
    sc.feature_dim = 5
    sc.seed = 11
    data = graphkd.generate_cohorts(sc)
    again = graphkd.generate_cohorts(sc)
    assert data.mri.labels == again.mri.labels
    np.testing.assert_array_equal(data.fundus.features, again.fundus.features)
    assert not set(data.mri.ids) & set(data.fundus.ids)

    cfg = graphkd.TrainConfig()
    cfg.epochs = 2
    cfg.learning_rate = 0.05
    cfg.k_mri = 10
    cfg.k_fundus = 4
    cfg.embed_dim = 8
    cfg.bio_embed_dim = 4
    out = graphkd.run_cv(data.mri, data.fundus, cfg)
    assert len(out["folds"]) == 5
    for key in ("auc", "auprc", "sensitivity", "specificity", "f1"):
        assert set(out[key]) == {"mean", "std"}
    assert 0.0 <= out["auc"]["mean"] <= 1.0
    assert graphkd.run_cv(data.mri, data.fundus, cfg) == out
