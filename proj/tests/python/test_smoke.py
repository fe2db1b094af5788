import math

import numpy as np
import pytest

import graphdistill as gd


def test_core_numerics():
    assert gd.softmax([0.0, 0.0]) == pytest.approx([0.5, 0.5])
    assert gd.softmax([math.log(2), 0.0]) == pytest.approx([2 / 3, 1 / 3])
    assert gd.cosine_similarity([1, 0], [0, 1]) == pytest.approx(0.0)
    assert gd.cosine_similarity([1, 2], [2, 4]) == pytest.approx(1.0)
    assert gd.cross_entropy([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2))
    assert gd.cosine_distance_loss([1, 0], [-1, 0]) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        gd.cosine_similarity([0, 0], [1, 0])
    with pytest.raises(ValueError):
        gd.softmax([1.0], 0.0)


def test_dataset_and_augment():
    feats, labels, classes = gd.gen_clusters(10, 3, 8, 0.05, seed=7)
    assert feats.shape == (30, 8)
    assert labels.shape == (30,)
    assert classes == 3
    feats2, labels2, _ = gd.gen_clusters(10, 3, 8, 0.05, seed=7)
    np.testing.assert_array_equal(feats, feats2)
    np.testing.assert_array_equal(labels, labels2)

    x = [1.0, -2.0, 3.0, 0.5]
    unchanged = gd.augment(x, gaussian_sigma=0, mask_fraction=0, scale_jitter=0, seed=1)
    assert unchanged == x


def test_embedding_roundtrip(tmp_path):
    m = np.arange(12, dtype=np.float64).reshape(4, 3) / 7.0
    path = str(tmp_path / "m.gdem")
    gd.save_embeddings(m, path)
    back = gd.load_embeddings(path)
    np.testing.assert_array_equal(back, m.astype(np.float32).astype(np.float64))
    with pytest.raises(IOError):
        gd.load_embeddings(str(tmp_path / "missing.gdem"))


def test_store_and_graph(tmp_path):
    feats, labels, _ = gd.gen_clusters(12, 4, 6, 0.1, seed=3)
    cfg = gd.NeighborConfig(e=4, k=2, w=3)
    store = gd.CircularEdgeStore(cfg, 48)
    for epoch in range(4):
        store.push_epoch(feats + 0.001 * epoch, epoch)
    assert store.filled == 3

    scores = store.aggregate_scores(0)
    assert len(scores) >= 2
    dist = store.similarity_distribution(0)
    assert sum(p for _, p in dist) == pytest.approx(1.0)

    graph = gd.KnnGraph.build(store)
    stats = graph.stats()
    assert stats["node_count"] == 48
    assert stats["min_out_degree"] >= 2
    for dst, weight in graph.out_neighbors(0):
        assert dst != 0

    gpath = str(tmp_path / "g.gdgr")
    graph.save(gpath)
    back = gd.KnnGraph.load(gpath)
    assert back.edge_count == graph.edge_count

    neighbors, top1_is_self = gd.topk_neighbors(feats, anchor=0, e=3)
    assert len(neighbors) == 3
    assert all(nid != 0 for nid, _ in neighbors)


def test_pretrain_refine_probe():
    feats, labels, _ = gd.gen_clusters(12, 3, 6, 0.08, seed=11)
    cfg = gd.PretrainConfig()
    cfg.epochs = 3
    cfg.batch_size = 12
    cfg.neighbor = gd.NeighborConfig(e=4, k=1, w=4)
    cfg.encoder_widths = [6, 16, 8]
    cfg.projector_widths = [8, 16, 16, 32]
    cfg.seed = 11
    art = gd.run_pretrain(feats, cfg)
    assert art.student_embeddings.shape == (36, 8)
    assert len(art.loss_curve) == 3
    assert art.mode_log[0] == 0.0

    stack = gd.GnnStack()
    stack.kind = gd.GnnLayerKind.GCN
    stack.depth = 2
    stack.hidden = 8
    stack.jk = gd.JkMode.CONCAT
    rcfg = gd.RefineConfig()
    rcfg.epochs = 10
    rcfg.seed = 11
    refined, loss_curve = gd.run_refine(art, stack, rcfg)
    assert refined.shape == (36, 16)
    assert len(loss_curve) == 10
    assert all(math.isfinite(v) for v in loss_curve)

    train_idx, val_idx = gd.make_split(36, 0.75, seed=5)
    report = gd.train_linear_probe(feats, labels.tolist(), train_idx, val_idx, epochs=200, lr=0.1)
    assert 0.0 <= report.val_accuracy <= 1.0
    acc = gd.knn_eval(feats, labels.tolist(), train_idx, val_idx, k_eval=3)
    assert acc >= 0.8  # tight blobs are easy for cosine kNN


def test_cli_runs(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "data.n_per_class = 10\n"
        "data.class_count = 3\n"
        "data.dim = 6\n"
        "data.spread = 0.08\n"
        "pretrain.epochs = 2\n"
        "pretrain.batch_size = 10\n"
        "pretrain.hidden_dim = 12\n"
        "pretrain.embed_dim = 8\n"
        "neighbor.w = 3\n"
        "gnn.hidden = 8\n"
        "refine.epochs = 4\n"
        "probe.epochs = 50\n"
    )
    out = tmp_path / "out"
    code = gd.cli_run(["pipeline", "--config", str(cfg), "--out", str(out), "--seed", "2",
                       "--quiet"])
    assert code == 0
    assert (out / "refined.gdem").exists()
    assert (out / "probe_report.csv").exists()
    assert gd.cli_run(["probe", "--config", str(cfg)]) in (1, 2)  # missing artifacts
    assert gd.cli_run(["nonsense"]) == 1
