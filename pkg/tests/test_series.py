"""EmbeddingSeries container and its text round trip."""

import numpy as np
import pytest

from dynembed.series import (EmbeddingSeries, load_embedding_series,
                             save_embedding_series)


def _series(t_start=0, n=4, d=3, count=3, method="optsvd"):
    rng = np.random.default_rng(0)
    ys = [rng.normal(size=(n, d)) for _ in range(count)]
    zs = [rng.normal(size=(n, d)) for _ in range(count)]
    return EmbeddingSeries(y_src=ys, y_tgt=zs, method=method, t_start=t_start)


def test_accessors_and_times():
    s = _series(t_start=2)
    assert list(s.times()) == [2, 3, 4]
    assert s.n == 4 and s.d == 3
    assert np.array_equal(s.src_at(3), s.y_src[1])
    assert np.array_equal(s.tgt_at(4), s.y_tgt[2])


def test_out_of_range_lookup():
    s = _series(t_start=2)
    with pytest.raises(IndexError, match="covers"):
        s.src_at(1)
    with pytest.raises(IndexError):
        s.tgt_at(5)


def test_validation():
    y = [np.zeros((2, 2))]
    with pytest.raises(ValueError, match="length"):
        EmbeddingSeries(y_src=y, y_tgt=[], method="m")
    with pytest.raises(ValueError, match="empty"):
        EmbeddingSeries(y_src=[], y_tgt=[], method="m")
    with pytest.raises(ValueError, match="shapes"):
        EmbeddingSeries(y_src=[np.zeros((2, 2))], y_tgt=[np.zeros((3, 2))], method="m")
    with pytest.raises(ValueError, match="finite"):
        EmbeddingSeries(y_src=[np.full((2, 2), np.nan)], y_tgt=[np.zeros((2, 2))],
                        method="m")


def test_round_trip_exact(tmp_path):
    s = _series(t_start=1, method="d2v_ae")
    paths = save_embedding_series(s, tmp_path)
    assert len(paths) == 6
    loaded = load_embedding_series(tmp_path, "d2v_ae")
    assert loaded.t_start == 1
    assert loaded.method == "d2v_ae"
    for t in s.times():
        # 17 significant digits round-trip float64 exactly
        assert np.array_equal(loaded.src_at(t), s.src_at(t))
        assert np.array_equal(loaded.tgt_at(t), s.tgt_at(t))


def test_save_with_custom_prefix(tmp_path):
    s = _series(count=2)
    save_embedding_series(s, tmp_path, prefix="emb")
    assert (tmp_path / "emb_t0.src").exists()
    assert (tmp_path / "emb_t1.tgt").exists()
    loaded = load_embedding_series(tmp_path, "emb", method="optsvd")
    assert loaded.method == "optsvd"
    assert np.array_equal(loaded.src_at(0), s.src_at(0))


def test_file_header(tmp_path):
    s = _series(count=1)
    save_embedding_series(s, tmp_path, prefix="x")
    first = (tmp_path / "x_t0.src").read_text().splitlines()[0]
    assert first == "4 3"


def test_non_contiguous_files_rejected(tmp_path):
    s = _series(count=1)
    save_embedding_series(s, tmp_path, prefix="p")
    save_embedding_series(_series(t_start=2, count=1), tmp_path, prefix="p")
    with pytest.raises(ValueError, match="non-contiguous"):
        load_embedding_series(tmp_path, "p")


def test_missing_prefix(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_embedding_series(tmp_path, "nothing")


def test_header_body_mismatch_detected(tmp_path):
    p = tmp_path / "q_t0.src"
    p.write_text("2 2\n1 2\n")
    (tmp_path / "q_t0.tgt").write_text("1 2\n1 2\n")
    with pytest.raises(ValueError, match="header"):
        load_embedding_series(tmp_path, "q")
