import numpy as np
import pytest

from gridfill.errors import DatasetError
from gridfill.tensor import load_tensors, save_tensors


def test_roundtrip(tmp_path):
    path = tmp_path / "state.ckpt"
    rng = np.random.default_rng(0)
    tensors = {
        "net.conv.w": rng.standard_normal((3, 3, 2, 4)).astype(np.float32),
        "net.conv.b": np.zeros(4, np.float32),
        "opt.step": np.array(7, np.int64),
        "double": rng.standard_normal(5),
    }
    meta = {"config": {"lr": 2e-4}, "loss_ema": 0.4375}
    save_tensors(path, meta, tensors)
    meta2, loaded = load_tensors(path)
    assert meta2 == meta
    assert set(loaded) == set(tensors)
    for k in tensors:
        assert loaded[k].dtype == tensors[k].dtype
        np.testing.assert_array_equal(loaded[k], tensors[k])


def test_header_is_plain_text(tmp_path):
    path = tmp_path / "state.ckpt"
    save_tensors(path, {}, {"w": np.ones((2, 2), np.float32)})
    head = path.read_bytes().split(b"\nend\n")[0].decode("utf-8")
    assert head.startswith("GRIDFILL-CKPT-1")
    assert "tensor w f4 2x2 0" in head


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"NOT-A-CKPT\nend\n")
    with pytest.raises(DatasetError, match="magic"):
        load_tensors(path)


def test_truncated_blob_rejected(tmp_path):
    path = tmp_path / "state.ckpt"
    save_tensors(path, {}, {"w": np.ones((4, 4), np.float32)})
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(DatasetError, match="truncated"):
        load_tensors(path)


def test_same_content_same_bytes(tmp_path):
    a, b = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    t = {"w": np.arange(6, dtype=np.float32).reshape(2, 3)}
    save_tensors(a, {"s": 1}, t)
    save_tensors(b, {"s": 1}, t)
    assert a.read_bytes() == b.read_bytes()
