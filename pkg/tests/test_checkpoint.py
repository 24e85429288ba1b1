import numpy as np
import pytest

from cogail.checkpoint import (CheckpointError, load_checkpoint,
                               save_checkpoint)
from cogail.rngs import derive_rng


def _sample_state():
    rng = derive_rng(42)
    meta = {"mode": "cogail", "seed": 300, "episode": 10, "config_hash": "abc"}
    arrays = {
        "actor.w0": rng.standard_normal((12, 128)),
        "actor.b0": np.zeros(128),
        "opt.t": np.array([7.0]),
    }
    return meta, arrays


def test_roundtrip_exact(tmp_path):
    meta, arrays = _sample_state()
    path = tmp_path / "a.ckpt"
    save_checkpoint(path, meta, arrays)
    meta2, arrays2 = load_checkpoint(path)
    assert meta2 == meta
    assert list(arrays2) == list(arrays)
    for k in arrays:
        assert np.array_equal(arrays[k], arrays2[k])
        assert arrays2[k].dtype == arrays[k].dtype


def test_byte_identical_rewrites(tmp_path):
    meta, arrays = _sample_state()
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(p1, meta, arrays)
    save_checkpoint(p2, meta, arrays)
    assert p1.read_bytes() == p2.read_bytes()


def test_save_load_save_is_stable(tmp_path):
    meta, arrays = _sample_state()
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(p1, meta, arrays)
    m, a = load_checkpoint(p1)
    save_checkpoint(p2, m, a)
    assert p1.read_bytes() == p2.read_bytes()


def test_rejects_garbage(tmp_path):
    p = tmp_path / "junk.ckpt"
    p.write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointError):
        load_checkpoint(p)


def test_rejects_wrong_version(tmp_path):
    meta, arrays = _sample_state()
    p = tmp_path / "a.ckpt"
    save_checkpoint(p, meta, arrays)
    blob = bytearray(p.read_bytes())
    blob[4] = 99
    p.write_bytes(bytes(blob))
    with pytest.raises(CheckpointError):
        load_checkpoint(p)
