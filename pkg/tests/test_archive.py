import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emoship.archive import TensorArchive, load_tensor_archive
from emoship.errors import IntegrityError


def test_single_tensor_loads_with_four_values(tmp_path):
    archive = TensorArchive()
    archive.add("w", np.arange(4.0).reshape(2, 2))
    path = tmp_path / "a.bin"
    archive.save(path)
    loaded = load_tensor_archive(path)
    w = loaded.get("w")
    assert w.shape == (2, 2) and w.size == 4
    np.testing.assert_array_equal(w, np.arange(4.0, dtype=np.float32).reshape(2, 2))


def test_truncated_blob_is_integrity_error_naming_tensor():
    archive = TensorArchive()
    archive.add("w", np.zeros((2, 2)))
    data = archive.save_bytes()
    with pytest.raises(IntegrityError, match="'w'"):
        TensorArchive.load_bytes(data[:-4])  # 12 of 16 blob bytes


def test_trailing_bytes_rejected():
    archive = TensorArchive()
    archive.add("w", np.zeros(2))
    with pytest.raises(IntegrityError, match="trailing"):
        TensorArchive.load_bytes(archive.save_bytes() + b"\x00")


def test_bad_magic_rejected():
    with pytest.raises(IntegrityError):
        TensorArchive.load_bytes(b"not-an-archive\n")


def test_duplicate_names_rejected():
    archive = TensorArchive()
    archive.add("w", np.zeros(2))
    with pytest.raises(IntegrityError):
        archive.add("w", np.zeros(2))


def test_name_with_whitespace_rejected():
    with pytest.raises(IntegrityError):
        TensorArchive().add("bad name", np.zeros(2))


def test_missing_tensor_is_integrity_error():
    with pytest.raises(IntegrityError):
        TensorArchive().get("nope")


def test_round_trip_random_archive_byte_identical():
    rng = np.random.default_rng(42)
    archive = TensorArchive()
    for i in range(5):
        shape = tuple(int(d) for d in rng.integers(1, 6, size=rng.integers(1, 4)))
        archive.add(f"t{i}", rng.standard_normal(shape))
    blob = archive.save_bytes()
    assert TensorArchive.load_bytes(blob).save_bytes() == blob


@settings(max_examples=30, deadline=None)
@given(st.lists(
    st.tuples(st.integers(0, 10_000),
              st.lists(st.integers(1, 4), min_size=1, max_size=3)),
    min_size=1, max_size=4, unique_by=lambda t: t[0]))
def test_round_trip_property(entries):
    archive = TensorArchive()
    for name_id, shape in entries:
        rng = np.random.default_rng(name_id)
        archive.add(f"n{name_id}", rng.standard_normal(tuple(shape)))
    blob = archive.save_bytes()
    reloaded = TensorArchive.load_bytes(blob)
    assert reloaded.save_bytes() == blob
    assert reloaded.names() == archive.names()
    for name in archive.names():
        np.testing.assert_array_equal(reloaded.get(name), archive.get(name))


def test_manifest_reports_shapes_and_dtype():
    archive = TensorArchive()
    archive.add("a", np.zeros((3, 2)))
    assert archive.manifest() == [("a", (3, 2), "f32le")]
