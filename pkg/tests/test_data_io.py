import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sca_kit import ConnectivityMatrix, ResponseMatrix, derive_seed, load_connectivity, load_matrix, save_matrix, seeded_rng
from sca_kit.errors import DimensionError, NaNError, ParseError
from sca_kit.io import load_factorization, read_binary, save_factorization, write_binary
from sca_kit.decomposition import decompose


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_csv_with_header(tmp_path):
    p = write_text(tmp_path / "m.csv", "stimulus,u1,u2\ns1,1,2\ns2,3,4\ns3,5,6.5\n")
    m = load_matrix(p)
    assert m.shape == (3, 2)
    assert m.stimulus_ids == ("s1", "s2", "s3")
    assert m.unit_ids == ("u1", "u2")
    assert m.data[2, 1] == 6.5


def test_nan_cell_is_named(tmp_path):
    p = write_text(tmp_path / "m.csv", "stimulus,u1,u2\ns1,1,2\ns2,3,nan\n")
    with pytest.raises(NaNError, match=r"\(1,1\)"):
        load_matrix(p)


def test_single_stimulus_rejected(tmp_path):
    p = write_text(tmp_path / "m.csv", "stimulus,a,b,c,d,e\ns1,1,2,3,4,5\n")
    with pytest.raises(DimensionError, match="S >= 2 required"):
        load_matrix(p)


def test_parse_error_location(tmp_path):
    p = write_text(tmp_path / "m.csv", "stimulus,u1,u2\ns1,1,2\ns2,3,abc\n")
    with pytest.raises(ParseError) as info:
        load_matrix(p)
    assert (info.value.row, info.value.col) == (3, 3)


def test_ragged_row(tmp_path):
    p = write_text(tmp_path / "m.csv", "stimulus,u1,u2\ns1,1,2\ns2,3\n")
    with pytest.raises(DimensionError):
        load_matrix(p)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        load_matrix(tmp_path / "nope.csv")


def test_identity_round_trip(tmp_path):
    m = ResponseMatrix.from_array(np.eye(2))
    for name in ("i.bin", "i.csv"):
        save_matrix(m, tmp_path / name)
        back = load_matrix(tmp_path / name)
        assert np.array_equal(back.data, m.data)
        assert back.stimulus_ids == m.stimulus_ids and back.unit_ids == m.unit_ids


def test_icm_half_written_as_text(tmp_path):
    icm = ConnectivityMatrix(np.array([[1, 0.5], [0.5, 1]]), "icm", ("a", "b"))
    save_matrix(icm, tmp_path / "icm.csv")
    lines = (tmp_path / "icm.csv").read_text().splitlines()
    assert lines[1].split(",")[2] == "0.5"
    back = load_connectivity(tmp_path / "icm.csv", kind="icm")
    assert np.array_equal(back.data, icm.data)


def test_binary_random_100x50_bit_exact(tmp_path):
    data = seeded_rng(7, "io").standard_normal((100, 50))
    m = ResponseMatrix.from_array(data)
    save_matrix(m, tmp_path / "a.bin")
    back = load_matrix(tmp_path / "a.bin")
    assert back.data.tobytes() == data.tobytes()
    save_matrix(back, tmp_path / "b.bin")
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_binary_header_layout(tmp_path):
    write_binary(tmp_path / "x.bin", np.array([[1.0, 2.0], [3.0, 4.0]]), ["r0", "r1"], ["c0", "c1"])
    raw = (tmp_path / "x.bin").read_bytes()
    assert raw[:4] == b"SCAK"
    assert int.from_bytes(raw[8:16], "little") == 2
    assert np.frombuffer(raw[24:56], "<f8").tolist() == [1.0, 2.0, 3.0, 4.0]


def test_truncated_binary(tmp_path):
    write_binary(tmp_path / "x.bin", np.ones((3, 3)), list("abc"), list("abc"))
    raw = (tmp_path / "x.bin").read_bytes()
    (tmp_path / "y.bin").write_bytes(raw[:40])
    with pytest.raises(DimensionError):
        read_binary(tmp_path / "y.bin")
    (tmp_path / "z.bin").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ParseError):
        read_binary(tmp_path / "z.bin")


def test_icm_n_runs_survives_binary(tmp_path):
    icm = ConnectivityMatrix(np.array([[1, 0.25], [0.25, 1]]), "icm", ("a", "b"), n_runs=4)
    save_matrix(icm, tmp_path / "icm.bin")
    back = load_connectivity(tmp_path / "icm.bin")
    assert back.kind == "icm" and back.n_runs == 4


def test_factorization_round_trip(tmp_path):
    d = ResponseMatrix.from_array(np.abs(seeded_rng(1, "f").standard_normal((12, 6))))
    f = decompose(d, "pca", 3)
    save_factorization(f, tmp_path / "f")
    g = load_factorization(tmp_path / "f")
    assert np.array_equal(f.responses, g.responses)
    assert np.array_equal(f.weights, g.weights)
    assert np.array_equal(f.center, g.center)
    assert g.method == "pca"


FROZEN_FIRST_DRAW = 3653864269

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(1, 6)), elements=finite))
def test_binary_round_trip_property(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("rt") / "m.bin"
    save_matrix(ResponseMatrix.from_array(data), path)
    assert load_matrix(path).data.tobytes() == np.ascontiguousarray(data).tobytes()


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 6), st.integers(1, 5)), elements=finite))
def test_csv_round_trip_property(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("rt") / "m.csv"
    save_matrix(ResponseMatrix.from_array(data), path)
    back = load_matrix(path).data
    assert np.allclose(back, data, rtol=1e-12, atol=1e-12)


def test_response_matrix_read_only():
    m = ResponseMatrix.from_array(np.ones((2, 2)))
    with pytest.raises(ValueError):
        m.data[0, 0] = 5


def test_duplicate_labels_rejected():
    with pytest.raises(ValueError):
        ResponseMatrix(np.ones((2, 2)), ("a", "a"), ("u", "v"))


def test_connectivity_symmetry_enforced():
    with pytest.raises(ValueError):
        ConnectivityMatrix(np.array([[1, 0.2], [0.7, 1]]), "icm", ("a", "b"))


class TestRng:
    def test_same_stream_repeats(self):
        assert np.array_equal(seeded_rng(42, "a").random(100), seeded_rng(42, "a").random(100))

    def test_labels_differ(self):
        assert not np.array_equal(seeded_rng(42, "a").random(100), seeded_rng(42, "b").random(100))

    def test_seeds_differ(self):
        assert not np.array_equal(seeded_rng(42, "a").random(100), seeded_rng(43, "a").random(100))

    def test_streams_look_independent(self):
        a = seeded_rng(42, "a").random(20000)
        b = seeded_rng(42, "b").random(20000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(20000)

    def test_known_first_draw_is_stable(self):
        # frozen on first run; guards against silent changes to the keying scheme
        assert seeded_rng(0, "frozen").integers(0, 2**32) == FROZEN_FIRST_DRAW

    def test_derive_seed(self):
        assert derive_seed(1, "x") == derive_seed(1, "x")
        assert derive_seed(1, "x") != derive_seed(1, "y")
        assert 0 <= derive_seed(1, "x") < 2**64
