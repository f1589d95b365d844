import numpy as np
import pytest

from qkrylov import read_matrix_market, MatrixMarketError


def write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_coordinate_diagonal(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n"
                        "% a comment\n"
                        "2 2 2\n"
                        "1 1 1.0\n"
                        "2 2 2.0\n")
    m = read_matrix_market(p)
    assert np.array_equal(m.toarray(), np.diag([1.0, 2.0]))


def test_symmetric_expansion(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n"
                        "3 3 3\n"
                        "1 1 4.0\n"
                        "2 1 7.0\n"
                        "3 3 1.0\n")
    m = read_matrix_market(p).toarray()
    assert m[1, 0] == 7.0 and m[0, 1] == 7.0
    assert m[0, 0] == 4.0 and m[2, 2] == 1.0


def test_duplicates_summed(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n"
                        "2 2 3\n"
                        "1 1 1.5\n"
                        "1 1 2.5\n"
                        "2 1 1.0\n")
    m = read_matrix_market(p).toarray()
    assert m[0, 0] == 4.0
    assert m[1, 0] == 1.0


def test_integer_field(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate integer general\n"
                        "2 2 1\n"
                        "2 1 7\n")
    assert read_matrix_market(p).toarray()[1, 0] == 7.0


def test_array_format_column_major(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix array real general\n"
                        "2 2\n1\n2\n3\n4\n")
    m = read_matrix_market(p).toarray()
    assert np.array_equal(m, np.array([[1.0, 3.0], [2.0, 4.0]]))


def test_array_symmetric(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix array real symmetric\n"
                        "2 2\n1\n5\n3\n")
    m = read_matrix_market(p).toarray()
    assert np.array_equal(m, np.array([[1.0, 5.0], [5.0, 3.0]]))


@pytest.mark.parametrize("field", ["complex", "pattern"])
def test_unsupported_field_rejected(tmp_path, field):
    p = write(tmp_path, f"%%MatrixMarket matrix coordinate {field} general\n"
                        "1 1 1\n1 1 1.0\n")
    with pytest.raises(MatrixMarketError) as exc:
        read_matrix_market(p)
    assert "line 1" in str(exc.value)


def test_unsupported_symmetry_rejected(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real skew-symmetric\n"
                        "2 2 1\n2 1 1.0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(p)


def test_out_of_range_index_reports_line(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n"
                        "2 2 1\n"
                        "3 1 1.0\n")
    with pytest.raises(MatrixMarketError) as exc:
        read_matrix_market(p)
    assert "line 3" in str(exc.value)


def test_malformed_header(tmp_path):
    p = write(tmp_path, "MatrixMarket matrix coordinate real general\n1 1 1\n")
    with pytest.raises(MatrixMarketError) as exc:
        read_matrix_market(p)
    assert "line 1" in str(exc.value)


def test_wrong_entry_count(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n"
                        "2 2 2\n1 1 1.0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(p)


def test_unparsable_value_reports_line(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n"
                        "2 2 1\n1 1 abc\n")
    with pytest.raises(MatrixMarketError) as exc:
        read_matrix_market(p)
    assert "line 3" in str(exc.value)
