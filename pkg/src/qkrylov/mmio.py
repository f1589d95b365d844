"""Matrix Market (.mtx) ingestion for real matrices.

Supports coordinate and array formats, real/integer fields, and
general/symmetric symmetry.  Duplicate coordinate entries are summed and
explicit zeros are kept, per the format convention.  Errors carry the
offending line number.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

__all__ = ["read_matrix_market", "MatrixMarketError"]


class MatrixMarketError(ValueError):
    """Malformed or unsupported Matrix Market content."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def read_matrix_market(path) -> sparse.csr_matrix:
    """Read a real Matrix Market file into a CSR matrix.

    Parameters
    ----------
    path : str or Path
        File in coordinate or array format with a real or integer field and
        general or symmetric symmetry.  Comment lines (%) are skipped.

    Returns
    -------
    scipy.sparse.csr_matrix
        Symmetric storage is expanded to both triangles.

    Raises
    ------
    MatrixMarketError
        On malformed headers, unsupported fields, or out-of-range indices,
        with the line number of the offending record.
    """
    with open(path, "rt", encoding="ascii", errors="replace") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)

    header = lines[0].strip().split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        raise MatrixMarketError(
            "expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    _, obj, fmt, field, symmetry = (tok.lower() for tok in header)
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object '{obj}'", 1)
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format '{fmt}'", 1)
    if field not in ("real", "integer"):
        raise MatrixMarketError(
            f"unsupported field '{field}' (only real/integer)", 1)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(
            f"unsupported symmetry '{symmetry}' (only general/symmetric)", 1)

    # first non-comment, non-blank line after the header is the size line
    pos = 1
    while pos < len(lines) and (not lines[pos].strip()
                                or lines[pos].lstrip().startswith("%")):
        pos += 1
    if pos >= len(lines):
        raise MatrixMarketError("missing size line", len(lines))
    size_tokens = lines[pos].split()
    size_line_no = pos + 1
    pos += 1

    if fmt == "coordinate":
        if len(size_tokens) != 3:
            raise MatrixMarketError("coordinate size line needs 'rows cols nnz'",
                                    size_line_no)
        try:
            n_rows, n_cols, nnz = (int(t) for t in size_tokens)
        except ValueError:
            raise MatrixMarketError("non-integer size entry", size_line_no) from None
        rows, cols, vals = [], [], []
        count = 0
        for line_no in range(pos, len(lines)):
            text = lines[line_no].strip()
            if not text or text.startswith("%"):
                continue
            tokens = text.split()
            if len(tokens) != 3:
                raise MatrixMarketError(
                    f"expected 'row col value', got {len(tokens)} tokens", line_no + 1)
            try:
                i, j = int(tokens[0]), int(tokens[1])
                v = float(tokens[2])
            except ValueError:
                raise MatrixMarketError(f"unparsable entry '{text}'",
                                        line_no + 1) from None
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise MatrixMarketError(
                    f"index ({i}, {j}) outside {n_rows} x {n_cols}", line_no + 1)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            count += 1
        if count != nnz:
            raise MatrixMarketError(
                f"declared {nnz} entries but found {count}", size_line_no)
        if symmetry == "symmetric":
            extra = [(c, r, v) for r, c, v in zip(rows, cols, vals) if r != c]
            rows += [e[0] for e in extra]
            cols += [e[1] for e in extra]
            vals += [e[2] for e in extra]
        m = sparse.coo_matrix(
            (np.array(vals), (np.array(rows, dtype=np.int64),
                              np.array(cols, dtype=np.int64))),
            shape=(n_rows, n_cols)).tocsr()
        m.sort_indices()
        return m

    # array format: dense column-major listing
    if len(size_tokens) != 2:
        raise MatrixMarketError("array size line needs 'rows cols'", size_line_no)
    try:
        n_rows, n_cols = (int(t) for t in size_tokens)
    except ValueError:
        raise MatrixMarketError("non-integer size entry", size_line_no) from None
    expected = n_rows * n_cols if symmetry == "general" \
        else n_rows * (n_rows + 1) // 2
    entries = []
    for line_no in range(pos, len(lines)):
        text = lines[line_no].strip()
        if not text or text.startswith("%"):
            continue
        for tok in text.split():
            try:
                entries.append(float(tok))
            except ValueError:
                raise MatrixMarketError(f"unparsable value '{tok}'",
                                        line_no + 1) from None
    if len(entries) != expected:
        raise MatrixMarketError(
            f"expected {expected} values, found {len(entries)}", size_line_no)
    dense = np.zeros((n_rows, n_cols))
    if symmetry == "general":
        dense = np.asarray(entries).reshape((n_rows, n_cols), order="F")
    else:
        k = 0
        for j in range(n_cols):
            for i in range(j, n_rows):
                dense[i, j] = entries[k]
                dense[j, i] = entries[k]
                k += 1
    m = sparse.csr_matrix(dense)
    m.sort_indices()
    return m
