"""Matrix Market input/output, input-kind resolution and right-hand sides."""

import os
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, IncompatibleRHS, MatrixMarketError
from .graph import EdgeList, SparseLaplacian, assemble_laplacian

AUTO_ROW_SUM_TOL = 1e-8
RHS_SUM_TOL = 1e-10
KINDS = ("auto", "adjacency", "laplacian")
NEGATIVE_POLICIES = ("absolute-if-large-negative", "keep")


@dataclass
class MatrixMarketData:
    """Raw coordinate entries of a square Matrix Market file (0-based)."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    symmetry: str

    def full(self):
        """All entries as an ``n x n`` CSR matrix, mirroring symmetric storage."""
        r, c, v = self.rows, self.cols, self.vals
        if self.symmetry == "symmetric":
            off = r != c
            r, c, v = (np.concatenate([r, c[off]]), np.concatenate([c, r[off]]),
                       np.concatenate([v, v[off]]))
        M = sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))
        M.sum_duplicates()
        return M


@dataclass
class ProblemSpec:
    """A problem to solve: a Matrix Market path, its kind and a rhs spec."""

    source: str
    kind: str = "auto"
    rhs: str = "random:0"
    negative_policy: str = "absolute-if-large-negative"

    def load(self):
        """Return ``(A, b, resolved_kind)``."""
        A, kind = load_laplacian(self.source, self.kind, self.negative_policy)
        return A, make_rhs(A.n, self.rhs), kind


def _open(path):
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise MatrixMarketError(f"cannot open {path!r}: {exc.strerror}") from exc


def _data_lines(handle, start):
    """Yield ``(line_number, stripped_text)`` skipping comments and blanks."""
    for number, line in enumerate(handle, start=start):
        text = line.strip()
        if text and not text.startswith("%"):
            yield number, text


def _parse_header(line):
    tokens = line.split()
    if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
        raise MatrixMarketError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1)
    if fld in ("complex", "integer"):
        raise MatrixMarketError(f"{fld} field not supported; weights must be real or pattern", 1)
    if fld not in ("real", "pattern"):
        raise MatrixMarketError(f"unknown field {fld!r}", 1)
    if sym not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1)
    return fmt, fld, sym


def _ints(tokens, number, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MatrixMarketError(f"non-integer {what}", number) from None


def read_matrix_market_raw(path):
    """Parse a square coordinate Matrix Market file.

    Returns
    -------
    MatrixMarketData

    Raises
    ------
    MatrixMarketError
        For unreadable files or malformed content; messages carry the 1-based
        line number.
    """
    with _open(path) as handle:
        header = handle.readline()
        fmt, fld, sym = _parse_header(header)
        if fmt != "coordinate":
            raise MatrixMarketError(f"unsupported format {fmt!r}; expected coordinate", 1)
        lines = _data_lines(handle, 2)
        try:
            number, size = next(lines)
        except StopIteration:
            raise MatrixMarketError("missing size line") from None
        tokens = size.split()
        if len(tokens) != 3:
            raise MatrixMarketError("size line must hold 'rows cols entries'", number)
        nr, nc, nnz = _ints(tokens, number, "size")
        if nr != nc:
            raise MatrixMarketError(f"matrix is {nr}x{nc}, not square", number)
        if nr < 0 or nnz < 0:
            raise MatrixMarketError("negative size", number)
        width = 2 if fld == "pattern" else 3
        rows = np.empty(nnz, dtype=np.intp)
        cols = np.empty(nnz, dtype=np.intp)
        vals = np.ones(nnz)
        k = 0
        for number, text in lines:
            if k == nnz:
                raise MatrixMarketError(f"more than the declared {nnz} entries", number)
            tokens = text.split()
            if len(tokens) != width:
                raise MatrixMarketError(f"expected {width} fields, found {len(tokens)}", number)
            i, j = _ints(tokens[:2], number, "index")
            if not (1 <= i <= nr and 1 <= j <= nr):
                raise MatrixMarketError(f"index ({i}, {j}) out of bounds for n={nr}", number)
            if width == 3:
                try:
                    vals[k] = float(tokens[2])
                except ValueError:
                    raise MatrixMarketError(f"bad value {tokens[2]!r}", number) from None
                if not np.isfinite(vals[k]):
                    raise MatrixMarketError("non-finite value", number)
            rows[k], cols[k] = i - 1, j - 1
            k += 1
        if k != nnz:
            raise MatrixMarketError(f"declared {nnz} entries, found {k}")
    return MatrixMarketData(nr, rows, cols, vals, sym)


def resolve_kind(data, kind="auto"):
    """Decide whether a matrix is a Laplacian or an adjacency matrix.

    Under ``'auto'`` a matrix with diagonal entries whose row sums all satisfy
    ``|sum| <= 1e-8 max|diag|`` is a Laplacian; anything else is an adjacency.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if kind != "auto":
        return kind
    M = data.full()
    diag = M.diagonal()
    if not np.any(diag != 0):
        return "adjacency"
    rows = np.asarray(M.sum(axis=1)).ravel()
    scale = float(np.abs(diag).max())
    return "laplacian" if np.all(np.abs(rows) <= AUTO_ROW_SUM_TOL * scale) else "adjacency"


def read_matrix_market(path, kind="auto"):
    """Read a graph from a Matrix Market file.

    Parameters
    ----------
    path : str
    kind : {'auto', 'adjacency', 'laplacian'}

    Returns
    -------
    EdgeList or SparseLaplacian
        An :class:`EdgeList` of undirected weights for adjacency input, where
        ``general`` files are symmetrized by summing both directions; a
        :class:`SparseLaplacian` for Laplacian input.
    """
    data = read_matrix_market_raw(path)
    return _graph_of(data, resolve_kind(data, kind))


def _graph_of(data, kind):
    M = data.full()
    if kind == "laplacian":
        if M.nnz and abs(M - M.T).max() > 0:
            raise MatrixMarketError("Laplacian input is not symmetric")
        return SparseLaplacian(M, M.diagonal())
    loops = int(np.count_nonzero(M.diagonal()))
    if loops:
        warnings.warn(f"ignored {loops} diagonal entr{'y' if loops == 1 else 'ies'} "
                      "of an adjacency matrix", stacklevel=3)
    W = sp.triu(M + M.T if data.symmetry == "general" else M, k=1).tocoo()
    return EdgeList(data.n, W.row, W.col, W.data).canonical()


def load_laplacian(path, kind="auto", negative_policy="absolute-if-large-negative"):
    """Read a file and return ``(SparseLaplacian, resolved_kind)``.

    The negative-weight policy applies to adjacency input only.
    """
    if negative_policy not in NEGATIVE_POLICIES:
        raise ValueError(f"unknown negative-weight policy {negative_policy!r}")
    data = read_matrix_market_raw(path)
    kind = resolve_kind(data, kind)
    obj = _graph_of(data, kind)
    if kind == "laplacian":
        return obj, kind
    return assemble_laplacian(obj, negative_policy), kind


def write_matrix_market(path, obj, comment=None):
    """Write a Laplacian or edge list as ``coordinate real symmetric``.

    ``path`` may be a file name or a writable text stream.

    A :class:`SparseLaplacian` is written with its diagonal (lower triangle
    entries ``i >= j``); an :class:`EdgeList` as adjacency weights. Values use
    17 significant digits so reading back is exact.
    """
    if isinstance(obj, SparseLaplacian):
        low = sp.tril(obj.offdiag, k=-1).tocoo()
        r = np.concatenate([np.arange(obj.n), low.row])
        c = np.concatenate([np.arange(obj.n), low.col])
        v = np.concatenate([obj.diag, low.data])
        order = np.lexsort((r, c))
        r, c, v = r[order], c[order], v[order]
    elif isinstance(obj, EdgeList):
        e = obj.canonical()
        r, c, v = e.v, e.u, e.w
    else:
        raise TypeError("expected a SparseLaplacian or an EdgeList")
    n = obj.n
    lines = ["%%MatrixMarket matrix coordinate real symmetric"]
    if comment:
        lines += [f"% {line}" for line in comment.splitlines()]
    lines.append(f"{n} {n} {len(v)}")
    lines += [f"{i + 1} {j + 1} {x:.17g}" for i, j, x in zip(r, c, v)]
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="utf-8") as out:
            out.write(text)


def read_vector(path):
    """Read a vector from a Matrix Market array file or one value per line."""
    with _open(path) as handle:
        first = handle.readline()
        values = []
        if first.startswith("%%MatrixMarket"):
            tokens = first.lower().split()
            if tokens[1:] != ["matrix", "array", "real", "general"]:
                raise MatrixMarketError("vector files must be 'matrix array real general'", 1)
            lines = _data_lines(handle, 2)
            try:
                number, size = next(lines)
            except StopIteration:
                raise MatrixMarketError("missing size line") from None
            dims = _ints(size.split(), number, "size")
            if len(dims) != 2 or dims[1] != 1:
                raise MatrixMarketError("vector array must have one column", number)
            expected = dims[0]
        else:
            expected = None
            lines = _data_lines([first, *handle], 1)
        for number, text in lines:
            try:
                values.append(float(text))
            except ValueError:
                raise MatrixMarketError(f"bad value {text!r}", number) from None
        if expected is not None and len(values) != expected:
            raise MatrixMarketError(f"declared {expected} values, found {len(values)}")
    return np.asarray(values, dtype=np.float64)


def write_vector(path, x):
    """Write ``x`` one value per line, or as a Matrix Market array for ``.mtx``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    with open(path, "w", encoding="utf-8") as out:
        if str(path).endswith(".mtx"):
            out.write("%%MatrixMarket matrix array real general\n")
            out.write(f"{len(x)} 1\n")
        for value in x:
            out.write(f"{value:.17g}\n")


def make_rhs(n, spec, seed=None):
    """Build a zero-sum right-hand side.

    Parameters
    ----------
    n : int
    spec : str
        ``'random:SEED'`` (uniform on [-1, 1], mean removed), ``'random'``
        (uses ``seed``), ``'zero'`` or ``'file:PATH'``.
    seed : int, optional
        Seed for ``'random'`` without an explicit seed.

    Raises
    ------
    IncompatibleRHS
        A file vector whose sum exceeds ``1e-10 max|b|``.
    """
    mode, _, arg = spec.partition(":")
    if mode == "zero":
        return np.zeros(n)
    if mode == "random":
        rng = np.random.default_rng(int(arg) if arg else seed)
        b = rng.uniform(-1.0, 1.0, size=n)
        return b - b.mean()
    if mode == "file":
        if not arg:
            raise ValueError("file rhs needs a path: file:PATH")
        if not os.path.exists(arg):
            raise MatrixMarketError(f"cannot open {arg!r}: no such file")
        b = read_vector(arg)
        if len(b) != n:
            raise DimensionMismatch(f"rhs length {len(b)} != n={n}")
        scale = float(np.abs(b).max()) if n else 0.0
        if abs(float(b.sum())) > RHS_SUM_TOL * scale:
            raise IncompatibleRHS(f"right-hand side sums to {b.sum():.3e}, not zero")
        return b
    raise ValueError(f"unknown rhs spec {spec!r}")
