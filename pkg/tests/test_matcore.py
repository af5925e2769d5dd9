import numpy as np
import pytest

from truncgrad import (
    CmxFormatError,
    MatrixSeed,
    ShapeMismatch,
    adjoint,
    cmat,
    frob,
    gen_matrix,
    hadamard,
    read_cmx,
    real_diag,
    write_cmx,
)


def test_cmat_validates_shape_and_finiteness():
    a = cmat([[1, 2], [3, 4]])
    assert a.dtype == np.complex128 and a.shape == (2, 2)
    b = cmat([1, 2, 3, 4, 5, 6], rows=2, cols=3)
    assert b.shape == (2, 3)
    with pytest.raises(ShapeMismatch):
        cmat([1, 2, 3])
    with pytest.raises(ShapeMismatch):
        cmat([1, 2, 3], rows=2, cols=2)
    with pytest.raises(ValueError):
        cmat([[np.inf, 0], [0, 0]])
    with pytest.raises(ValueError):
        cmat([[complex(0, np.nan), 0], [0, 0]])


def test_real_diag_rejects_matrices_and_nonfinite():
    assert real_diag([3.0, 2.0, 1.0]).dtype == np.float64
    with pytest.raises(ShapeMismatch):
        real_diag([[1.0, 2.0]])
    with pytest.raises(ValueError):
        real_diag([1.0, np.nan])


def test_hadamard_entrywise_and_commutative():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    b = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    c = rng.standard_normal((3, 4))
    assert np.allclose(hadamard(a, b), hadamard(b, a))
    assert np.allclose(hadamard(hadamard(a, b), c), hadamard(a, hadamard(b, c)))
    assert hadamard(a, b)[1, 2] == a[1, 2] * b[1, 2]
    with pytest.raises(ShapeMismatch):
        hadamard(a, a.T)


def test_adjoint_preserves_frobenius_norm():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    assert adjoint(a).shape == (3, 5)
    assert frob(adjoint(a)) == pytest.approx(frob(a), rel=1e-15)
    assert np.allclose(adjoint(adjoint(a)), a)


def test_gen_matrix_is_deterministic():
    spec = MatrixSeed(seed=42, kind="complex-gaussian")
    a = gen_matrix(spec, 6, 4)
    b = gen_matrix(spec, 6, 4)
    assert a.tobytes() == b.tobytes()
    c = gen_matrix(MatrixSeed(seed=43, kind="complex-gaussian"), 6, 4)
    assert not np.array_equal(a, c)


def test_gen_matrix_real_kind_has_no_imaginary_part():
    a = gen_matrix(MatrixSeed(seed=5, kind="real-gaussian"), 4, 7)
    assert a.dtype == np.complex128
    assert np.all(a.imag == 0.0)


def test_gen_matrix_prescribed_spectrum_matches_platform_svd():
    # independent oracle: the platform SVD recovers the requested spectrum
    spec = MatrixSeed(seed=7, kind="prescribed-spectrum", spectrum=(3.0, 2.0, 1.0))
    a = gen_matrix(spec, 5, 4)
    s = np.linalg.svd(a, compute_uv=False)
    assert np.allclose(s[:3], [3.0, 2.0, 1.0], rtol=1e-10)
    assert abs(s[3]) <= 1e-12 * 3.0


def test_gen_matrix_near_degenerate_min_gap():
    spec = MatrixSeed(seed=9, kind="near-degenerate", gap=1e-8)
    a = gen_matrix(spec, 4, 4)
    s = np.linalg.svd(a, compute_uv=False)
    rel_gaps = (s[:-1] - s[1:]) / s[0]
    assert 0.9e-8 <= rel_gaps.min() <= 1.1e-8


def test_gen_matrix_input_validation():
    with pytest.raises(ValueError):
        gen_matrix(MatrixSeed(seed=0), 0, 3)
    with pytest.raises(ValueError):
        MatrixSeed(seed=0, kind="nonsense")
    with pytest.raises(ValueError):
        MatrixSeed(seed=0, kind="prescribed-spectrum")
    with pytest.raises(ValueError):
        MatrixSeed(seed=0, kind="near-degenerate", gap=-1.0)
    with pytest.raises(ValueError):
        gen_matrix(MatrixSeed(seed=0, kind="prescribed-spectrum",
                              spectrum=(1.0, 2.0, 3.0)), 2, 2)


def test_cmx_round_trip_is_bit_exact():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-12, 12, (4, 3))
    a = a + 1j * rng.standard_normal((4, 3)) * 1e-7
    b = read_cmx(write_cmx(a))
    assert b.tobytes() == np.ascontiguousarray(a, dtype=complex).tobytes()


def test_cmx_canonical_writer_is_idempotent():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    doc = write_cmx(a)
    assert write_cmx(read_cmx(doc)) == doc
    # non-canonical layout parses to the same matrix
    tokens = doc.split()
    messy = tokens[0] + " " + tokens[1] + " " + tokens[2] + "\n" + "  ".join(tokens[3:])
    assert np.array_equal(read_cmx(messy), a)


def test_cmx_header_shape_and_layout():
    doc = write_cmx(np.array([[1.5 + 2.5j, -3.0]]))
    lines = doc.splitlines()
    assert lines[0] == "cmx 1 2"
    assert lines[1].split() == ["1.5", "2.5"]
    assert lines[2].split() == ["-3", "0"]


def test_cmx_seventeen_digit_round_trip():
    vals = np.array([[np.pi * 1e-7 + np.e * 1e9j, -0.1 + 0.3j]])
    out = read_cmx(write_cmx(vals))
    assert out[0, 0] == vals[0, 0] and out[0, 1] == vals[0, 1]


@pytest.mark.parametrize("doc", [
    "not-cmx 2 2\n1 0 1 0 1 0 1 0\n",
    "cmx 2\n1 0 1 0\n",
    "cmx 2 x\n1 0 1 0 1 0 1 0\n",
    "cmx 0 2\n",
    "cmx 2 2\n1 0 1 0 1 0\n",
    "cmx 1 1\n1 0 3 4\n",
    "cmx 1 1\n1 abc\n",
    "cmx 1 1\n1 nan\n",
    "cmx 1 1\ninf 0\n",
])
def test_cmx_rejects_malformed_documents(doc):
    with pytest.raises(CmxFormatError):
        read_cmx(doc)
