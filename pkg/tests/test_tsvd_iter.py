import numpy as np
import pytest

from truncgrad import (
    DegenerateCut,
    GradConfig,
    MatrixSeed,
    NearSingularShift,
    NoConvergence,
    ShiftedSystem,
    frob,
    full_svd,
    gen_matrix,
    gkl_partial_svd,
    jvp_truncated_svd_explicit,
    jvp_truncated_svd_iterative,
    project_discarded,
    projected_minres,
    solve_sylvester_dense,
    solve_sylvester_projected,
    truncate_svd,
)


def _rand(rng, n, m):
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def _herm(rng, n):
    h = _rand(rng, n, n)
    return (h + h.conj().T) / 2


def test_projected_minres_matches_dense_solve():
    rng = np.random.default_rng(0)
    n = 12
    h = _herm(rng, n)
    shift = 50.0  # comfortably outside the spectrum
    rhs = _rand(rng, n, 1)[:, 0]
    x, rel = projected_minres(lambda v: shift * v - h @ v, rhs,
                              tol=1e-12, max_iter=200)
    ref = np.linalg.solve(shift * np.eye(n) - h, rhs)
    assert frob(x - ref) <= 1e-9 * (1 + frob(ref))
    assert rel <= 1e-12


def test_projected_minres_zero_rhs_returns_zero():
    x, rel = projected_minres(lambda v: 2.0 * v, np.zeros(4, dtype=complex),
                              tol=1e-12, max_iter=10)
    assert np.all(x == 0) and rel == 0.0


def test_projected_minres_singular_shift_raises():
    # operator action is (1 - 1)v = 0 on part of the space: rhs unreachable
    d = np.array([1.0, 2.0, 3.0])
    rhs = np.array([1.0, 0.0, 0.0], dtype=complex)
    with pytest.raises(NearSingularShift):
        projected_minres(lambda v: (1.0 - d) * v, rhs, tol=1e-12, max_iter=50)


def test_projected_minres_iteration_cap():
    rng = np.random.default_rng(3)
    h = _herm(rng, 30)
    rhs = _rand(rng, 30, 1)[:, 0]
    with pytest.raises(NoConvergence):
        projected_minres(lambda v: 40.0 * v - h @ v, rhs, tol=1e-14,
                         max_iter=2)


def test_project_discarded_matches_complement_action():
    rng = np.random.default_rng(4)
    a = gen_matrix(MatrixSeed(seed=4, kind="prescribed-spectrum",
                              spectrum=(5.0, 4.0, 3.0, 2.0, 1.0)), 7, 5)
    f = full_svd(a)
    kept, disc = truncate_svd(f, 2)
    v = _rand(rng, 5, 1)[:, 0]
    left = project_discarded(a, kept, side="left")
    right = project_discarded(a, kept, side="right")
    # both sides act like U_perp S_perp V_perp^H on any vector
    up = f.U[:, 2:]
    ref = up @ (np.diag(f.S[2:]) @ (f.V[:, 2:].conj().T @ v))
    assert frob(left(v) - ref) <= 1e-12 * (1 + frob(ref))
    assert frob(right(v) - ref) <= 1e-12 * (1 + frob(ref))
    assert frob(left(v) - right(v)) <= 1e-12 * (1 + frob(ref))
    with pytest.raises(ValueError):
        project_discarded(a, kept, side="middle")


def _orth_projector_system(rng, n, shift):
    h = _herm(rng, n)
    q, _ = np.linalg.qr(_rand(rng, n, n - 2))
    proj = lambda v: q @ (q.conj().T @ v)
    rhs = proj(_rand(rng, n, 1)[:, 0])
    op = lambda v: h @ v
    return ShiftedSystem(operator=op, shift=shift, projector=proj, rhs=rhs)


def test_solve_projected_matches_dense_oracle_orthogonal():
    rng = np.random.default_rng(5)
    sys_ = _orth_projector_system(rng, 14, shift=60.0)
    cfg = GradConfig(solver_tol=1e-12)
    x_it = solve_sylvester_projected(sys_, cfg)
    x_dense = solve_sylvester_dense(sys_)
    assert frob(x_it - x_dense) <= 1e-10 * (1 + frob(x_dense))
    # solution stays in the range of the projector
    assert frob(sys_.projector(x_it) - x_it) <= 1e-10 * (1 + frob(x_it))


def test_solve_projected_matches_dense_oracle_oblique():
    rng = np.random.default_rng(6)
    n = 10
    x = np.linalg.qr(_rand(rng, n, n))[0] @ (np.eye(n) + 0.2 * _rand(rng, n, n) / n)
    y = np.linalg.inv(x)
    lam = np.arange(1.0, n + 1.0)
    a = x @ np.diag(lam) @ y
    # oblique projector off the first eigencolumn
    xk, yk = x[:, :1], y[:1, :]
    proj = lambda v: v - xk @ (yk @ v)
    rhs = proj(_rand(rng, n, 1)[:, 0])
    shift = lam[0]
    sys_ = ShiftedSystem(operator=lambda v: a @ v, shift=shift,
                         projector=proj, rhs=rhs)
    cfg = GradConfig(solver_tol=1e-12)
    x_it = solve_sylvester_projected(sys_, cfg)
    x_dense = solve_sylvester_dense(sys_)
    assert frob(x_it - x_dense) <= 1e-9 * (1 + frob(x_dense))
    resid = shift * x_it - a @ x_it - rhs
    assert frob(proj(resid)) <= 1e-9 * (1 + frob(rhs))


def test_solve_dense_rejects_large_systems():
    n = 65
    sys_ = ShiftedSystem(operator=lambda v: v, shift=2.0,
                         projector=lambda v: v, rhs=np.zeros(n, dtype=complex))
    with pytest.raises(ValueError):
        solve_sylvester_dense(sys_)


def test_solve_projected_rejects_rhs_outside_range():
    rng = np.random.default_rng(8)
    n = 8
    h = _herm(rng, n)
    q, _ = np.linalg.qr(_rand(rng, n, n - 3))
    proj = lambda v: q @ (q.conj().T @ v)
    rhs = _rand(rng, n, 1)[:, 0]
    rhs = rhs - proj(rhs) + 0.5 * proj(rhs)  # visibly outside range(proj)
    sys_ = ShiftedSystem(operator=lambda v: h @ v, shift=70.0,
                         projector=proj, rhs=rhs)
    with pytest.raises(ValueError):
        solve_sylvester_projected(sys_)


def test_iterative_micro_instance_exact():
    a = np.diag([2.0, 1.0]).astype(complex)
    kept, _ = truncate_svd(full_svd(a), 1)
    da = np.array([[0, 0], [1, 0]], dtype=complex)
    tan = jvp_truncated_svd_iterative(a, kept, da)
    assert np.allclose(tan.dU, [[0.0], [2.0 / 3.0]], atol=1e-10)
    assert np.allclose(tan.dV, [[0.0], [1.0 / 3.0]], atol=1e-10)
    assert np.allclose(tan.dS, [0.0], atol=1e-12)


@pytest.mark.parametrize("shape", [(6, 6), (9, 5), (5, 9)])
def test_iterative_agrees_with_explicit(shape):
    n, m = shape
    r = min(n, m)
    spectrum = tuple(float(r - k) + 0.5 for k in range(r))
    for seed in (21, 22):
        rng = np.random.default_rng(seed)
        a = gen_matrix(MatrixSeed(seed=seed, kind="prescribed-spectrum",
                                  spectrum=spectrum), n, m)
        f = full_svd(a)
        kept, disc = truncate_svd(f, 2)
        da = _rand(rng, n, m)
        da /= frob(da)
        te = jvp_truncated_svd_explicit(kept, disc, da)
        ti = jvp_truncated_svd_iterative(a, kept, da)
        assert frob(te.dU - ti.dU) <= 1e-9
        assert frob(te.dV - ti.dV) <= 1e-9
        assert frob(te.dS - ti.dS) <= 1e-9
        # iterated complement block stays orthogonal to the kept basis
        assert frob(kept.U.conj().T @ ti.du2) <= 1e-11
        assert frob(kept.V.conj().T @ ti.dv2) <= 1e-11


def test_gkl_recovers_leading_triples():
    spectrum = (10.0, 5.0, 1.0, 0.1)
    a = gen_matrix(MatrixSeed(seed=31, kind="prescribed-spectrum",
                              spectrum=spectrum), 6, 5)
    kept = gkl_partial_svd(a, 2, seed=31)
    assert np.allclose(kept.S, [10.0, 5.0], atol=1e-10)
    ref, _ = truncate_svd(full_svd(a), 2)
    # factors agree up to a unit phase per column
    for j in range(2):
        ph = ref.U[:, j].conj() @ kept.U[:, j]
        assert abs(abs(ph) - 1.0) <= 1e-9
        assert frob(kept.U[:, j] - ph * ref.U[:, j]) <= 1e-8
        assert frob(kept.V[:, j] - ph * ref.V[:, j]) <= 1e-8
    # phase canonicalization: largest-modulus entry of each u is real positive
    for j in range(2):
        k = int(np.argmax(np.abs(kept.U[:, j])))
        val = kept.U[k, j]
        assert abs(val.imag) <= 1e-10 and val.real > 0


def test_gkl_residuals_and_semiunitarity():
    a = gen_matrix(MatrixSeed(seed=33, kind="complex-gaussian"), 12, 9)
    kept = gkl_partial_svd(a, 3, seed=33)
    scale = np.linalg.norm(a, 2)
    for j in range(3):
        ru = a @ kept.V[:, j] - kept.S[j] * kept.U[:, j]
        rv = a.conj().T @ kept.U[:, j] - kept.S[j] * kept.V[:, j]
        assert frob(ru) <= 1e-10 * scale
        assert frob(rv) <= 1e-10 * scale
    assert frob(kept.U.conj().T @ kept.U - np.eye(3)) <= 1e-10
    assert frob(kept.V.conj().T @ kept.V - np.eye(3)) <= 1e-10


def test_gkl_degenerate_cut_detected():
    spectrum = (3.0, 3.0 - 1e-14, 1.0)
    a = gen_matrix(MatrixSeed(seed=35, kind="prescribed-spectrum",
                              spectrum=spectrum), 5, 4)
    with pytest.raises(DegenerateCut):
        gkl_partial_svd(a, 1, seed=35)


def test_gkl_iteration_cap():
    a = gen_matrix(MatrixSeed(seed=36, kind="complex-gaussian"), 40, 35)
    with pytest.raises(NoConvergence):
        gkl_partial_svd(a, 3, max_iter=1, tol=1e-15, seed=36)


def test_gkl_rank_bounds():
    a = gen_matrix(MatrixSeed(seed=37, kind="complex-gaussian"), 5, 4)
    with pytest.raises(ValueError):
        gkl_partial_svd(a, 0)
    with pytest.raises(ValueError):
        gkl_partial_svd(a, 4)
