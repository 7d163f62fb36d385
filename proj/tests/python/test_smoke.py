import numpy as np
import pytest

import fastqm


def parabola_basis():
    data = fastqm.gen_parabola(25)
    return data, fastqm.candidate_basis(data, 2)


def test_parabola_errors():
    data, basis = parabola_basis()
    assert data.shape == (2, 25)
    assert fastqm.training_error(fastqm.fit_pod(basis, 1), basis) == pytest.approx(0.3732, abs=2e-3)
    assert fastqm.training_error(fastqm.fit_pod_qm(basis, 1, 1), basis) == pytest.approx(0.3659, abs=2e-3)
    model, report = fastqm.fit_fastqm(basis, 1, 1, 0.0, fastqm.SolverConfig(grad_tol=1e-4))
    assert report.termination == "grad_tol"
    approx = fastqm.reconstruct(model, data)
    assert fastqm.relative_error(data, approx) < 1e-3


def test_encode_decode_shapes():
    data, basis = parabola_basis()
    model = fastqm.fit_pod_qm(basis, 1, 1)
    s_hat = fastqm.encode(model, data[:, 3])
    assert s_hat.shape == (1,)
    assert fastqm.decode(model, s_hat).shape == (2,)


def test_tensor_helpers():
    x = np.array([2.0, -3.0])
    np.testing.assert_allclose(fastqm.compressed_square(x), [4.0, -6.0, 9.0])
    X = np.random.default_rng(0).normal(size=(3, 5))
    W = fastqm.khatri_rao_square(X)
    assert W.shape == (6, 5)
    np.testing.assert_allclose(W[:, 2], fastqm.compressed_square(X[:, 2]))


def test_feature_objective_identity():
    rng = np.random.default_rng(1)
    data = rng.normal(size=(8, 15))
    basis = fastqm.candidate_basis(data, 5)
    Q, _ = np.linalg.qr(rng.normal(size=(5, 4)))
    cost, grad, xi = fastqm.feature_objective(Q, 2, basis.S_tilde, 0.01)
    Vr = basis.V_tilde @ Q[:, :2]
    Vq = basis.V_tilde @ Q[:, 2:]
    A = Vr.T @ data
    W = fastqm.khatri_rao_square(A)
    full = np.linalg.norm(data - Vr @ A - Vq @ xi @ W) ** 2 + 0.01 * np.linalg.norm(xi) ** 2
    assert full - cost == pytest.approx(np.linalg.norm(data) ** 2, rel=1e-10)
    assert grad.shape == (5, 4)


def test_greedy_and_rotation():
    data, basis = parabola_basis()
    model, selected, history = fastqm.fit_greedy(basis, 1, 1)
    assert len(selected) == 1 and len(history) == 1
    landscape = fastqm.rotation_sweep(data)
    assert landscape.shape == (629, 2)
    theta = landscape[np.argmin(landscape[:, 1]), 0] % np.pi
    assert abs(theta - 0.74) <= 0.02


def test_errors_and_io(tmp_path):
    _, basis = parabola_basis()
    with pytest.raises(fastqm.InputError):
        fastqm.fit_pod_qm(basis, 2, 1)
    M = np.random.default_rng(2).normal(size=(4, 3))
    fastqm.save_matrix(tmp_path / "m.fqm", M)
    np.testing.assert_array_equal(fastqm.load_matrix(tmp_path / "m.fqm"), M)
    model = fastqm.fit_pod_qm(basis, 1, 1)
    model.save(tmp_path / "model.fqm")
    back = fastqm.QuadraticManifoldModel.load(tmp_path / "model.fqm")
    np.testing.assert_array_equal(back.Xi, model.Xi)
    with pytest.raises(fastqm.IoError):
        fastqm.load_matrix(tmp_path / "missing.fqm")
