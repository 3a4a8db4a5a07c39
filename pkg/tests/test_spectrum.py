import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weakmodel.errors import (GridTooCoarse, IndexOutOfRange,
                              UnsupportedDimension)
from weakmodel.oracle import sphere_laplacian_s2
from weakmodel.spectrum import (BoundaryData, CoefficientTable,
                                eigen_round_sphere, eigenfunction_eval,
                                export_coefficients_json,
                                load_coefficients_json, multiplicity,
                                project_boundary, sphere_quadrature,
                                synthesize)


def test_eigenvalues_and_multiplicities():
    mode = eigen_round_sphere(2, 3)
    assert mode.lambda_sq == 9.0 and mode.multiplicity == 2
    mode = eigen_round_sphere(3, 2)
    assert mode.lambda_sq == 6.0 and mode.multiplicity == 5
    mode = eigen_round_sphere(7, 0)
    assert mode.lambda_sq == 0.0 and mode.multiplicity == 1
    assert eigen_round_sphere(7, 2).multiplicity is None
    assert eigen_round_sphere(2, 0).multiplicity == 1
    assert eigen_round_sphere(3, 5).multiplicity == 11


def test_eigenvalue_oracle_discrete_laplacian():
    # degree-2 spherical harmonics reproduce lambda^2 = 6 under the FD stencil
    colat = np.linspace(0.0, math.pi, 181)
    lon = np.linspace(0.0, 2 * math.pi, 360, endpoint=False)
    cc, ll = np.meshgrid(colat, lon, indexing="ij")
    F = eigenfunction_eval(3, 2, 1, (cc, ll))
    lap = sphere_laplacian_s2(F, colat, lon)
    interior = slice(20, 161)
    lam_est = -lap[interior] / F[1:-1][interior]
    mask = np.abs(F[1:-1][interior]) > 0.1
    assert_allclose(np.median(lam_est[mask]), 6.0, atol=1e-3)


def test_eigenfunction_normalization_values():
    # frozen from the quadrature normalization oracle below
    assert_allclose(eigenfunction_eval(2, 0, 0, 0.37), 0.3989422804014327,
                    rtol=1e-12)
    assert_allclose(eigenfunction_eval(2, 1, 0, 0.0), 0.5641895835477563,
                    rtol=1e-12)
    north = (0.0, 0.0)
    assert_allclose(eigenfunction_eval(3, 1, 0, north), 0.4886025119029199,
                    rtol=1e-12)


@pytest.mark.parametrize("n,m,k", [(2, 0, 0), (2, 1, 0), (2, 4, 1),
                                   (3, 0, 0), (3, 1, 0), (3, 3, 4)])
def test_normalization_integral_oracle(n, m, k):
    quad = sphere_quadrature(n, max(m + 2, 4))
    vals = eigenfunction_eval(n, m, k, quad.unpack())
    assert_allclose(float(np.dot(quad.weights, vals ** 2)), 1.0, rtol=1e-12)


@pytest.mark.parametrize("n,M", [(2, 16), (3, 8)])
def test_gram_identity(n, M):
    quad = sphere_quadrature(n, M)
    omega = quad.unpack()
    basis = []
    for m in range(M + 1):
        for k in range(multiplicity(n, m)):
            basis.append(eigenfunction_eval(n, m, k, omega))
    B = np.array(basis)
    gram = (B * quad.weights) @ B.T
    assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10


def test_discrete_eigenrelation_one_degree_grid():
    # 1-degree lat-lon grid, relative L2 error below 1e-2 for all m <= 4
    colat = np.linspace(0.0, math.pi, 181)
    lon = np.linspace(0.0, 2 * math.pi, 360, endpoint=False)
    cc, ll = np.meshgrid(colat, lon, indexing="ij")
    for m in (1, 2, 3, 4):
        lam2 = m * (m + 1)
        for k in (0, min(1, 2 * m)):
            F = eigenfunction_eval(3, m, k, (cc, ll))
            lap = sphere_laplacian_s2(F, colat, lon)
            # exclude pole-adjacent rows where cot blows up the stencil error
            sl = slice(4, 173)
            err = np.linalg.norm(-lap[sl] - lam2 * F[1:-1][sl])
            assert err / np.linalg.norm(lam2 * F[1:-1][sl]) < 1e-2


def test_projection_orthonormality():
    f = BoundaryData.from_function(2, 4, lambda th: eigenfunction_eval(2, 1, 0, th))
    table = project_boundary(f, 4)
    assert_allclose(table.get(1, 0), 1.0, atol=1e-12)
    others = [c for (m, k), c in table.items() if (m, k) != (1, 0)]
    assert np.max(np.abs(others)) < 1e-12


def test_projection_constant():
    f = BoundaryData.from_function(2, 2, lambda th: np.ones_like(th))
    table = project_boundary(f, 2)
    assert_allclose(table.get(0, 0), math.sqrt(2 * math.pi), rtol=1e-12)
    assert abs(table.get(1, 0)) < 1e-12 and abs(table.get(2, 1)) < 1e-12


def test_projection_cos_combination():
    f = BoundaryData.from_function(2, 4, lambda th: 3 * np.cos(th) - 2)
    table = project_boundary(f, 4)
    assert_allclose(table.get(0, 0), -2 * math.sqrt(2 * math.pi), rtol=1e-12)
    assert_allclose(table.get(1, 0), 3 * math.sqrt(math.pi), rtol=1e-12)
    rest = [c for (m, k), c in table.items() if (m, k) not in ((0, 0), (1, 0))]
    assert np.max(np.abs(rest)) < 1e-12


@pytest.mark.parametrize("n,M", [(2, 6), (3, 4)])
def test_project_synthesize_roundtrip(n, M):
    rng = np.random.default_rng(7)
    table = CoefficientTable(n)
    for m in range(M + 1):
        for k in range(multiplicity(n, m)):
            table.set(m, k, float(rng.normal()))
    quad = sphere_quadrature(n, M)
    samples = synthesize(table, n, quad.unpack())
    back = project_boundary(BoundaryData.from_samples(n, M, samples), M)
    for (m, k), c in table.items():
        assert_allclose(back.get(m, k), c, atol=1e-10)


def test_error_paths():
    with pytest.raises(UnsupportedDimension):
        eigenfunction_eval(4, 1, 0, 0.0)
    with pytest.raises(IndexOutOfRange):
        eigenfunction_eval(2, 1, 2, 0.0)
    with pytest.raises(IndexOutOfRange):
        eigenfunction_eval(3, 2, 5, (0.3, 0.4))
    f = BoundaryData.from_function(2, 3, np.cos)
    with pytest.raises(GridTooCoarse):
        project_boundary(f, 5)


def test_boundary_csv_roundtrip(tmp_path):
    quad = sphere_quadrature(2, 3)
    vals = np.cos(quad.points) + 0.25
    path = tmp_path / "bc2.csv"
    with open(path, "w") as fh:
        fh.write("theta,f\n")
        for th, v in zip(quad.points, vals):
            fh.write(f"{th:.17g},{v:.17g}\n")
    data = BoundaryData.from_csv(path, 2, 3)
    assert_allclose(data.samples, vals)

    quad3 = sphere_quadrature(3, 2)
    vals3 = np.cos(quad3.points[:, 0])
    path3 = tmp_path / "bc3.csv"
    with open(path3, "w") as fh:
        fh.write("colat,lon,f\n")
        for (c0, l0), v in zip(quad3.points, vals3):
            fh.write(f"{c0:.17g},{l0:.17g},{v:.17g}\n")
    data3 = BoundaryData.from_csv(path3, 3, 2)
    assert_allclose(data3.samples, vals3)

    # wrong grid is rejected
    with open(path, "w") as fh:
        fh.write("theta,f\n0.0,1.0\n0.5,1.0\n")
    with pytest.raises(GridTooCoarse):
        BoundaryData.from_csv(path, 2, 3)


def test_coefficients_json_roundtrip(tmp_path):
    table = CoefficientTable(2, {(0, 0): 1.5, (2, 1): -0.125})
    path = tmp_path / "coeffs.json"
    export_coefficients_json(table, path)
    back = load_coefficients_json(path, 2)
    assert back == table
    obj = json.loads(path.read_text())
    assert obj == [{"m": 0, "k": 0, "c": 1.5}, {"m": 2, "k": 1, "c": -0.125}]
