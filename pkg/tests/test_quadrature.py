import numpy as np
import pytest
from scipy.integrate import quad

from aeq.quadrature import PanelGrid


def test_integrate_polynomial_exact():
    pg = PanelGrid.uniform(0.0, 2.0, 0.5, g=4)
    vals = pg.flat_nodes() ** 5
    assert pg.integrate(vals.reshape(pg.n_panels, 4)) == pytest.approx(2 ** 6 / 6, rel=1e-14)


def test_integrate_vs_scipy():
    pg = PanelGrid.uniform(0.0, 10.0, 0.25, g=8)
    f = lambda s: np.exp(-s) * np.sin(3 * s)
    vals = f(pg.flat_nodes()).reshape(pg.n_panels, 8)
    ref, _ = quad(f, 0, 10, limit=200)
    assert pg.integrate(vals) == pytest.approx(ref, abs=1e-13)


def test_cumulative_from_right_scalar():
    pg = PanelGrid.uniform(0.0, 8.0, 0.25, g=8)
    nodes = pg.flat_nodes()
    vals = np.exp(-nodes).reshape(pg.n_panels, 8, 1, 1)
    edge, node = pg.cumulative_from_right(vals)
    # F(t) = int_t^8 e^-s ds = e^-t - e^-8
    expect_edges = np.exp(-pg.edges) - np.exp(-8.0)
    assert np.allclose(edge[:, 0, 0], expect_edges, atol=1e-13)
    expect_nodes = np.exp(-nodes) - np.exp(-8.0)
    assert np.allclose(node.reshape(-1), expect_nodes, atol=1e-12)


def test_cumulative_from_left_scalar():
    pg = PanelGrid.uniform(-6.0, -1.0, 0.25, g=8)
    nodes = pg.flat_nodes()
    vals = np.exp(nodes).reshape(pg.n_panels, 8, 1, 1)
    edge, node = pg.cumulative_from_left(vals)
    # G(t) = int_{-6}^t e^s ds = e^t - e^-6
    assert np.allclose(edge[:, 0, 0], np.exp(pg.edges) - np.exp(-6.0), atol=1e-13)
    assert np.allclose(node.reshape(-1), np.exp(nodes) - np.exp(-6.0), atol=1e-12)


def test_matrix_valued_cumulative():
    pg = PanelGrid.uniform(0.0, 2.0, 0.5, g=6)
    nodes = pg.flat_nodes()
    vals = np.zeros((len(nodes), 2, 2))
    vals[:, 0, 1] = nodes
    vals = vals.reshape(pg.n_panels, 6, 2, 2)
    edge, _ = pg.cumulative_from_right(vals)
    # int_t^2 s ds = 2 - t^2/2
    assert np.allclose(edge[:, 0, 1], 2.0 - pg.edges ** 2 / 2, atol=1e-14)
    assert np.allclose(edge[:, 1, 0], 0.0)


def test_bad_edges_rejected():
    with pytest.raises(ValueError):
        PanelGrid(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        PanelGrid(np.array([1.0]))
