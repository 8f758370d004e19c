import json
import math

import numpy as np
import pytest

from thinmax.experiments import (
    converge_tube,
    dumbbell_small_eigs,
    eigenfunction_distance,
    reference_clusters,
    tem_instability,
    unit_volume_rescale,
)
from thinmax.mesh import MeshError, icosphere, rectangle
from thinmax.oracles import sphere_spectrum
from thinmax.spectrum import assemble_coclosed
from thinmax.mesh import TopologyInfo

PI2 = math.pi**2


def test_unit_volume_rescale():
    assert unit_volume_rescale(np.array([1.0]), 8.0)[0] == pytest.approx(4.0, rel=1e-15)
    v = np.array([0.5, 3.0, 7.0])
    np.testing.assert_array_equal(unit_volume_rescale(v, 1.0), v)
    s = assemble_coclosed(sphere_spectrum(1, 10), TopologyInfo(2, 0, 0), 0.1, 10)
    r = unit_volume_rescale(s, 27.0)
    np.testing.assert_allclose(r.values, 9 * s.values, rtol=1e-14)
    assert [e.key for e in r] == [e.key for e in s]
    with pytest.raises(ValueError):
        unit_volume_rescale(v, 0.0)


def test_reference_clusters():
    vals = [1.0, 2.0, 2.0 + 1e-9, 2.0, 5.0, 5.0]
    ref, sizes = reference_clusters(vals, 2)
    assert sizes == [1, 3] and len(ref) == 4
    with pytest.raises(ValueError):
        reference_clusters(vals, 7)


@pytest.mark.parametrize("hs", [[], [0.1, 0.1], [0.1, 0.2], [0.1, -0.05]])
def test_hs_validation(hs):
    with pytest.raises(ValueError):
        converge_tube(rectangle(1, 1, 3), hs)


def test_converge_rectangle_small():
    rep = converge_tube(rectangle(1, 1, 12), [0.2, 0.1], count=1)
    assert rep.bc == "dirichlet" and rep.cluster_sizes == [1]
    assert rep.violations == 0 and rep.monotone and rep.crossval_ok
    assert rep.errors[1][0] < rep.errors[0][0]
    assert rep.kernel_dims == rep.interior_vertices
    d = json.loads(rep.to_json())
    assert d["schema_version"] == 1 and d["report"] == "ConvergenceReport"


def test_converge_sphere_small():
    rep = converge_tube(icosphere(2), [0.2, 0.1], count=3)
    assert rep.bc == "closed" and rep.cluster_sizes == [3]
    assert rep.violations == 0 and rep.monotone
    # one harmonic field on top of the gradients for a shell
    assert [k - i for k, i in zip(rep.kernel_dims, rep.interior_vertices)] == [1, 1]


def test_flat_layers_agree():
    a = converge_tube(rectangle(1, 1, 6), [0.1], layers=1, count=2)
    b = converge_tube(rectangle(1, 1, 6), [0.1], layers=2, count=2)
    np.testing.assert_allclose(a.eigenvalues[0], b.eigenvalues[0], rtol=0.05)


def test_eigenfunction_distance_rectangle():
    m = rectangle(1, 1, 8)
    rep = eigenfunction_distance(m, [0.2, 0.1], target=1)
    assert rep.decreasing and rep.block == [1]
    assert all(0 <= r < 0.1 for r in rep.residuals)
    flipped = eigenfunction_distance(m, [0.2, 0.1], target=1, sign=-1.0)
    np.testing.assert_allclose(flipped.residuals, rep.residuals, rtol=1e-10)
    with pytest.raises(ValueError):
        eigenfunction_distance(m, [0.1], target=0)


def test_eigenfunction_distance_cluster():
    rep = eigenfunction_distance(icosphere(2), [0.2, 0.1], target=2)
    assert rep.block == [1, 2, 3]
    assert rep.decreasing


def test_dumbbell_quick():
    rep = dumbbell_small_eigs(neck_radii=(0.3, 0.15), n=8)
    assert rep.mu2_strictly_decreasing
    assert len(rep.rescaled[0]) == 2 and rep.rescaled[0][0] == 0.0
    for mu, vol, sc in zip(rep.mu, rep.volumes, rep.rescaled):
        np.testing.assert_allclose(sc[1], mu[1] * vol ** (2 / 3), rtol=1e-12)
    with pytest.raises(ValueError):
        dumbbell_small_eigs(num_bulbs=1)
    with pytest.raises(ValueError):
        dumbbell_small_eigs(neck_radii=(0.2, 0.2))
    with pytest.raises(MeshError):
        dumbbell_small_eigs(eps=1e-12, neck_radii=(0.3,), n=8, extend=True, min_radius=0.1)


def test_tem_instability_small():
    rep = tem_instability(deltas=(0.2, 0.1), n=3, square_n=12)
    assert rep.tem_present and rep.tem_absent_at_zero and rep.muD1_decreasing
    assert rep.tem == [[PI2, 4 * PI2, 9 * PI2]] * 2 + [[]]
    half = tem_instability(deltas=(0.2,), h=0.5, n=3, square_n=12)
    assert half.tem[0] == [pytest.approx(4 * PI2, rel=1e-15)]
    with pytest.raises(ValueError):
        tem_instability(deltas=(0.0,))
    with pytest.raises(MeshError):
        tem_instability(deltas=(0.6,))
