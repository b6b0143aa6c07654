import math

import numpy as np
import pytest

import qembed


def test_circle_distance_and_audit():
    c = qembed.space({"kind": "circle", "circumference": 1.0})
    assert c.distance(np.array([0.0]), np.array([0.9])) == pytest.approx(0.1)
    f = qembed.embed(c)
    rep = qembed.audit(c, f, pairs=2000, seed=42)
    assert rep["pass"]
    assert rep["max_expansion"] <= 1.0 + 1e-12
    assert rep["distortion"] <= f.claimed * (1 + 1e-6)
    assert list(rep)[:4] == ["pair_count", "pairs_used", "seed", "sampling_measure"]


def test_audit_is_deterministic_across_threads():
    e = qembed.space({"kind": "holonomy_bundle", "theta": 1.0, "k_max": 3})
    f = qembed.embed(e, "annulus")
    assert qembed.audit(e, f, 3000, 7, 1) == qembed.audit(e, f, 3000, 7, 4)


def test_artifact_round_trip():
    lens = qembed.space({"kind": "lens", "p": 5, "q": 2})
    f = qembed.embed(lens, "patch")
    g, back = qembed.load_artifact(f.serialize(lens))
    for x in lens.sample(3, 20):
        assert np.array_equal(f(x), g(x))
    assert back.spec() == lens.spec()
    with pytest.raises(ValueError):
        qembed.load_artifact(f.serialize(lens)[:50])


def test_short_basis_and_decomposition():
    sb = qembed.short_basis(np.array([[1.0, 1.0], [0.0, 3.0]]))
    assert sb["norms"] == pytest.approx([1.0, 3.0])
    r = np.array([[math.cos(0.7), -math.sin(0.7), 0], [math.sin(0.7), math.cos(0.7), 0], [0, 0, 1.0]])
    dec = qembed.canonical_decomposition([r])
    assert dec["reconstruction_error"] < 1e-8
    assert dec["invariance_error"] < 1e-9


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        qembed.space({"kind": "nonsense"})
    pt = qembed.space({"kind": "finite", "distances": [[0.0]]})
    with pytest.raises(RuntimeError):
        qembed.audit(pt, qembed.embed(pt), pairs=10)


def test_estimate_doubling_segment():
    seg = qembed.space({"kind": "euclidean", "lo": [0.0], "hi": [1.0]})
    assert qembed.estimate_doubling(seg, 0.01, 0.5)["D"] <= 3
