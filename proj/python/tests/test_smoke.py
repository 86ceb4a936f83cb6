import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import etale

DATA = Path(os.environ.get("ETALE_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def spec(name):
    return str(DATA / name)


def test_groupoid_basics():
    a = etale.load_groupoid(spec("A.spec"))
    assert (a.num_objects, a.num_arrows) == (3, 6)
    assert a.validate() == []
    assert sorted(len(o) for o in a.orbits()) == [1, 2]
    assert a.is_connected()
    zero = a.object_names.index("0")
    assert a.isotropy_order(zero) == 2
    assert etale.spec_kind(spec("A.spec")) == "groupoid-action"


def test_localization_is_equivalent():
    a = etale.load_groupoid(spec("A.spec"))
    local, equivalent = etale.localize_edges(a)
    assert equivalent
    assert len(local.orbits()) == len(a.orbits())


def test_morphisms_agree_with_pairs():
    a = etale.load_groupoid(spec("A.spec"))
    star = a.object_names.index("0")
    pairs = etale.equivariant_pairs(spec("A.spec"), spec("A.spec"))
    assert etale.pointed_morphism_count(a, a, star) == len(pairs)
    pt = etale.point_groupoid()
    mor = etale.morphism_groupoid(pt, a, 0)
    assert (mor.num_objects, mor.num_arrows) == (a.num_objects, a.num_arrows)


def test_extensions_and_crossed_module():
    z2 = spec("Z2.spec")
    classes = etale.classify_extensions(z2, z2)
    assert len(classes) == 2
    assert sorted(c["order"] for c in classes) == [4, 4]
    cm = etale.crossed_module(spec("A.spec"))
    assert cm["violations"] == []
    assert cm["gamma_order"] == 2


def test_flat_geodesic():
    linear = np.eye(3)
    shift = np.array([3.0, 4.0, 0.0])
    seed = etale.seed_loop("flat", linear, shift, samples=64, seed=3, amplitude=0.2)
    assert seed.shape == (64, 3)
    start = etale.loop_measurements("flat", seed, linear, shift)
    result = etale.minimize_loop("flat", seed, linear, shift)
    assert result["converged"]
    assert result["length"] == pytest.approx(5.0, rel=1e-4)
    assert result["energy"] <= start["energy"]
    grad = etale.energy_gradient("flat", result["samples"], linear, shift)
    assert np.abs(grad).max() < 1e-5


def test_sphere_equator_length():
    n = 128
    t = 2 * math.pi * np.arange(n) / n
    samples = np.stack([np.cos(t), np.sin(t), np.zeros(n)], axis=1)
    m = etale.loop_measurements("sphere", samples, np.eye(3), np.zeros(3))
    assert m["length"] == pytest.approx(2 * math.pi, rel=1e-12)


def test_length_spectrum_and_cli():
    rows = etale.length_spectrum(spec("torus.spec"), ["a"], samples=64, seeds=1, seed=9)
    assert len(rows) == 1 and rows[0]["min_length"] == pytest.approx(1.0, rel=1e-6)
    code, out, err = etale.run_command(["orbits", spec("A.spec")])
    assert code == 0 and err == ""
    assert json.loads(out)["result"]["orbit_count"] == 2
    code, _, _ = etale.run_command(["frobnicate"])
    assert code == 2


def test_errors_are_python_exceptions(tmp_path):
    with pytest.raises(RuntimeError):
        etale.load_groupoid(spec("missing.spec"))
    bad = tmp_path / "bad.spec"
    bad.write_text("version: 1\nkind: teapot\n")
    with pytest.raises(ValueError, match="kind"):
        etale.load_groupoid(str(bad))
    with pytest.raises(RuntimeError):
        etale.seed_loop("hyperbolic", np.eye(3), np.zeros(3))
