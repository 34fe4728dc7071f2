import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trihybrid.em import StaticArray
from trihybrid.geometry import (
    ArrayGeometry,
    GainProfile,
    PathSet,
    assemble_effective_channel,
    draw_paths,
    propagation_matrix,
    steering_vector,
    unit_vector,
)

angles = st.floats(-np.pi, np.pi, allow_nan=False)
elevations = st.floats(-np.pi / 2, np.pi / 2, allow_nan=False)


def test_unit_vector_convention():
    assert np.allclose(unit_vector(0.0), [0, 1, 0])
    assert np.allclose(unit_vector(np.pi / 2), [1, 0, 0])
    assert np.allclose(unit_vector(0.0, np.pi / 2), [0, 0, 1])


def test_ula_positions_are_exact_multiples():
    g = ArrayGeometry.ula(5, 0.2)
    assert np.array_equal(g.positions[:, 0], np.arange(5) * 0.2)
    assert not g.positions[:, 1:].any()


@pytest.mark.parametrize("pos, spacing, msg", [
    ([[0, 0, 0], [0, 0, 0]], 0.5, "distinct"),
    ([[0, 0, 0], [0.5, 0, 0]], 0.0, "spacing"),
    ([[0, 0, 0], [0.4, 0, 0]], 0.5, "ULA"),
])
def test_geometry_invariants_rejected(pos, spacing, msg):
    with pytest.raises(ValueError, match=msg):
        ArrayGeometry(np.array(pos, float), spacing, "ula")


def test_upa_lies_in_xz_plane():
    g = ArrayGeometry.upa(3, 2, 0.5)
    assert g.n_elements == 6
    assert not g.positions[:, 1].any()


def test_single_element_response_is_one():
    g = ArrayGeometry.ula(1)
    assert steering_vector(g, (0.7, -0.3)) == pytest.approx(np.array([1.0]))


def test_two_element_broadside_and_endfire():
    g = ArrayGeometry.ula(2, 0.5)
    assert np.allclose(steering_vector(g, 0.0), [1, 1])
    # endfire: path difference of half a wavelength, phase exp(j pi)
    assert np.allclose(steering_vector(g, (np.pi / 2, 0.0)), [1, -1])


@given(az=angles, el=elevations, n=st.integers(1, 6), nz=st.integers(1, 3))
def test_steering_entries_unit_modulus(az, el, n, nz):
    for g in (ArrayGeometry.ula(n, 0.37), ArrayGeometry.upa(n, nz, 0.21)):
        assert np.allclose(np.abs(steering_vector(g, (az, el))), 1.0, atol=1e-12)


def test_draw_paths_deterministic():
    a, b = draw_paths(7, 1), draw_paths(7, 1)
    assert a == b
    assert np.array_equal(a.gains, b.gains)


def test_draw_paths_seed_sensitive():
    assert not np.array_equal(draw_paths(1, 4).gains, draw_paths(2, 4).gains)


def test_draw_paths_rejects_empty():
    with pytest.raises(ValueError):
        draw_paths(0, 0)


def test_draw_paths_power_normalization():
    p = draw_paths(3, 1000)
    assert abs(np.sum(np.abs(p.gains) ** 2) - 1) < 0.1


@given(seed=st.integers(0, 2**32), n=st.integers(1, 20))
def test_draw_paths_angles_in_range(seed, n):
    prof = GainProfile(aod_el=(-0.3, 0.4))
    p = draw_paths(seed, n, prof)
    assert np.all(np.abs(p.aod_az) <= np.pi / 2)
    assert np.all((p.aod_el >= -0.3) & (p.aod_el <= 0.4))


def test_pathset_rejects_out_of_range_direction():
    with pytest.raises(ValueError):
        PathSet([1.0], [4.0], [0.0], [0.0], [0.0])


def test_pathset_json_roundtrip(tmp_path):
    p = draw_paths(11, 5)
    f = tmp_path / "paths.json"
    p.save_json(f)
    q = PathSet.load_json(f)
    assert q == p
    assert set(json.loads(f.read_text())[0]) == {"gain_re", "gain_im", "aod_az", "aod_el", "aoa_az", "aoa_el"}


def test_pathset_records_reject_unknown_keys():
    rec = draw_paths(0, 1).to_records()
    rec[0]["delay"] = 1.0
    with pytest.raises(ValueError, match="delay"):
        PathSet.from_records(rec)


def test_single_path_static_single_feed():
    rx = ArrayGeometry.ula(3)
    p = PathSet([1.0], [0.4], [0.0], [-0.2], [0.0])
    h = assemble_effective_channel(p, rx, lambda a, e: np.ones(1))
    assert np.allclose(h.matrix[:, 0], steering_vector(rx, -0.2))


def test_zero_gains_give_zero_channel():
    rx, tx = ArrayGeometry.ula(2), ArrayGeometry.ula(3)
    p = draw_paths(1, 3).scaled(0)
    h = assemble_effective_channel(p, rx, StaticArray(tx).response)
    assert not h.matrix.any()


def test_two_path_channel_matches_straight_sum():
    rx, tx = ArrayGeometry.ula(2, 0.5), ArrayGeometry.ula(2, 0.5)
    p = PathSet([0.3 + 0.1j, -0.5j], [0.2, -0.9], [0.0, 0.0], [0.5, 1.1], [0.0, 0.0])
    h = assemble_effective_channel(p, rx, StaticArray(tx).response).matrix
    ref = np.zeros((2, 2), complex)
    for g, aod, aoa in zip(p.gains, p.aod_az, p.aoa_az):
        for r in range(2):
            for t in range(2):
                ref[r, t] += g * np.exp(2j * np.pi * 0.5 * r * np.sin(aoa)) * np.exp(
                    2j * np.pi * 0.5 * t * np.sin(aod))
    assert np.allclose(h, ref, atol=1e-14)


def test_inconsistent_response_lengths_rejected():
    p = draw_paths(0, 2)
    sizes = iter([2, 3])
    with pytest.raises(ValueError, match="varies"):
        assemble_effective_channel(p, ArrayGeometry.ula(2), lambda a, e: np.ones(next(sizes)))


@given(seed=st.integers(0, 1000), re=st.floats(-3, 3), im=st.floats(-3, 3))
def test_channel_linear_in_gains(seed, re, im):
    c = complex(re, im)
    rx, tx = ArrayGeometry.ula(2), ArrayGeometry.ula(3, 0.2)
    p = draw_paths(seed, 3)
    h1 = assemble_effective_channel(p, rx, StaticArray(tx).response).matrix
    h2 = assemble_effective_channel(p.scaled(c), rx, StaticArray(tx).response).matrix
    assert np.allclose(h2, c * h1, rtol=1e-12, atol=1e-14)


def test_channel_regeneration_bit_identical():
    rx, tx = ArrayGeometry.ula(2), ArrayGeometry.ula(4, 0.2)
    p = draw_paths(5, 6)
    layer = StaticArray(tx)
    a = assemble_effective_channel(p, rx, layer.response, layer.digest())
    b = assemble_effective_channel(p, rx, layer.response, layer.digest())
    assert np.array_equal(a.matrix, b.matrix)
    assert (a.paths_id, a.em_id) == (b.paths_id, b.em_id)


def test_non_finite_channel_rejected():
    from trihybrid.geometry import EffectiveChannel
    with pytest.raises(ValueError):
        EffectiveChannel(np.array([[np.nan]]), "x")


def test_propagation_matrix_matches_static_assembly():
    rx, tx = ArrayGeometry.ula(3), ArrayGeometry.ula(5, 0.2)
    p = draw_paths(9, 4)
    h = assemble_effective_channel(p, rx, StaticArray(tx).response).matrix
    assert np.allclose(propagation_matrix(p, rx, tx), h)
