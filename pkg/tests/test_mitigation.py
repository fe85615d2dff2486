import numpy as np
import pytest

from rydgraph.mitigation import bias_counts, correct_counts, read_counts, write_counts


def test_bias_counts_single_axis_example():
    biased = bias_counts({"0": 500, "1": 500}, 0.08)
    assert biased["0"] == pytest.approx(540.0)
    assert biased["1"] == pytest.approx(460.0)


def test_bias_preserves_total_mass():
    counts = {"00": 120, "01": 40, "10": 15, "11": 325}
    biased = bias_counts(counts, 0.07)
    assert sum(biased.values()) == pytest.approx(sum(counts.values()))


def test_bias_matches_the_dense_tensor_channel():
    rng = np.random.default_rng(8)
    n = 3
    keys = [format(i, f"0{n}b") for i in range(2 ** n)]
    counts = {k: float(c) for k, c in zip(keys, rng.integers(1, 200, size=2 ** n))}
    eps = 0.11
    m1 = np.array([[1.0, eps], [0.0, 1.0 - eps]])
    dense = m1
    for _ in range(n - 1):
        dense = np.kron(dense, m1)
    vec = np.array([counts[k] for k in keys])
    expect = dense @ vec
    biased = bias_counts(counts, eps)
    got = np.array([biased.get(k, 0.0) for k in keys])
    assert np.allclose(got, expect, atol=1e-9)


def test_correct_counts_inverts_the_exact_channel():
    counts = {"00": 210.0, "01": 35.0, "10": 5.0, "11": 250.0}
    eps = 0.09
    corrected, moved = correct_counts(bias_counts(counts, eps), eps)
    for k, v in counts.items():
        assert corrected[k] == pytest.approx(v, abs=1e-9)
    assert moved == pytest.approx(0.0, abs=1e-9)


def test_correct_counts_eps_zero_is_identity():
    counts = {"01": 3, "10": 7}
    corrected, moved = correct_counts(counts, 0.0)
    assert corrected == {"01": 3.0, "10": 7.0}
    assert moved == 0.0


def test_correct_counts_clips_negative_mass():
    # a lone bright count at strong damping drives the inverse negative
    corrected, moved = correct_counts({"1": 1.0, "0": 0.0}, 0.5)
    assert corrected["1"] == pytest.approx(1.0)
    assert corrected.get("0", 0.0) == pytest.approx(0.0)
    assert moved > 0.0
    assert sum(corrected.values()) == pytest.approx(1.0)


def test_counts_validation():
    with pytest.raises(ValueError):
        bias_counts({"0x": 1}, 0.1)
    with pytest.raises(ValueError):
        bias_counts({"0": 1, "00": 2}, 0.1)
    with pytest.raises(ValueError):
        bias_counts({"0": -1}, 0.1)
    with pytest.raises(ValueError):
        bias_counts({}, 0.1)
    with pytest.raises(ValueError):
        correct_counts({"0": 1}, 1.0)
    with pytest.raises(ValueError):
        correct_counts({"0": 1}, -0.2)


def test_counts_file_roundtrip(tmp_path):
    counts = {"00": 213, "01": 1, "11": 286}
    path = tmp_path / "counts.tsv"
    write_counts(counts, path, header="# demo")
    back = read_counts(path)
    assert back == {"00": 213.0, "01": 1.0, "11": 286.0}
    fractional = {"0": 54.25, "1": 45.75}
    write_counts(fractional, path)
    back = read_counts(path)
    assert back["0"] == pytest.approx(54.25)
