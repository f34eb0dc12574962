import numpy as np
import pytest

from scatterlab.fileio import (
    FormatError,
    read_bank,
    read_matrix,
    read_signal,
    read_spectrum,
    write_bank,
    write_matrix,
    write_signal,
    write_spectrum,
)
from scatterlab.filter_frames import build_random_smooth_bank
from scatterlab.lca_group import FrequencySet, GroupSpec, Signal, fourier


def test_signal_round_trip(tmp_path, rng):
    g = GroupSpec((4, 6))
    f = Signal(g, (rng.standard_normal(24) + 1j * rng.standard_normal(24)) * 1e3)
    write_signal(tmp_path / "f.txt", f)
    text = (tmp_path / "f.txt").read_text()
    assert text.splitlines()[0] == "group: 4 x 6"
    assert len(text.splitlines()) == 25
    back = read_signal(tmp_path / "f.txt")
    assert back.group == g
    assert np.max(np.abs(back.values - f.values)) <= 1e-15 * np.max(np.abs(f.values))


def test_spectrum_round_trip(tmp_path, rng):
    g = GroupSpec((12,))
    F = fourier(Signal.random(g, rng))
    write_spectrum(tmp_path / "F.txt", F)
    assert np.array_equal(read_spectrum(tmp_path / "F.txt").coeffs, F.coeffs)


def test_bank_round_trip(tmp_path):
    g = GroupSpec((16,))
    bank = build_random_smooth_bank(g, 3, FrequencySet.of(g, [0, 1, -1]), seed=7, support_threshold=1e-10)
    write_bank(tmp_path / "bank.txt", bank)
    lines = (tmp_path / "bank.txt").read_text().splitlines()
    assert lines[:4] == ["group: 16", "support_threshold: 1e-10", "filters: 4", "filter chi"]
    back = read_bank(tmp_path / "bank.txt")
    assert np.array_equal(back.chi_hat, bank.chi_hat)
    assert np.array_equal(back.psi_hats, bank.psi_hats)
    assert back.support_threshold == 1e-10 and back.names == bank.names


def test_matrix_round_trip(tmp_path, rng):
    M = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    write_matrix(tmp_path / "m.txt", M)
    assert (tmp_path / "m.txt").read_text().startswith("matrix 3 5\n")
    assert np.array_equal(read_matrix(tmp_path / "m.txt"), M)


def test_matrix_accepts_row_lines(tmp_path):
    (tmp_path / "m.txt").write_text("matrix 2 2\n1 0 0 0\n0 0 1 0\n")
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.txt"), np.eye(2))


@pytest.mark.parametrize("text", [
    "grp: 4\n1 0\n1 0\n1 0\n1 0\n",
    "group: 4\n1 0\n1 0\n1 0\n",
    "group: 4\n1 0\n1 0\n1 0\n1 x\n",
    "group: 2\n1 0 0\n1 0\n",
])
def test_malformed_signal_files(tmp_path, text):
    (tmp_path / "bad.txt").write_text(text)
    with pytest.raises(FormatError):
        read_signal(tmp_path / "bad.txt")


def test_bank_without_chi_first(tmp_path):
    (tmp_path / "b.txt").write_text("group: 2\nfilters: 1\nfilter psi0\n1 0\n0 0\n")
    with pytest.raises(FormatError, match="chi"):
        read_bank(tmp_path / "b.txt")
