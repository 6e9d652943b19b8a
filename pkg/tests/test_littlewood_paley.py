from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mode, smooth_real
from halfmaps.errors import InvalidInputError
from halfmaps.littlewood_paley import (
    DyadicFamily,
    decompose,
    paraproduct,
    paraproduct_terms,
    phi,
    project,
    project_low,
)
from halfmaps.norms import random_band_limited
from halfmaps.spectral import Field, PeriodicGrid, dealiased_product


class TestCutoff:
    def test_values(self):
        x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, -1.5, 3.0])
        assert np.allclose(phi(x), [1, 1, 1, 0.5, 0, 0.5, 0])

    def test_monotone_on_taper(self):
        x = np.linspace(1, 2, 101)
        assert np.all(np.diff(phi(x)) <= 0)


class TestFamily:
    def test_default_range(self):
        fam = DyadicFamily(PeriodicGrid(256))
        assert list(fam.indices) == list(range(0, 8))

    def test_rejects_short_range(self):
        with pytest.raises(InvalidInputError):
            DyadicFamily(PeriodicGrid(256), j_max=5)
        with pytest.raises(InvalidInputError):
            DyadicFamily(PeriodicGrid(256), j_min=8)
        with pytest.raises(InvalidInputError):
            DyadicFamily(PeriodicGrid(256), offset=0)

    def test_partition_of_unity(self):
        fam = DyadicFamily(PeriodicGrid(512))
        total = sum(fam.band_symbol(j) for j in fam.indices)
        assert np.allclose(total, 1.0, atol=1e-15)

    def test_band_support(self):
        fam = DyadicFamily(PeriodicGrid(512))
        n = np.abs(fam.grid.freqs)
        for j in fam.indices:
            lo, hi = fam.band_support(j)
            active = fam.band_symbol(j) > 0
            assert n[active].min() >= lo and n[active].max() <= hi

    def test_low_symbol_below_range(self):
        fam = DyadicFamily(PeriodicGrid(64), j_min=2)
        assert np.all(fam.low_symbol(1) == 0)

    def test_bad_index(self):
        fam = DyadicFamily(PeriodicGrid(64))
        with pytest.raises(InvalidInputError):
            fam.band_symbol(99)


class TestProjections:
    def test_decompose_sums_to_field(self, grid256, rng):
        f = smooth_real(grid256, rng, n_max=100)
        fam = DyadicFamily(grid256)
        total = sum(b.values for b in decompose(f, fam).values())
        assert np.allclose(total, f.values, atol=1e-12)

    def test_mode_lands_in_expected_blocks(self, grid256):
        fam = DyadicFamily(grid256)
        # n = 12: phi(12/8) = 1/2 and phi(12/16) = 1, so blocks 3 and 4 each hold half.
        blocks = decompose(mode(grid256, 12), fam)
        amps = {j: float(np.max(np.abs(b.values))) for j, b in blocks.items()}
        assert amps[3] == pytest.approx(0.5) and amps[4] == pytest.approx(0.5)
        assert sum(a for j, a in amps.items() if j not in (3, 4)) < 1e-13

    def test_project_low_matches_partial_sum(self, grid256, rng):
        f = smooth_real(grid256, rng, n_max=60)
        fam = DyadicFamily(grid256)
        partial = sum(project(f, fam, j).values for j in range(0, 5))
        assert np.allclose(project_low(f, fam, 4).values, partial, atol=1e-12)

    def test_grid_mismatch(self, grid64, grid256):
        with pytest.raises(InvalidInputError):
            project(Field.constant(grid64, 1.0), DyadicFamily(grid256), 0)


class TestParaproducts:
    def test_reconstruction(self, rng):
        g = PeriodicGrid(512)
        fam = DyadicFamily(g)
        f, h = smooth_real(g, rng, n_max=200), smooth_real(g, rng, n_max=200)
        total = sum(paraproduct(f, h, fam, k).values for k in (1, 2, 3))
        assert np.allclose(total, dealiased_product(f, h).values, atol=1e-10)

    def test_role_swap(self, rng):
        g = PeriodicGrid(256)
        fam = DyadicFamily(g)
        f, h = smooth_real(g, rng, n_max=100), smooth_real(g, rng, n_max=100)
        assert np.allclose(paraproduct(f, h, fam, 1).values, paraproduct(h, f, fam, 2).values, atol=1e-13)

    def test_high_low_frequency_localization(self, rng):
        g = PeriodicGrid(512)
        fam = DyadicFamily(g)
        f, h = smooth_real(g, rng, n_max=250), smooth_real(g, rng, n_max=250)
        n = np.abs(g.freqs)
        for j, term in paraproduct_terms(f, h, fam, 1).items():
            lo, hi = fam.band_support(j)
            spread = 2.0 ** (j - fam.offset + 1)
            spec = np.abs(term.spectrum[0])
            outside = (n < lo - spread) | (n > hi + spread)
            assert np.max(spec[outside], initial=0.0) < 1e-13

    def test_low_frequency_pair_has_no_high_low_part(self, grid256):
        fam = DyadicFamily(grid256)
        f = g = Field(grid256, np.cos(grid256.nodes))
        assert np.allclose(paraproduct(f, g, fam, 1).values, 0.0)
        assert np.allclose(paraproduct(f, g, fam, 3).values, np.cos(grid256.nodes) ** 2)

    def test_vector_by_scalar(self, rng):
        g = PeriodicGrid(128)
        fam = DyadicFamily(g)
        f, h = smooth_real(g, rng, m=1), smooth_real(g, rng, m=3)
        total = sum(paraproduct(f, h, fam, k).values for k in (1, 2, 3))
        assert total.shape == (3, 128)
        assert np.allclose(total, f.values * h.values, atol=1e-11)

    def test_bad_which(self, grid64):
        f = Field.constant(grid64, 1.0)
        with pytest.raises(InvalidInputError):
            paraproduct(f, f, DyadicFamily(grid64), 4)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 127), st.integers(1, 6))
    def test_reconstruction_property(self, seed, n_peak, offset):
        g = PeriodicGrid(256)
        fam = DyadicFamily(g, offset=offset)
        r = np.random.default_rng(seed)
        f, h = random_band_limited(g, n_peak, r), random_band_limited(g, n_peak, r)
        total = sum(paraproduct(f, h, fam, k).values for k in (1, 2, 3))
        scale = np.max(np.abs(f.values)) * np.max(np.abs(h.values))
        assert np.max(np.abs(total - dealiased_product(f, h).values)) <= 1e-12 * scale
