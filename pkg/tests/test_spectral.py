import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughwave.errors import AliasingError, CubeRangeError
from roughwave.spectral import (
    GridSpec,
    SpectralField,
    cube_slices,
    decompose,
    from_physical,
    gaussian_cube_field,
    load_field_binary,
    load_field_csv,
    octant_mask,
    outer_shell_fraction,
    per_cube_l2,
    pointwise_power,
    pointwise_product,
    save_field_binary,
    save_field_csv,
    support_cubes,
    to_physical,
    zero_field,
)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return SpectralField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def all_cubes(grid):
    lo, hi = grid.cube_range()
    return itertools.product(range(lo, hi), repeat=grid.n)


class TestGridSpec:
    def test_power_of_two_required(self):
        with pytest.raises(ValueError):
            GridSpec(1, 3, 5)

    def test_dimension_range(self):
        with pytest.raises(ValueError):
            GridSpec(4, 4, 16)

    @pytest.mark.parametrize("n,M,K", [(1, 4, 16), (2, 4, 8), (3, 2, 4)])
    def test_shapes(self, n, M, K):
        g = GridSpec(n, M, K)
        assert g.points_per_axis == M * K
        assert g.shape == (M * K,) * n
        # each cube holds exactly M^n lattice points
        sl = cube_slices(g, (0,) * n)
        count = np.prod([s.stop - s.start for s in sl])
        assert count == M**n


class TestTransforms:
    def test_parseval(self):
        g = GridSpec(1, 4, 16)
        f = random_field(g, 1)
        u = to_physical(f)
        w = (g.M / g.points_per_axis) ** g.n
        phys = np.sqrt(w * (np.abs(u) ** 2).sum())
        assert abs(phys - f.l2()) <= 1e-12 * f.l2()

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_round_trip(self, seed):
        g = GridSpec(1, 4, 8)
        f = random_field(g, seed)
        back = from_physical(g, to_physical(f))
        assert np.linalg.norm(back.coeffs - f.coeffs) <= 1e-13 * np.linalg.norm(f.coeffs)

    def test_parseval_2d(self):
        g = GridSpec(2, 2, 8)
        f = random_field(g, 2)
        u = to_physical(f)
        w = (g.M / g.points_per_axis) ** g.n
        phys = np.sqrt(w * (np.abs(u) ** 2).sum())
        assert abs(phys - f.l2()) <= 1e-12 * f.l2()


class TestDecompose:
    def test_single_mode_membership(self):
        # mode at xi = 0.5 lies in cube 0, not cube 1
        g = GridSpec(1, 2, 8)
        c = np.zeros(g.shape, complex)
        c[g.points_per_axis // 2 + 1] = 1.0
        f = SpectralField(g, c)
        assert np.array_equal(decompose(f, (0,)).coeffs, f.coeffs)
        assert decompose(f, (1,)).is_zero()

    def test_partition_of_lattice(self):
        g = GridSpec(1, 4, 16)
        f = random_field(g, 3)
        total = np.zeros(g.shape, complex)
        for k in all_cubes(g):
            total += decompose(f, k).coeffs
        assert np.array_equal(total, f.coeffs)

    def test_l2_pythagoras(self):
        # frozen oracle: direct summation over cubes
        g = GridSpec(1, 4, 16)
        f = random_field(g, 4)
        total_sq = sum(decompose(f, k).l2() ** 2 for k in all_cubes(g))
        assert abs(total_sq - f.l2() ** 2) <= 1e-12 * f.l2() ** 2

    def test_out_of_range(self):
        g = GridSpec(1, 4, 16)
        with pytest.raises(CubeRangeError):
            decompose(random_field(g), (8,))

    def test_per_cube_l2_matches(self):
        g = GridSpec(2, 4, 8)
        f = random_field(g, 5)
        mass = per_cube_l2(f)
        lo, _ = g.cube_range()
        for k in [(0, 0), (-2, 1), (3, -4)]:
            pos = tuple(kj - lo for kj in k)
            assert np.isclose(mass[pos], decompose(f, k).l2(), rtol=1e-13)


class TestOctantMask:
    def test_zero_floor_octant_field_unchanged(self):
        g = GridSpec(1, 4, 16)
        f = octant_mask(random_field(g, 6), 0.0)
        again = octant_mask(f, 0.0)
        assert np.array_equal(f.coeffs, again.coeffs)

    def test_threshold(self):
        # modes at xi in {-1, 0.25, 2}: only xi = 2 survives R = 3^{-1/2}
        g = GridSpec(1, 8, 8)
        c = np.zeros(g.shape, complex)
        N = g.points_per_axis
        for xi in (-1.0, 0.25, 2.0):
            c[int(xi * g.M) + N // 2] = 1.0
        f = SpectralField(g, c)
        masked = octant_mask(f, 3.0**-0.5)
        nz = np.flatnonzero(masked.coeffs) - N // 2
        assert list(nz / g.M) == [2.0]

    def test_octant_violation_zeroed(self):
        g = GridSpec(2, 4, 8)
        c = np.zeros(g.shape, complex)
        N = g.points_per_axis
        c[4 + N // 2, -1 + N // 2] = 1.0  # xi = (1, -0.25)
        f = SpectralField(g, c)
        assert octant_mask(f, 0.0).is_zero()


class TestPointwisePower:
    def test_single_mode_square(self):
        # frozen oracle: convolution of point masses with lattice measure
        g = GridSpec(1, 2, 8)
        c = np.zeros(g.shape, complex)
        c[g.points_per_axis // 2 + 1] = 2.0  # a = 2 at xi = 0.5
        sq = pointwise_power(SpectralField(g, c), 2)
        nz = np.flatnonzero(np.abs(sq.coeffs) > 1e-12)
        assert list(nz) == [g.points_per_axis // 2 + 2]
        assert np.isclose(sq.coeffs[nz[0]], 2.0**2 / g.M, rtol=1e-13)

    def test_zero(self):
        g = GridSpec(1, 4, 8)
        assert pointwise_power(zero_field(g), 3).is_zero()

    def test_convolution_oracle(self):
        # brute-force discrete convolution on a tiny grid
        g = GridSpec(1, 2, 8)
        f = random_field(g, 7)
        gg = random_field(g, 8)
        prod = pointwise_product([f, gg])
        N = g.points_per_axis
        expect = np.zeros(N, complex)
        for i in range(N):
            for j in range(N):
                k = i + j - N // 2  # centered index arithmetic
                if 0 <= k < N:
                    expect[k] += f.coeffs[i] * gg.coeffs[j] / g.M
        assert np.allclose(prod.coeffs, expect, atol=1e-12 * np.abs(expect).max())

    def test_octant_sumset_min_frequency(self):
        # 1d: squares of fields above R live above 2R
        g = GridSpec(1, 4, 16)
        f = octant_mask(random_field(g, 9), 1.0)
        sq = pointwise_power(f, 2)
        nz = np.flatnonzero(np.abs(sq.coeffs) > 1e-12 * np.abs(sq.coeffs).max())
        xi = (nz - g.points_per_axis // 2) / g.M
        assert xi.min() >= 2.0

    def test_insufficient_padding_rejected(self):
        g = GridSpec(1, 4, 8)
        with pytest.raises(AliasingError):
            pointwise_power(random_field(g), 3, pad_factor=1.5)


class TestSupportCubes:
    def test_single_cube(self):
        g = GridSpec(1, 4, 16)
        f = gaussian_cube_field(g, [(2,)], np.random.default_rng(0))
        assert support_cubes(f, 0.0) == {(2,)}

    def test_zero_field(self):
        g = GridSpec(1, 4, 16)
        assert support_cubes(zero_field(g), 0.0) == set()

    def test_product_window(self):
        g = GridSpec(1, 4, 16)
        rng = np.random.default_rng(1)
        f1 = gaussian_cube_field(g, [(1,)], rng)
        f2 = gaussian_cube_field(g, [(2,)], rng)
        prod = pointwise_product([f1, f2])
        cubes = support_cubes(prod, 1e-12)
        assert cubes
        assert all(abs(k[0] - 3) <= 3 for k in cubes)


class TestOctantClosure:
    @pytest.mark.parametrize("n", [1, 2])
    def test_product_support_stays_in_octant(self, n):
        g = GridSpec(n, 4, 8)
        rng = np.random.default_rng(20 + n)
        f = octant_mask(random_field(g, 21 + n), 0.0)
        h = octant_mask(random_field(g, 22 + n), 0.0)
        prod = pointwise_product([f, h])
        for k in support_cubes(prod, 1e-12):
            assert all(kj >= 0 for kj in k)


class TestOrthogonality:
    @pytest.mark.parametrize("n,p", [(1, 2), (1, 3), (2, 2), (2, 3)])
    def test_window(self, n, p):
        g = GridSpec(n, 4, 8)
        rng = np.random.default_rng(10 * n + p)
        ks = [tuple(rng.integers(0, 2, size=n)) for _ in range(p)]
        fields = [gaussian_cube_field(g, [k], rng) for k in ks]
        prod = pointwise_product(fields)
        scale = np.prod([f.l2() for f in fields])
        ksum = np.array(ks).sum(axis=0)
        from roughwave.spectral import cube_index_vectors

        kvec = cube_index_vectors(g)
        dist = np.abs(kvec - ksum.reshape((n,) + (1,) * n)).max(axis=0)
        mass = per_cube_l2(prod)
        assert mass[dist > p + 1].max(initial=0.0) <= 1e-12 * scale
        assert mass[dist <= p + 1].max() > 1e-12 * scale


class TestShellAndSerialization:
    def test_outer_shell_fraction(self):
        g = GridSpec(1, 4, 16)
        c = np.zeros(g.shape, complex)
        c[g.points_per_axis - 1] = 1.0  # top lattice index
        assert outer_shell_fraction(SpectralField(g, c)) == 1.0
        assert outer_shell_fraction(zero_field(g)) == 0.0

    @pytest.mark.parametrize("save,load,ext", [
        (save_field_binary, load_field_binary, "rwf"),
        (save_field_csv, load_field_csv, "csv"),
    ])
    def test_round_trip(self, tmp_path, save, load, ext):
        g = GridSpec(2, 2, 8)
        f = octant_mask(random_field(g, 11), 0.5)
        path = tmp_path / f"field.{ext}"
        save(path, f)
        back = load(path)
        assert back.grid == g
        assert np.array_equal(back.coeffs, f.coeffs)


class TestImmutability:
    def test_coeffs_not_writeable(self):
        f = random_field(GridSpec(1, 4, 8))
        with pytest.raises(ValueError):
            f.coeffs[0] = 1.0
