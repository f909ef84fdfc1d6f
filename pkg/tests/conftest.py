import numpy as np
import pytest

from roughwave.kernels import ModelParams, derived_exponents, r_lambda
from roughwave.propagator import fit_data_to_budget, picard_solve
from roughwave.spectral import GridSpec, gaussian_cube_field
from roughwave.verify import _desk_config


@pytest.fixture(scope="session")
def desk_run():
    """One budgeted (sigma, delta, p) = (1, 0, 2) fixed-point run, shared."""
    from dataclasses import replace

    par = ModelParams(1.0, 0.0, 2, 1)
    grid = GridSpec(1, 4, 64)
    rng = np.random.default_rng(7)
    floor = r_lambda(derived_exponents(par), 1.0)
    u0 = gaussian_cube_field(grid, [(1,), (2,)], rng, octant_floor=floor)
    u1 = gaussian_cube_field(grid, [(1,), (2,)], rng, octant_floor=floor)
    cfg = _desk_config(par, 1.0, 0.25, 2048)
    u0s, u1s, C0, C1 = fit_data_to_budget(par, 1.0, u0, u1, cfg, fraction=0.5)
    cfg = replace(cfg, c0=C0, c1=C1)
    rec = picard_solve(par, 1.0, u0s, u1s, cfg)
    return par, cfg, rec
