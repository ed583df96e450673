# The constants behind the lower bound, and the barrier that produces them.
#
# V = (h0^a - C t)^(1/a) (1 - r^2)^2 is a subsolution of the fast diffusion
# inequality d/dt V^(1+a) <= b Laplacian(V) on the unit ball once lambda is
# at least the sharp profile constant.

# %%
import math

import numpy as np

from yflow import Dimension, RadialGrid
from yflow.bounds import (
    SubsolutionParams,
    default_cutoff_constant,
    fast_diffusion_solve,
    lemma3_check,
    lemma3_lambda,
    lemma5_constant,
    subsolution_inequality_check,
)

# %%
# a = 1, c = 2: the sharp constant is 16875/512, just under 33
lam = lemma3_lambda(1.0, 2.0)
print("lambda(1, 2) =", lam, "=", 16875 / 512)
for trial in (30.0, lam, 33.0):
    print(f"  worst residual at lambda = {trial:.6g}: {lemma3_check(1.0, 2.0, trial):+.3e}")

# %%
print(f"{'m':>3} {'lambda':>12} {'C_m':>12} {'c_m':>8}")
for m in (3, 4, 5, 6, 10):
    d = Dimension(m)
    lam_m = lemma3_lambda(1 / d.eta, (m - 1) / math.tanh(1.0))
    print(f"{m:3d} {lam_m:12.5g} {lemma5_constant(m):12.5g} {default_cutoff_constant(m):8.4g}")

# %%
# the barrier inequality on a fine grid, then a fast diffusion run from V(0)
for m in (3, 4, 5):
    p = SubsolutionParams.for_dimension(m, 1.0)
    ineq = subsolution_inequality_check(
        p, RadialGrid.with_spacing(1.0, 1e-3), np.linspace(0, p.t0, 50, endpoint=False), m
    )
    fd = fast_diffusion_solve(p, RadialGrid.with_spacing(1.0, 0.01), p.t0 / 20, m)
    print(f"m={m}: t0 = {p.t0:.3e}, inequality {ineq:+.3e}, "
          f"min(W - V) = {fd.barrier_margin():.1e}, extinction / t0 = {fd.extinction_time / p.t0:.3g}")
