# Flow of the flat metric, seen from hyperbolic space.
#
# In geodesic polar coordinates the Euclidean ball metric is u g_H with
# u = cosh(r/2)^-4 / 4, which decays to zero at infinity: incomplete as a
# metric on H^3.  Run the Dirichlet problem on B_6 and watch u - 6t.

# %%
import numpy as np

from yflow import DirichletProblem, RadialGrid, euclidean_factor, scalar_curvature, solve_dirichlet
from yflow.bounds import completeness_check, default_cutoff_constant, lemma1_check, lemma5_check, lemma7_check

grid = RadialGrid.with_spacing(6.0, 0.02)
u0 = euclidean_factor(grid)
problem = DirichletProblem.from_raw(u0, 6.0, 3, 1.0)
print("c_k (boundary constant):", problem.c_k)

# %%
# curvature of the initial metric is zero up to O(h^2); further out the
# factor U^-5 amplifies the truncation error, so look at B_3 only
R0 = scalar_curvature(problem.u0k, 3).values
print("max |R| at t = 0 on B_3:", np.abs(R0[: grid.index_of(3.0) + 1]).max())

# %%
traj = solve_dirichlet(problem, 1e-3, output_times=[0.0, 0.1, 0.25, 0.5, 1.0])
print(f"{'t':>6} {'u(0)':>10} {'min u - 6t':>12}")
for t, state in zip(traj.times, traj.states):
    print(f"{t:6.2f} {state.u.values[0]:10.5f} {np.min(state.u.values - 6 * t):12.3e}")

# %%
# the sandwich, both one-sided bounds and the completeness inequality
lo, hi = lemma1_check(traj)
print("sandwich violations:", lo, hi)
print("lower bound violation:", lemma5_check(traj, 4.0))
c_m = default_cutoff_constant(3)
print("c_m =", c_m, " upper bound violation:", lemma7_check(traj, 4.0, c_m))
print("max (6t - u):", completeness_check(traj))

# %%
# by t = 1 the metric is nearly a multiple of g_H near the origin, so R ~ -6/u
u1 = traj.final().u.values
R1 = scalar_curvature(traj.final().u, 3).values
print("R at t = 1 near the origin:", R1[:3], " -6/u:", -6 / u1[:3])
