# %% [markdown]
# # Photon statistics of a TMCC beam
#
# Both modes of a two-mode coherently correlated beam carry the same photon
# count. Here we look at the single-mode count distribution: its mean,
# its variance, and how it compares with a laser (Poisson) beam of the
# same intensity.

# %%
import numpy as np

from tmcc_qkd import TmccState, build_distribution, mandel_q, max_info, mean_photon_number, poisson_pmf

state = TmccState(4.5)
dist = build_distribution(state)
print(f"lambda = {state.lam}, cutoff n_max = {state.n_max}, tail mass = {dist.tail_mass:.2e}")
print(f"mean = {mean_photon_number(state):.4f}, Mandel Q = {mandel_q(state):.4f}")

# %% [markdown]
# Side by side with a Poisson distribution of the same mean. The TMCC
# distribution is visibly narrower (sub-Poisson).

# %%
mean = dist.mean()
print(" n   TMCC     Poisson")
for n in range(11):
    print(f"{n:2d}  {dist.probs[n]:.4f}   {poisson_pmf(mean, n):.4f}")

# %% [markdown]
# Q stays negative at every intensity, even very weak beams.

# %%
for lam in (0.05, 0.2, 1.0, 3.0, 10.0):
    s = TmccState(lam)
    print(f"lambda {lam:5.2f}: mean {mean_photon_number(s):7.4f}  Q {mandel_q(s):+.4f}  max info {max_info(s):.3f} bits")
