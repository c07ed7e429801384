# %% [markdown]
# # Error rates under a state-cloning attack
#
# Eve counts the photons on Bob's mode and re-emits a state tuned to that
# count, either from her own TMCC source or from a laser. Bob's count
# fluctuates, so his letter may differ from Alice's.

# %%
from tmcc_qkd import Estimator, TmccState, analytic_qber, lambda_for_target, resend_pmf

lam = lambda_for_target(4)
print(f"operating point: lambda = {lam:.4f} (mean photon number 4)")
for n in (2, 4, 6):
    d = resend_pmf(n, "tmcc")
    print(f"  Eve saw {n}: Bob sees {n} with probability {d.probs[n]:.3f}")

# %% [markdown]
# The weighted estimator is the exact probability of a letter mismatch.
# Dividing by log2(m) spreads it over the bits of a letter; the Hamming
# column counts the bits that actually flip.

# %%
state = TmccState(lam)
print("source   m  letter  /log2m  hamming  | literal letter")
for source in ("tmcc", "poisson"):
    for m in (2, 4, 8):
        w = analytic_qber(state, m, source, Estimator.PROBABILITY_WEIGHTED)
        lit = analytic_qber(state, m, source, Estimator.PAPER_LITERAL)
        print(
            f"{source:8s} {m}  {w.p_err:.3f}   {w.p_err_per_bit:.3f}   {w.p_err_per_bit_hamming:.3f}"
            f"    | {lit.p_err:.3f}"
        )
