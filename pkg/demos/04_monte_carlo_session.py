# %% [markdown]
# # Monte Carlo key-distribution sessions
#
# Every slot draws Alice's count from the TMCC distribution. Without an
# attack Bob sees the same count; under a clone attack his count is
# redrawn from Eve's resend source. Each slot's randomness depends only on
# (seed, slot), so splitting a session over workers changes nothing.

# %%
import math

from tmcc_qkd import SessionConfig, TmccState, analytic_qber, run_session

clean = run_session(SessionConfig(4.5, alphabet_size=8, slots=200_000, seed=1))
print(f"no attack: letter error rate {clean.letter_error_rate}, empirical Q {clean.empirical_mandel_q:.3f}")

# %%
cfg = SessionConfig(4.5, alphabet_size=8, slots=1_000_000, seed=42, attack="tmcc")
mc = run_session(cfg, workers=4)
exact = analytic_qber(TmccState(4.5), 8, "tmcc").p_err
se = math.sqrt(exact * (1 - exact) / cfg.slots)
print(f"clone attack: MC {mc.letter_error_rate:.5f} vs analytic {exact:.5f} ({(mc.letter_error_rate - exact) / se:+.2f} SE)")
print("same result single-threaded:", mc == run_session(cfg))
