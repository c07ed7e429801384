# %% [markdown]
# # Information per pulse for 2-, 4- and 8-letter alphabets
#
# Counts are turned into letters around the rounded mean. Finer alphabets
# extract more bits per measurement once the beam is bright enough to
# populate their letters.

# %%
import warnings

import numpy as np

from tmcc_qkd import AlphabetSpec, EmptyLetterWarning, TmccState, alphabet_entropy, encode_letter, max_info
from tmcc_qkd.photon_stats import mean_photon_number

warnings.simplefilter("ignore", EmptyLetterWarning)

spec = AlphabetSpec(8, 5)
print("8-letter alphabet centered at 5:")
for n in range(0, 11):
    print(f"  n={n:2d} -> letter {encode_letter(n, spec).bits}")

# %%
lams = np.linspace(0.0, 16.0, 33)
rows = []
for lam in lams:
    s = TmccState(lam)
    rows.append((mean_photon_number(s), *(alphabet_entropy(s, m) for m in (2, 4, 8)), max_info(s)))
rows = np.array(rows)
print(" mean     H2     H4     H8   Hmax")
for r in rows[::4]:
    print(" ".join(f"{v:6.3f}" for v in r))

# %% [markdown]
# Plot the curves if matplotlib is around. The same numbers come out of
# ``tmcc-qkd entropy-curve``.

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for col, label in zip(range(1, 5), ("2 letters", "4 letters", "8 letters", "every count")):
        ax.plot(rows[:, 0], rows[:, col], label=label)
    ax.set_xlabel("mean photon number")
    ax.set_ylabel("bits per measurement")
    ax.legend()
    fig.savefig("alphabet_capacity.png", dpi=120)
    print("wrote alphabet_capacity.png")
