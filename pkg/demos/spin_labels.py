"""Distance between two driven nitroxide spin labels.

Both labels are driven at 20 MHz; the probe scan shows two pronounced
dips split by Delta_1 = (3g/4)|1 - 3 cos^2 theta| and, because the two
labels couple to the NV with different strengths, two weaker singlet
dips split by Delta_2 = Delta_1 / 3.  The main splitting measures the
label-label distance well beyond the conventional 5 nm range.
"""

import matplotlib.pyplot as plt

from nvmr.inversion import distance_from_g, find_dips
from nvmr.constants import GAMMA_E
from nvmr.protocols import SpinLabelConfig, label_resonances

fig, axes = plt.subplots(1, 2, figsize=(11, 3.8))
for ax, separation, t_us in [(axes[0], 5.0, 20.0), (axes[1], 8.0, 40.0)]:
    cfg = SpinLabelConfig(separation_nm=separation, readout_us=t_us)
    scan = label_resonances(cfg)
    dips = find_dips(scan, depth_threshold=0.02)
    main = sorted(sorted(dips, key=lambda d: -d.depth)[:2], key=lambda d: d.center)
    delta1 = main[1].center - main[0].center
    g_est = 4.0 * delta1 / (3.0 * abs(1 - 3 * cfg.cos_theta**2))
    d_est = distance_from_g(g_est, GAMMA_E, GAMMA_E)
    print(f"separation {separation} nm: Delta_1 = {delta1:.1f} kHz "
          f"-> g = {g_est:.1f} kHz -> d = {d_est:.3f} nm "
          f"({len(dips)} dips, satellites from inhomogeneous couplings)")
    ax.plot(scan.grid / 1e3, scan.values, lw=0.8)
    for dip in dips:
        ax.axvline(dip.center / 1e3, color="tab:red", ls=":", lw=0.7)
    ax.set_xlabel("probe drive (MHz)")
    ax.set_ylabel("survival")
    ax.set_title(f"d = {separation} nm, t = {t_us:.0f} us")
fig.tight_layout()
fig.savefig("spin_labels.png", dpi=150)
print("wrote spin_labels.png")
