"""Repetitive readout of the nitrogen nuclear spin in a fullerene cage.

The three-level NV is driven symmetrically so its dark state only
responds when a molecular electron transition matches the dressed gap
sqrt(2 Omega^2 + omega_e^2).  For m_I = +1 that happens near
omega_e + a, split into three lines by nuclear virtual transitions
(~a^2/omega_e apart); for m_I = 0 nothing in the window resonates, so
the dark-state population stays put and the readout can be repeated
without disturbing the nucleus.
"""

import numpy as np
import matplotlib.pyplot as plt

from nvmr.protocols import QndConfig, qnd_repeat, qnd_scan

cfg = QndConfig()  # electron Zeeman 300 MHz, molecule 8 nm from the NV
grid = np.arange(313.5, 319.0001, 0.05)

scan_active = qnd_scan(1, grid, cfg)
scan_idle = qnd_scan(0, grid, cfg)

signal1, fidelity1 = qnd_repeat(3, 6.0, m_i=1, config=cfg)
signal0, fidelity0 = qnd_repeat(3, 6.0, m_i=0, config=cfg)
print(f"m_I=+1: signal drops to {signal1.values.min():.3f}, "
      f"nuclear fidelity stays above {fidelity1.values.min():.4f}")
print(f"m_I= 0: signal stays above {signal0.values.min():.3f}")

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
axes[0].plot(scan_active.grid, scan_active.values, label="$m_I=+1$")
axes[0].plot(scan_idle.grid, scan_idle.values, label="$m_I=0$")
axes[0].set_xlabel("dressed transition frequency (MHz)")
axes[0].set_ylabel("dark-state survival")
axes[0].legend()
axes[0].set_title("resonance scan at 6 us")

for ax, (sig, fid), label in [
    (axes[1], (signal1, fidelity1), "$m_I=+1$"),
    (axes[2], (signal0, fidelity0), "$m_I=0$"),
]:
    ax.plot(sig.times, sig.values, label="survival")
    ax.plot(fid.times, fid.values, label="nuclear fidelity")
    ax.set_xlabel("t (us)")
    ax.set_ylim(0, 1.02)
    ax.legend()
    ax.set_title(f"repeated readout, {label}")
fig.tight_layout()
fig.savefig("nuclear_state_readout.png", dpi=150)
print("wrote nuclear_state_readout.png")
