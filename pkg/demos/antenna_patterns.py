"""
Receive array patterns
======================

Exact normalized gain of a square half-wavelength array next to the
circular main-lobe closed form used by the SINR analysis.
"""

import numpy as np

from uavfronthaul.antenna import ArrayConfig, approx_main_lobe_gain, full_gain_xy

# peak gain grows with the array, and so does the gap to the constant-gain closed form
for n in (8, 10, 16):
    cfg = ArrayConfig(n)
    exact = full_gain_xy(0.0, 0.0, cfg)
    approx = approx_main_lobe_gain(0.0, 0.0, n, 1.0, cfg)
    print(f"N'={n:2d}  peak {10 * np.log10(exact):6.2f} dBi  closed form {10 * np.log10(approx):6.2f} dBi")

# walk out to the first null along two azimuths; the square array is not circular,
# so the diagonal cut nulls later than the closed form predicts
n = 10
cfg = ArrayConfig(n)
null = 2 * np.pi / (n * cfg.kd)
print(f"\nN'={n}, first null of the closed form at {np.degrees(null):.2f} deg")
print(" Theta   exact(0)  approx   exact(45)  [dBi]")
for frac in np.linspace(0, 0.9, 7):
    t = frac * null
    g0 = full_gain_xy(t, 0.0, cfg)
    d = np.arctan(np.tan(t) / np.sqrt(2))
    g45 = full_gain_xy(d, d, cfg)
    ga = approx_main_lobe_gain(t, 0.0, n, 1.0, cfg)
    print(f"{np.degrees(t):6.2f}  {10 * np.log10(g0):8.2f}  {10 * np.log10(ga):6.2f}  {10 * np.log10(g45):9.2f}")
