"""The transmitter's beam pattern.

A 10x10 planar array steered along +x gives a main lobe about 10 degrees
wide. Its azimuth cut has a twin lobe at 180 degrees, so a receiver behind
the array would see the same gain as one in front. A 10 dB penalty on the
rear half plane breaks that tie.

    python demos/01_antenna_pattern.py [out.txt]
"""

import sys

import numpy as np

from mmwave_ia import antenna

pattern = antenna.BeamPattern()
print(f"half-power beamwidth: {antenna.half_power_beamwidth():.2f} deg")

print("\noffset  array factor  with penalty")
for o in (0, 5, 10, 30, 60, 90, 135, 180, 225, 300, 355):
    print(f"{o:6d}  {float(antenna.array_factor_db(o)):10.2f} dB  {float(pattern.lookup(o)):10.2f} dB")

# every beam is the same pattern rotated to its boresight
az = 47.3
gains = pattern.gain_matrix(np.array([az]))[0]
print(f"\nreceiver at {az} deg: strongest beam {gains.argmax() + 1} "
      f"({gains.max():.2f} dB), runner-up {np.argsort(gains)[-2] + 1}")

if len(sys.argv) > 1:
    pattern.export(sys.argv[1])
    print(f"pattern table written to {sys.argv[1]}")
