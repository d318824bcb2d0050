"""
Reuse, array size and vibration
===============================

Sweep the reuse factor and the receive array size on one topology, then
pick the best feasible pair for two vibration levels.
"""

import numpy as np

from uavfronthaul import (ExperimentSpec, VibrationModel, build_uplink, ergodic_capacity,
                          generate_topology, optimize_config, outage_probability, uplink_atoms,
                          TopologySpec)

topo = generate_topology(TopologySpec(), seed=0)

# more links per band widen each link's bandwidth faster than they add interference
vib = VibrationModel.from_degrees(2.0)
print("R_u  capacity  P_out(10 dB)")
for r in (4, 6, 8, 10, 12):
    up = build_uplink(topo, r, 10)
    atoms = uplink_atoms(up, vib)
    print(f"{r:3d}  {ergodic_capacity(atoms, up.victim_assignment)[0]:8.3f}  "
          f"{outage_probability(atoms, 10.0):.2e}")

# larger arrays help until the beam is narrower than the vibration
print("\nN'   " + "  ".join(f"{s:>6g}deg" for s in (0.1, 1.0, 2.0, 3.0)))
for n in range(4, 21, 4):
    up = build_uplink(topo, 6, n)
    caps = [ergodic_capacity(uplink_atoms(up, VibrationModel.from_degrees(s)), up.victim_assignment)[0]
            for s in (0.1, 1.0, 2.0, 3.0)]
    print(f"{n:3d}  " + "  ".join(f"{c:9.3f}" for c in caps))

spec = ExperimentSpec(name="demo", n_rx=tuple(range(4, 17, 2)), reuse=tuple(range(4, 13)))
for sigma in (1.7, 2.2):
    o = optimize_config(spec, sigma)
    print(f"\nsigma={sigma} deg: best N'={o.n_rx}, R_u={o.reuse}, capacity {o.capacity:.3f} bit/s/Hz")
    feasible = np.array([r.outage <= spec.target_outage for r in o.table])
    print(f"  {feasible.sum()} of {feasible.size} grid points meet the outage target")
