"""Bath-driven steady state across the phase diagram."""
import warnings

from twospin_floquet import ness_scan, boundary_behavior, phase_diagram
from twospin_floquet.phases import segments

rows = ness_scan(0.5, (0.1, 1.6), 151, beta_bath=1.0)
for letter, lo, hi, count in segments(rows):
    print(f"phase {letter}: lam in [{lo:.3f}, {hi:.3f}], {count} points")
bad = [r for r in rows if r.error]
print(len(bad), "points failed (on a boundary)")

# how the occupations approach each other at the b1 boundary
rep = boundary_behavior(0.5, "b1", bracket=(1.0, 1.5), offsets=(1e-2, 1e-3, 1e-4))
print(f"\nb1 at lam* = {rep.lam_star:.10f}, pair {rep.designated_pair}")
for d, gm, gp in zip(rep.offsets, rep.pair_gap_minus, rep.pair_gap_plus):
    print(f"delta={d:g}  gap below {gm:.3e}  gap above {gp:.3e}")

# a coarse text map of the phases
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    diagram = phase_diagram((0.0, 3.0), (0.0, 3.0), resolution=(60, 20))
for i in range(len(diagram.fs) - 1, -1, -1):
    line = "".join(s if len(s) == 1 else "." for s in diagram.labels[i])
    print(f"{diagram.fs[i]:4.2f} {line}")
print("phases present:", "".join(sorted(diagram.letters())))
