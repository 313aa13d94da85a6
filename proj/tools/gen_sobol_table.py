#!/usr/bin/env python3
"""Regenerates src/sobol_directions.inc from the Joe-Kuo (new-joe-kuo-6.21201)
direction numbers bundled with SciPy."""
import os
import sys

import numpy as np
import scipy

DIMS = int(sys.argv[1]) if len(sys.argv) > 1 else 1024
path = os.path.join(os.path.dirname(scipy.__file__), "stats", "_sobol_direction_numbers.npz")
data = np.load(path)
poly, vinit = data["poly"][:DIMS], data["vinit"][:DIMS]

out = [
    "// Joe-Kuo Sobol direction numbers (new-joe-kuo-6.21201), first %d dimensions." % DIMS,
    "// Generated by tools/gen_sobol_table.py. Row d: primitive polynomial, then m_1..m_s.",
    "// Dimension 0 is the van der Corput sequence.",
    "",
]
for d in range(DIMS):
    p = int(poly[d])
    deg = p.bit_length() - 1 if d > 0 else 0
    m = [int(x) for x in vinit[d][:max(deg, 1)]]
    out.append("{%d, {%s}}," % (p, ", ".join(str(x) for x in m)))
with open(os.path.join(os.path.dirname(__file__), "..", "src", "sobol_directions.inc"), "w") as f:
    f.write("\n".join(out) + "\n")
