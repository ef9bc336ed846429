#!/usr/bin/env python3
"""Regenerate src/sobol_table.cpp from the Joe-Kuo D(6) direction numbers.

Reads the table that ships with scipy (scipy/stats/_sobol_direction_numbers.npz,
which is the published new-joe-kuo-6.21201 data) and emits a compact C++ source
file holding the primitive polynomials and initial direction numbers for the
first SOBOL_TABLE_DIMS dimensions.  The runtime recurrence lives in
src/sampling.cpp; this file only carries data.

Usage: python3 scripts/generate_sobol_table.py [dims] > src/sobol_table.cpp
"""

import inspect
import os
import sys

import numpy as np
from scipy.stats import _sobol

DIMS = int(sys.argv[1]) if len(sys.argv) > 1 else 2600


def main() -> None:
    data_dir = os.path.dirname(inspect.getfile(_sobol))
    npz = np.load(os.path.join(data_dir, "_sobol_direction_numbers.npz"))
    poly = npz["poly"][:DIMS]
    vinit = npz["vinit"][:DIMS]

    minit = []
    offsets = [0]
    for k in range(DIMS):
        deg = int(poly[k]).bit_length() - 1
        minit.extend(int(v) for v in vinit[k, :deg])
        offsets.append(len(minit))

    out = sys.stdout
    out.write("// Joe-Kuo D(6) Sobol direction-number table "
              "(new-joe-kuo-6.21201, first %d dims).\n" % DIMS)
    out.write("// Generated by scripts/generate_sobol_table.py -- do not edit.\n\n")
    out.write('#include "heatnet/sampling.hpp"\n\n')
    out.write("namespace heatnet::detail {\n\n")
    out.write("const int sobol_table_dims = %d;\n\n" % DIMS)

    def emit(name, values, per_line=16):
        out.write("const std::uint32_t %s[] = {\n" % name)
        for i in range(0, len(values), per_line):
            out.write("    " + ",".join(str(v) for v in values[i:i + per_line]) + ",\n")
        out.write("};\n\n")

    emit("sobol_poly", [int(p) for p in poly])
    emit("sobol_minit_offset", offsets)
    emit("sobol_minit", minit)
    out.write("}  // namespace heatnet::detail\n")


if __name__ == "__main__":
    main()
