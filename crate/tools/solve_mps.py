#!/usr/bin/env python3
"""Solve a fixed-format MPS file with scipy's HiGHS backend.

Prints a one-line JSON object {"status": ..., "objective": ...} so the
Rust side can cross-check its own simplex implementation. Only the MPS
subset the exporter emits is understood: N/E rows, COLUMNS, RHS.
"""

import json
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix


def parse_mps(path):
    section = None
    obj_row = None
    row_kind = {}
    row_index = {}
    cols = {}
    col_order = []
    rhs = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            fields = line.split()
            if section == "ROWS":
                kind, name = fields[0], fields[1]
                if kind == "N":
                    obj_row = name
                else:
                    if kind != "E":
                        raise ValueError(f"unsupported row kind {kind}")
                    row_index[name] = len(row_index)
                row_kind[name] = kind
            elif section == "COLUMNS":
                name = fields[0]
                if name not in cols:
                    cols[name] = {}
                    col_order.append(name)
                for rname, val in zip(fields[1::2], fields[2::2]):
                    cols[name][rname] = float(val)
            elif section == "RHS":
                for rname, val in zip(fields[1::2], fields[2::2]):
                    rhs[rname] = float(val)
    c = np.zeros(len(col_order))
    data, rows_i, cols_i = [], [], []
    for j, name in enumerate(col_order):
        for rname, val in cols[name].items():
            if rname == obj_row:
                c[j] = val
            else:
                data.append(val)
                rows_i.append(row_index[rname])
                cols_i.append(j)
    a = csc_matrix((data, (rows_i, cols_i)), shape=(len(row_index), len(col_order)))
    b = np.zeros(len(row_index))
    for rname, val in rhs.items():
        if rname != obj_row:
            b[row_index[rname]] = val
    return c, a, b


def main():
    if len(sys.argv) != 2:
        print("usage: solve_mps.py FILE.mps", file=sys.stderr)
        return 2
    c, a, b = parse_mps(sys.argv[1])
    res = linprog(c, A_eq=a, b_eq=b, bounds=(0, None), method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "failed")
    obj = float(res.fun) if res.status == 0 else None
    print(json.dumps({"status": status, "objective": obj}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
