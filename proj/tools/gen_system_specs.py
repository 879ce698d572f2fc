#!/usr/bin/env python3
"""Builds reduced machine-node admittance models and writes system spec JSON.

Machines sit behind a transient reactance at their terminal bus; loads are
constant shunt admittances. The full bus matrix is Kron-reduced onto the
machine internal nodes for the pre-fault, faulted (bus short) and post-fault
(line removed) network states, one faulted/post pair per transmission line.
"""

import argparse
import json

import numpy as np

OMEGA_S = 2 * np.pi * 60.0


class Network:
    def __init__(self, n_bus, n_g):
        self.n_bus = n_bus
        self.n_g = n_g          # machines at buses 0..n_g-1 via x'd
        self.xd = [0.0] * n_g   # transient reactance
        self.lines = []         # (i, j, r, x, b_half)
        self.shunts = [0j] * n_bus  # load admittances

    def bus_matrix(self, skip_line=None):
        n = self.n_bus + self.n_g  # internal machine nodes appended at the end
        y = np.zeros((n, n), dtype=complex)
        for k, (i, j, r, x, bh) in enumerate(self.lines):
            if k == skip_line:
                continue
            ys = 1.0 / complex(r, x)
            y[i, i] += ys + 1j * bh
            y[j, j] += ys + 1j * bh
            y[i, j] -= ys
            y[j, i] -= ys
        for b, sh in enumerate(self.shunts):
            y[b, b] += sh
        for g in range(self.n_g):
            node = self.n_bus + g
            ys = 1.0 / complex(0.0, self.xd[g])
            y[node, node] += ys
            y[g, g] += ys
            y[node, g] -= ys
            y[g, node] -= ys
        return y

    def reduced(self, skip_line=None, faulted_bus=None):
        y = self.bus_matrix(skip_line)
        keep = list(range(self.n_bus, self.n_bus + self.n_g))
        drop = list(range(self.n_bus))
        if faulted_bus is not None:
            # a solid three-phase short pins the bus voltage to zero, so the
            # bus simply disappears from the reduction
            drop.remove(faulted_bus)
            y = np.delete(np.delete(y, faulted_bus, axis=0), faulted_bus, axis=1)
            keep = [k - 1 for k in keep]
            drop = [d if d < faulted_bus else d - 1 for d in drop]
        yrr = y[np.ix_(keep, keep)]
        yre = y[np.ix_(keep, drop)]
        yer = y[np.ix_(drop, keep)]
        yee = y[np.ix_(drop, drop)]
        return yrr - yre @ np.linalg.solve(yee, yer)


def mat_json(m):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def spec_json(net, inertia, damping, p_mech, voltage):
    pre = net.reduced()
    fault, post = [], []
    for k, (i, j, *_rest) in enumerate(net.lines):
        fault.append(net.reduced(faulted_bus=i))
        post.append(net.reduced(skip_line=k))
    return {
        "n_g": net.n_g,
        "H": inertia,
        "D": damping,
        "Pm": p_mech,
        "E": voltage,
        "omega_s": OMEGA_S,
        "Y_pre": mat_json(pre),
        "Y_fault_by_line": [mat_json(m) for m in fault],
        "Y_post_by_line": [mat_json(m) for m in post],
    }


def three_machine():
    net = Network(n_bus=6, n_g=3)
    net.xd = [0.12, 0.18, 0.25]
    # machine buses 0-2, load buses 3-5, a ring with cross ties
    net.lines = [
        (0, 3, 0.010, 0.085, 0.044),
        (1, 4, 0.017, 0.092, 0.040),
        (2, 5, 0.012, 0.110, 0.052),
        (3, 4, 0.032, 0.161, 0.077),
        (4, 5, 0.039, 0.170, 0.090),
        (5, 3, 0.028, 0.149, 0.071),
    ]
    net.shunts[3] = 0.90 - 0.30j
    net.shunts[4] = 1.00 - 0.35j
    net.shunts[5] = 0.70 - 0.25j
    inertia = [4.0, 3.2, 2.4]
    damping = [2.0, 2.0, 2.0]
    p_mech = [0.9, 1.0, 0.7]
    voltage = [1.04, 1.02, 1.05]
    return spec_json(net, inertia, damping, p_mech, voltage)


def nine_machine():
    net = Network(n_bus=18, n_g=9)
    rng = np.random.default_rng(7)
    net.xd = list(np.round(rng.uniform(0.08, 0.30, 9), 4))
    lines = []
    # each machine bus g ties to load bus 9+g, load buses form a ring
    for g in range(9):
        lines.append((g, 9 + g,
                      round(float(rng.uniform(0.008, 0.02)), 4),
                      round(float(rng.uniform(0.07, 0.12)), 4),
                      round(float(rng.uniform(0.03, 0.06)), 4)))
    for k in range(9):
        lines.append((9 + k, 9 + (k + 1) % 9,
                      round(float(rng.uniform(0.02, 0.05)), 4),
                      round(float(rng.uniform(0.12, 0.22)), 4),
                      round(float(rng.uniform(0.06, 0.10)), 4)))
    # two long cross ties
    lines.append((9, 13, 0.045, 0.240, 0.110))
    lines.append((11, 16, 0.050, 0.260, 0.120))
    net.lines = lines
    for b in range(9, 18):
        net.shunts[b] = complex(round(float(rng.uniform(0.5, 1.1)), 3),
                                -round(float(rng.uniform(0.15, 0.4)), 3))
    inertia = list(np.round(rng.uniform(1.8, 6.5, 9), 3))
    damping = list(np.round(rng.uniform(1.0, 3.0, 9), 3))
    p_mech = list(np.round(rng.uniform(0.5, 1.1, 9), 3))
    voltage = list(np.round(rng.uniform(1.0, 1.06, 9), 4))
    return spec_json(net, inertia, damping, p_mech, voltage)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    for name, spec in (("sys3.json", three_machine()), ("sys9.json", nine_machine())):
        with open(f"{args.out}/{name}", "w") as f:
            json.dump(spec, f, indent=1)
            f.write("\n")
        print(f"wrote {args.out}/{name}")


if __name__ == "__main__":
    main()
