#!/usr/bin/env python3
"""Regenerates the synthetic data fixtures under data/.

Calibration tables: one CSV per host model over a full axis-aligned lattice of
utilization points.  The underlying power function is linear in all four
resources plus a mild CPU-squared term and a small cpu*mem cross term, so a
plain linear regression is close but not exact and the residual grid has
something real to correct.

The host palette is built around an idle-vs-IO tension: the host with the
lowest idle draw has the most expensive disk/network coefficients and vice
versa, so a model that cannot see IO utilization systematically misjudges
which host is cheapest for IO-heavy work.

Trace files: PlanetLab-style day series (288 five-minute readings), a diurnal
sine plus deterministic noise, kept in a band that always leaves CPU headroom.
"""

import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, os.pardir, "data")

# label: (idle_w, w_per_cpu_pct, w_per_mem_mb, w_per_disk_bps, w_per_net_bps,
#         cpu_quad, cpu_mem_cross)
HOSTS = {
    "sun-fire-x2800": (180.0, 0.90, 0.010, 1.2e-5, 1.1e-5, 0.20, 1.5e-5),
    "sun-fire-x4100": (150.0, 1.10, 0.014, 1.6e-5, 1.5e-5, 0.25, 2.0e-5),
    "poweredge-r260": (125.0, 1.00, 0.012, 2.2e-5, 2.0e-5, 0.18, 1.2e-5),
    "rackable-c2112": (120.0, 1.05, 0.016, 1.1e-5, 1.05e-5, 0.22, 1.8e-5),
    "proliant-dl360-gen9": (90.0, 0.95, 0.011, 4.0e-5, 3.8e-5, 0.30, 1.0e-5),
    "acer-ar585-f1": (160.0, 1.20, 0.013, 1.4e-5, 1.3e-5, 0.15, 1.6e-5),
}

CPU_AXIS = [0, 20, 40, 60, 80, 100]
MEM_AXIS = [0, 512, 1024, 2048, 4096]
DISK_AXIS = [0, 1_000_000, 2_000_000, 4_000_000]
NET_AXIS = [0, 1_000_000, 2_000_000, 4_000_000]

TRACE_COUNT = 10
TRACE_LEN = 288


def power_w(coeffs, cpu, mem, disk, net):
    idle, a_cpu, a_mem, a_disk, a_net, quad, cross = coeffs
    return (idle + a_cpu * cpu + a_mem * mem + a_disk * disk + a_net * net
            + quad * cpu * cpu / 100.0 + cross * cpu * mem)


def write_calibration():
    out_dir = os.path.join(DATA, "calibration")
    os.makedirs(out_dir, exist_ok=True)
    for label, coeffs in HOSTS.items():
        path = os.path.join(out_dir, label + ".csv")
        with open(path, "w") as f:
            f.write("cpu_pct,mem_mb,disk_bps,net_bps,power_w\n")
            for cpu in CPU_AXIS:
                for mem in MEM_AXIS:
                    for disk in DISK_AXIS:
                        for net in NET_AXIS:
                            p = power_w(coeffs, cpu, mem, disk, net)
                            f.write(f"{cpu},{mem},{disk},{net},{p!r}\n")
        print("wrote", path)


def write_traces():
    out_dir = os.path.join(DATA, "traces")
    os.makedirs(out_dir, exist_ok=True)
    for i in range(TRACE_COUNT):
        rng = random.Random(7100 + i)
        base = rng.uniform(20, 38)
        amp = rng.uniform(8, 18)
        phase = rng.uniform(0, 2 * math.pi)
        path = os.path.join(out_dir, f"trace_{i:02d}.txt")
        with open(path, "w") as f:
            for t in range(TRACE_LEN):
                v = base + amp * math.sin(2 * math.pi * t / TRACE_LEN + phase)
                v += rng.uniform(-4, 4)
                f.write(f"{max(3, min(74, round(v)))}\n")
        print("wrote", path)


if __name__ == "__main__":
    write_calibration()
    write_traces()
