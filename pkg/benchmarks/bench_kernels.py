"""Time the hot kernels with numba and with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--N 100] [--reps 20]

Each backend runs in its own interpreter because the switch is read at import.
Compilation is excluded by a warm-up call.
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from sweeplab._jit import JIT_ENABLED
from sweeplab import _kernels
from sweeplab.branching import skeleton_partition_codes
from sweeplab.model import Params, SweepWorkspace, run_in_workspace
from sweeplab.rng import KernelStream

N, reps = int(sys.argv[1]), int(sys.argv[2])
params = Params(N=N, s=0.1, r=0.01)
ws = SweepWorkspace(params.two_n)

def sweep_and_trace(i):
    mutant, nsteps, nev, _ = run_in_workspace(params, KernelStream(1, i), ws)
    t0 = time.perf_counter()
    _kernels.trace_lineages(ws.victim, ws.parent, ws.source, ws.prev, ws.xpath, nev, params.two_n, mutant, 2)
    return nev, time.perf_counter() - t0

sweep_and_trace(0)
skeleton_partition_codes(2, 0.002, 0.1, 50, 10, KernelStream(0))
events = 0
trace_time = 0.0
t0 = time.perf_counter()
for i in range(reps):
    nev, tt = sweep_and_trace(i)
    events += nev
    trace_time += tt
total = time.perf_counter() - t0
t0 = time.perf_counter()
skeleton_partition_codes(2, 0.002, 0.1, 200, 200, KernelStream(2))
skeleton = time.perf_counter() - t0
print(json.dumps({"jit": JIT_ENABLED, "events": events, "sweep_s": total - trace_time,
                  "trace_s": trace_time, "skeleton_200_draws_s": skeleton}))
"""


def run(disable, N, reps):
    env = dict(os.environ)
    env["SWEEPLAB_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", WORKER, str(N), str(reps)], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()
    jit = run(False, args.N, args.reps)
    py = run(True, args.N, args.reps)
    print(f"N={args.N}, {args.reps} conditioned sweeps, {jit['events']} accepted events")
    print(f"{'kernel':<22}{'numba (s)':>12}{'python (s)':>12}{'speedup':>10}")
    for key, label in (("sweep_s", "forward sweep"), ("trace_s", "backward trace"),
                       ("skeleton_200_draws_s", "skeleton, 200 draws")):
        print(f"{label:<22}{jit[key]:>12.4f}{py[key]:>12.4f}{py[key] / jit[key]:>10.0f}x")


if __name__ == "__main__":
    main()
