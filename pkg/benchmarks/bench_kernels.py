"""Compare compiled and pure-Python kernels on identical workloads.

Each mode runs in a fresh interpreter so the environment flag takes effect.
Compile time is reported separately from the warm run.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
import numpy as np
from tdavg import _jit
from tdavg.analysis import estimate_lipschitz, scaling_experiment
from tdavg.averaging import AveragedSystem, QuadratureConfig
from tdavg.core import SystemState
from tdavg.integrate import IntegratorConfig, integrate
from tdavg.models import bianchi3

model = bianchi3()
cfg = IntegratorConfig(abs_tol=1e-10, rel_tol=1e-10)
state = SystemState(H=1.0, x=[0.2, 0.5, 0.0])
z0 = SystemState(H=0.1, x=[0.2, 0.5, 0.0])

def quad_averaged():
    system = AveragedSystem(model, 0.1, 0.0, QuadratureConfig(nodes=64), use_closed_form=False)
    integrate(system.rhs, z0, 20.0, cfg)

def sweep():
    scaling_experiment(model, state, (0.2, 0.1, 0.05, 0.025), 0.5, 1.0, integrator=cfg)

def lipschitz():
    estimate_lipschitz(model, ([-0.5, 0.1, -3.2], [0.5, 0.8, 3.2]), samples=20000)

out = {"jit_disabled": _jit.JIT_DISABLED}
for name, fn in [("quadrature_averaged", quad_averaged), ("scaling_sweep", sweep), ("lipschitz", lipschitz)]:
    times = []
    for _ in range(REPEAT + 1):
        t0 = time.perf_counter(); fn(); times.append(time.perf_counter() - t0)
    out[name] = {"first": times[0], "warm": min(times[1:])}
print(json.dumps(out))
"""


def run(disabled, repeat):
    env = dict(os.environ, TDAVG_DISABLE_JIT="1" if disabled else "0")
    code = WORKLOAD.replace("REPEAT", str(repeat))
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2)
    args = ap.parse_args()
    jit, py = run(False, args.repeat), run(True, args.repeat)
    print(f"{'workload':<22}{'numba first':>13}{'numba warm':>12}{'python warm':>13}{'speedup':>9}")
    for name in ("quadrature_averaged", "scaling_sweep", "lipschitz"):
        j, p = jit[name], py[name]
        print(f"{name:<22}{j['first']:>12.3f}s{j['warm']:>11.3f}s{p['warm']:>12.3f}s{p['warm'] / j['warm']:>8.1f}x")


if __name__ == "__main__":
    main()
