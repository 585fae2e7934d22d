"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--number 20000]

Prints per-call times for each kernel under both backends, then times a
whole disk-edge servo run in a subprocess per backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

from pbts._kernels import SADDLE, WAVE, _pykernels

try:
    from pbts._kernels import _ckernels
except ImportError:
    _ckernels = None

P = (1.0, -2.0, 3.0, 10.0, -20.0, 30.0)
Q = (-4.0, 5.0, 0.5, 170.0, 45.0, -60.0)
R = _pykernels.euler_to_rot(10.0, -20.0, 30.0)

CASES = {
    "wrap_deg": lambda k: k.wrap_deg(541.0),
    "euler_to_rot": lambda k: k.euler_to_rot(10.0, -20.0, 30.0),
    "rot_to_euler": lambda k: k.rot_to_euler(R),
    "compose": lambda k: k.compose(P, Q),
    "inverse": lambda k: k.inverse(P),
    "relative": lambda k: k.relative(P, Q),
    "height(wave)": lambda k: k.height(WAVE, 10.0, 80.0, 3.0, 1.0),
    "project(saddle)": lambda k: k.project_heightfield(SADDLE, 120.0, 0.0, 5.0, -3.0, 4.0, 9, 1e-13, 100),
    "project(wave)": lambda k: k.project_heightfield(WAVE, 10.0, 80.0, 12.0, 1.0, 6.0, 9, 1e-13, 100),
}

SERVO = """
import time
from pbts import _kernels
from pbts.experiment import execute_run, load_config
cfg = load_config({path!r})
t = time.perf_counter()
for _ in range({reps}):
    rec, _ = execute_run(cfg, cfg.runs()[0])
print(_kernels.BACKEND, (time.perf_counter() - t) / {reps}, len(rec))
"""


def per_call(fn, kernels, repeat, number):
    return min(timeit.repeat(lambda: fn(kernels), repeat=repeat, number=number)) / number


def servo_run(config, pure, reps):
    env = dict(os.environ, PBTS_PURE_PYTHON="1" if pure else "0")
    code = SERVO.format(path=config, reps=reps)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, seconds, steps = out.stdout.split()
    return backend, float(seconds), int(steps)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20000)
    ap.add_argument("--servo-reps", type=int, default=3)
    ap.add_argument("--config", default=os.path.join(os.path.dirname(__file__), "..", "configs", "wave_rim.yaml"))
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled kernels not built; only the Python fallback is available")
    print(f"{'kernel':18s} {'python us':>10s} {'cython us':>10s} {'speedup':>8s}")
    for name, fn in CASES.items():
        py = per_call(fn, _pykernels, args.repeat, args.number // 10 if "project" in name else args.number)
        if _ckernels is None:
            print(f"{name:18s} {py * 1e6:10.3f}")
            continue
        cy = per_call(fn, _ckernels, args.repeat, args.number // 10 if "project" in name else args.number)
        print(f"{name:18s} {py * 1e6:10.3f} {cy * 1e6:10.3f} {py / cy:7.1f}x")

    print()
    results = [servo_run(args.config, pure, args.servo_reps) for pure in (True, False)]
    for backend, seconds, steps in results:
        print(f"servo run ({os.path.basename(args.config)}, {steps} rows) on {backend}: {seconds * 1e3:.1f} ms")
    if results[0][0] != results[1][0]:
        print(f"whole-run speedup: {results[0][1] / results[1][1]:.2f}x")


if __name__ == "__main__":
    main()
