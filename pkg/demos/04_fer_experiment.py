#!/usr/bin/env python3
"""Small-scale frame-error-rate experiments on calm and wavy water.

Runs the full three-stream chain at a desk-friendly frame count, then a
short drive-amplitude sweep on the wavy preset, writing CSV next to this
script.  The shipped presets' full-scale behavior (zero errors calm,
~5e-5 FER wavy) needs hundreds of thousands of frames; see the
acceptance tests for those runs.
"""

from pathlib import Path

from w2a_owc.config import load_settings
from w2a_owc.harness import run_experiment, sweep_vpp

print("== calm surface, 2000 frames per path ==")
report = run_experiment(load_settings(preset="calm", n_frames=2000, seed=8))
for line in report.lines():
    print(f"  {line}")

print("\n== wavy surface, deep modulation, run long enough to cross a trough ==")
settings = load_settings(preset="wavy", n_frames=4000, seed=8,
                         modulation_depth=0.85)
report = run_experiment(settings)
for line in report.lines():
    print(f"  {line}")

print("\n== drive-amplitude sweep (lower Vpp -> higher FER) ==")
csv_path = Path(__file__).with_name("sweep_demo.csv")
sweep_settings = load_settings(preset="wavy", n_frames=2000, seed=8,
                               modulation_depth=0.85)
results = sweep_vpp(sweep_settings, [5.0, 6.0, 7.5, 9.06675], csv_out=csv_path)
for vpp, rep in results:
    print(f"  vpp={vpp:7.5g}  avg FER={rep.average_fer:.3e}")
print(f"  csv written to {csv_path}")
