"""End-to-end command-line workflow driven programmatically.

The same four stages a shell user would run: generate a dataset, train and
evaluate classifiers against the baseline, rank feature importances, and
render the lattice demo trajectories. Every command is a pure function of
(config, seed); outputs land in ./out and embed the resolved config, so
rerunning any command with the same seed reproduces the files byte for byte.
"""

import pathlib

from syncpred.cli import main

OUT = "out"

steps = [
    ["gen", "--out", OUT, "--seed", "42",
     "--set", "name=toy_fca",
     "--set", "model=fca",
     "--set", "source.kind=toy",
     "--set", "source.n=12",
     "--set", "r=6", "--set", "horizon=70",
     "--set", "samples_per_class=30"],
    ["train-eval", "--out", OUT, "--seed", "42",
     "--set", f"dataset={OUT}/toy_fca",
     "--set", 'classifiers=["tree","boost"]',
     "--set", "folds=3"],
    ["importance", "--out", OUT, "--seed", "42",
     "--set", f"dataset={OUT}/toy_fca",
     "--set", "classifier=boost",
     "--set", "splits=5"],
    ["demo", "--out", OUT, "--seed", "42",
     "--set", "rows=6", "--set", "cols=6",
     "--set", "extra_edges=10", "--set", "horizon=20"],
]

for argv in steps:
    print(f"$ syncpred {' '.join(argv)}")
    code = main(argv)
    assert code == 0, f"exit {code}"
    print()

print("files under ./out:")
for p in sorted(pathlib.Path(OUT).iterdir()):
    print(f"  {p.name}  ({p.stat().st_size} bytes)")
