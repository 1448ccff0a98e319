"""Drive the convergence-table harness from Python and keep the CSV.

This is the same path as

  python3 -m expmid --example 3 --steps 10,20,40,80 --out ex3.csv

The text tables interleave values with observed orders. The CSV keeps full
precision, so repeated runs give byte-identical files.
"""

import sys

from expmid.cli import RunConfig, run_suite

cfg = RunConfig(example=3, steps=(10, 20, 40, 80))
result = run_suite(cfg)
print(result.text)

out = sys.argv[1] if len(sys.argv) > 1 else None
if out:
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.csv)
    print(f"wrote {out}")
