"""Watch an interconnection degrade as identical loads are paralleled.

The source side is the 200-W prototype's closed-loop output impedance; the
load side is one to four copies of the same converter's closed-loop input
impedance in parallel.  Each added load halves the load-side impedance and
lifts the minor loop gain by 6 dB, so the peak marches toward 0 dB and the
interaction margin shrinks.  Prints the peak of |tmlg| and where it sits.
"""

import argparse
from pathlib import Path

import numpy as np

from iackit.config import build_system, parse_file
from iackit.freq_core import parallel, sweep
from iackit.stability import tmlg
from iackit.tf_canon import z_in_closed, z_out_terminated


def run(source_path: Path, load_path: Path, max_loads: int) -> None:
    source = build_system(parse_file(source_path))
    load = build_system(parse_file(load_path))
    z_src = z_out_terminated(source.plant)
    z_one = z_in_closed(load.plant)
    grid = source.grid

    print(f"source: {source_path.name}   load: {load_path.name}")
    print(f"  {'loads':>5}  {'peak |tmlg| [dB]':>17}  {'at [Hz]':>9}")
    for count in range(1, max_loads + 1):
        combined = z_one
        for _ in range(count - 1):
            combined = parallel(combined, z_one)
        result = sweep(tmlg(z_src, combined), grid)
        idx = int(np.argmax(result.mag_db))
        print(f"  {count:5d}  {result.mag_db[idx]:17.2f}  "
              f"{grid.frequencies[idx]:9.1f}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    configs = Path(__file__).resolve().parents[1] / "configs"
    parser.add_argument("--source", type=Path,
                        default=configs / "prototype_200w.ini")
    parser.add_argument("--load", type=Path,
                        default=configs / "prototype_200w_nofilter.ini")
    parser.add_argument("--max-loads", type=int, default=4)
    args = parser.parse_args()
    run(args.source, args.load, args.max_loads)


if __name__ == "__main__":
    main()
