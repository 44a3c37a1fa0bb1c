"""Sweep the voltage-loop gain against the input filter and tabulate margins.

Runs the 20-kW prototype with and without its input filter over a ladder of
proportional gains and prints crossover, phase margin, and gain margin for
each case.  The point of the exercise: a gain that looks comfortable on the
bare converter can sit on top of the filter resonance and lose the loop.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from iackit.config import build_system, parse_file
from iackit.stability import margins
from iackit.tf_canon import loop_gain

GAINS = (0.037, 0.073, 0.15, 0.3, 1.0)


def _report_row(built):
    report = margins(loop_gain(built.plant), built.grid)
    cross = report.gain_crossover_hz[0] if report.gain_crossover_hz else float("nan")
    pm = min(report.phase_margin_deg) if report.phase_margin_deg else float("nan")
    gm = min(report.gain_margin_db) if report.gain_margin_db else float("inf")
    return cross, pm, gm, report.verdict


def run(config_path: Path) -> None:
    doc = parse_file(config_path)
    for label, document in (("with input filter", doc),
                            ("without input filter",
                             replace(doc, input_filter=None))):
        print(f"\n{label}")
        print(f"  {'k_p':>6}  {'f_c [Hz]':>10}  {'PM [deg]':>9}  "
              f"{'GM [dB]':>8}  verdict")
        for k_p in GAINS:
            built = build_system(
                replace(document, control=replace(document.control, k_p=k_p)))
            cross, pm, gm, verdict = _report_row(built)
            print(f"  {k_p:6.3f}  {cross:10.1f}  {pm:9.1f}  {gm:8.1f}  {verdict}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "configs" / "prototype_20kw.ini"
    parser.add_argument("--config", type=Path, default=default)
    args = parser.parse_args()
    run(args.config)


if __name__ == "__main__":
    main()
