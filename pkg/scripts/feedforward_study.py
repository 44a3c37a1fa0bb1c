"""Show what each external feedforward path buys on the prototype configs.

Three experiments, each a one-knob change against a shipped configuration:

* input-voltage feedforward placing an exact null in the 200-W audio
  susceptibility at one spot frequency,
* output-current feedforward placing a null in the terminated output
  impedance the same way,
* source-current feedforward as active damping on the 20-kW loop, turning
  an unstable gain setting into a stable one.

The spot-null gains are two-term (g0 + g1*s) fits to the exact complex
ratio at the chosen frequency, so the null is deep there and the response
degrades away from it; the tables print both so the trade is visible.
"""

import argparse
import math
from dataclasses import replace
from pathlib import Path

from iackit.config import build_system, parse_file
from iackit.freq_core import constant, poly_ratio
from iackit.stability import margins
from iackit.tf_canon import (
    PlantModel, g_vv_closed, loop_gain, z_out_terminated)

SPOT_HZ = (10.0, 81.0, 400.0, 2000.0)


def _mag_db(value: complex) -> float:
    return 20.0 * math.log10(abs(value)) if value != 0.0 else float("-inf")


def _with_ff(built, **overrides):
    chain = replace(built.control, **overrides)
    return PlantModel(coeffs=built.primed, load=built.load, control=chain)


def _spot_fit(value: complex, omega: float):
    """First-order expression equal to ``value`` at s = j*omega."""
    return poly_ratio((value.real, value.imag / omega), (1.0,))


def _null_table(title, func, base_plant, ff_plant):
    print(f"\n{title}")
    print(f"  {'f [Hz]':>8}  {'baseline [dB]':>14}  {'with FF [dB]':>13}")
    for f in SPOT_HZ:
        s = 2j * math.pi * f
        print(f"  {f:8.0f}  {_mag_db(func(base_plant).eval(s)):14.1f}  "
              f"{_mag_db(func(ff_plant).eval(s)):13.1f}")


def run(config_dir: Path) -> None:
    built = build_system(parse_file(config_dir / "prototype_200w.ini"))

    omega = 2.0 * math.pi * 81.0
    gain = -(built.primed.c_out.eval(1j * omega)
             / built.primed.a_out.eval(1j * omega))
    _null_table("audio susceptibility |g_vv|, f_vg nulling 81 Hz",
                g_vv_closed, built.plant,
                _with_ff(built, ff_in_voltage=_spot_fit(gain, omega)))

    omega = 2.0 * math.pi * 400.0
    gain = 1.0 / built.primed.a_out.eval(1j * omega)
    _null_table("terminated output impedance |z_out|, f_io nulling 400 Hz",
                z_out_terminated, built.plant,
                _with_ff(built, ff_out_current=_spot_fit(gain, omega)))

    doc = parse_file(config_dir / "prototype_20kw.ini")
    heavy = build_system(replace(doc, control=replace(doc.control, k_p=1.0)))
    print("\n20-kW loop at k_p = 1.0, source-current feedforward ladder")
    print(f"  {'f_ig':>7}  {'GM [dB]':>8}  verdict")
    for fig in (0.0, 0.002, 0.005, 0.01):
        plant = _with_ff(heavy, ff_in_current=constant(fig))
        report = margins(loop_gain(plant), heavy.grid)
        gm = min(report.gain_margin_db) if report.gain_margin_db else float("inf")
        print(f"  {fig:7.3f}  {gm:8.1f}  {report.verdict}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "configs"
    parser.add_argument("--config-dir", type=Path, default=default)
    args = parser.parse_args()
    run(args.config_dir)


if __name__ == "__main__":
    main()
