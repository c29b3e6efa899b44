"""Positioning, velocity and orientation bounds along the four sweep axes.

Starts from the reference scenario (3 satellites at 550 km, 4 antennas,
3 slots 10 s apart, 1 GHz, -20 dB per-link SNR, both offsets unknown) and
varies one knob at a time. The SNR sweep shows the square-root law; the
antenna and slot-spacing sweeps show the aperture effects; the frequency
sweep keeps the physical array fixed.

Run with ``python3 demos/crlb_sweeps.py``.
"""

from leofim.analysis import orientation_frequency_check, parameter_sweep
from leofim.scenario import default_scenario

SWEEPS = {
    "snr": [-20, 0, 20, 40],
    "antennas": [4, 16, 36, 64, 100],
    "slot-spacing": [10, 20, 40, 80],
    "frequency": [1e9, 5e9, 20e9, 60e9],
}


def _fmt(x):
    return "     n/a" if x is None else f"{x:10.4g}"


def main():
    base = default_scenario()
    for axis, grid in SWEEPS.items():
        res = parameter_sweep(base, axis, grid)
        print(f"== sweep over {axis} ==")
        print(f"{'value':>12} {'pos [m]':>10} {'vel [m/s]':>10} {'ori [rad]':>10}")
        for v, r in zip(res.values, res.reports):
            print(f"{v:12.4g} {_fmt(r.position_bound)} {_fmt(r.velocity_bound)} {_fmt(r.orientation_bound)}")
        print()

    out = orientation_frequency_check(base)
    b1, b60 = out["orientation_bounds"]
    print(f"orientation bound: {b1:.4g} rad at 1 GHz, {b60:.4g} rad at 60 GHz "
          f"(relative change {out['relative_change']:.3f})")


if __name__ == "__main__":
    main()
