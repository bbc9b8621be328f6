"""Smoke test of the pyinvsim extension module."""

import math

import pyinvsim

PS = 1_000_000


def main():
    run = pyinvsim.simulate_builtin("buffer", "pulse:I:width=20ps", model="idm")
    assert run.status == "COMPLETED", run
    assert not run.truncated
    assert "O" in run.signals()
    out = run.transitions("O")
    assert len(out) == 2 and out[0][1] == 1 and out[1][1] == 0, out
    assert run.csv().startswith("signal,time_as,level")
    assert "$timescale" in run.vcd()

    inert = pyinvsim.simulate_builtin("buffer", "pulse:I:width=2ps", model="inertial")
    assert inert.transitions("O") == []

    netlist = "input I\noutput O\ngate buf g O I\n"
    delays = "g 4000000 4000000\n"
    stim = "init I 0\n10000000 I 1\n30000000 I 0\n"
    text = pyinvsim.simulate_text(netlist, delays, stim, model="pure")
    assert [t for t, _ in text.transitions("O")] == [14 * PS, 34 * PS]

    d_inf = pyinvsim.exp_delay(4 * PS, 4 * PS, True, None)
    assert abs(d_inf - 4 * PS) < 1.0, d_inf
    assert math.isinf(pyinvsim.exp_delay(4 * PS, 4 * PS, True, -1e9))

    widths = pyinvsim.sweep("buffer", "I", "O", [1 * PS, 20 * PS])
    assert widths[0] is None and widths[1] is not None

    lo, hi = pyinvsim.critical_width(resolution_as=PS)
    assert 0 < hi - lo <= PS and 150 * PS < hi < 160 * PS, (lo, hi)

    try:
        pyinvsim.simulate_builtin("nosuch", "pulse:I:width=1ps")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown builtin accepted")

    print("pyinvsim smoke test OK")


if __name__ == "__main__":
    main()
