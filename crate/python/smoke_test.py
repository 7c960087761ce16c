"""Smoke test for the Python bindings.

Builds nothing itself: run `cargo build -p frobound-python` (or --release)
first. The compiled library is copied into a temp dir as frobound_py.so so
it can be imported without an install step.
"""

import importlib
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libfrobound_py.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "frobound_py.so")
            sys.path.insert(0, str(tmp))
            return importlib.import_module("frobound_py")
    sys.exit("libfrobound_py.so not found; run cargo build -p frobound-python")


def main():
    fb = load()

    values = [v for _, v in fb.moments("a")]
    assert values == ["0", "-1", "3", "0", "2"], values
    assert len(fb.moments("b")) == 32

    q = fb.Poly.builtin("q")
    assert q.expectation("b") == "-51/25"
    region = fb.Region("sum>=-2.47")
    assert region.contains("-1", "-1")
    assert not region.contains("-2", "-1")

    rep = fb.verify_hyperplane(q, region, "b")
    assert rep["verdict"] == "valid", rep["verdict"]
    print("Q on sum>=-2.47:", rep["verdict"], "margin", rep["margin"][:12])

    rep = fb.verify_measure("builtin:a1-opt", fb.Region("sum>=-2/3"), "a")
    assert rep["verdict"] == "valid"
    bad = fb.verify_measure("builtin:a1-opt", fb.Region("sum>=-2/3"), "a", weights=["1/6", "4/21", "9/15"])
    assert bad["verdict"] == "invalid"

    ids = fb.identities()
    assert ids["all_passed"] and len(ids["identities"]) == 9

    m = fb.minimize(fb.Poly.builtin("r"), fb.Region("product>=-1.57"))
    assert abs(float(m["value"]) + 8.32369) < 1e-4

    t = fb.threshold("a", "sum", "geq", 1e-6)
    lo = float(t["feasible_bound"]["decimal"])
    hi = float(t["infeasible_bound"]["decimal"])
    assert lo <= -2 / 3 <= hi and hi - lo <= 1e-6
    print("sum threshold bracket:", lo, hi)

    svg = fb.plot_svg("builtin:appendix-a2", fb.Region("product>=-1.5785"))
    assert svg.count("<circle") == 33

    try:
        fb.Region("sum>>1")
    except ValueError:
        pass
    else:
        raise AssertionError("bad region accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
