"""End-to-end CLI test: runs every subcommand against temporary files and
checks determinism, exit codes and the embedded configuration.

usage: test_cli.py <popspec-binary> <data-dir>
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

BIN = Path(sys.argv[1])
DATA = Path(sys.argv[2])

POP = [0.05, 0.10, 0.15, 0.10, 0.12, 0.18, 0.13, 0.17]


def run(*args, expect=0):
    r = subprocess.run([str(BIN)] + [str(a) for a in args],
                       capture_output=True, text=True)
    assert r.returncode == expect, (
        f"{args} -> exit {r.returncode} (wanted {expect})\n"
        f"stdout: {r.stdout}\nstderr: {r.stderr}")
    return r


def write_config(path, **overrides):
    cfg = {
        "population": POP,
        "n0_cm3": 1e10,
        "gamma_fwhm_hz": 103e6,
        "sigma_fwhm_hz": 202e6,
        "axis": {"lo_hz": -10e9, "hi_hz": 10e9, "points": 1500},
        "path_cm": 5.0,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))


def main():
    tmp = Path(tempfile.mkdtemp(prefix="popspec_cli_"))

    # --- couplings ------------------------------------------------------
    cpl = tmp / "couplings.json"
    run("couplings", "--out", cpl)
    j = json.loads(cpl.read_text())
    assert j["schema"] == "popspec-couplings-v1"
    assert j["species"] == "Rb87-D1"
    by_key = {(m["two_f"], m["polarizations"]): m for m in j["manifolds"]}
    f1 = by_key[(2, "sigma")]
    assert f1["rank"] == 3
    assert f1["matrix_exact"] == [
        ["1/12", "1/12", "0"], ["1/12", "1/4", "1/2"],
        ["0", "1/12", "1/12"], ["1/2", "1/4", "1/12"]]
    assert by_key[(4, "sigma")]["rank"] == 3
    assert by_key[(4, "sigma+pi")]["rank"] == 3

    # same output with the bundled species file
    cpl2 = tmp / "couplings2.json"
    run("couplings", "--species", DATA / "rb87_d1.json", "--out", cpl2)
    assert cpl.read_bytes() == cpl2.read_bytes()

    # --- synth: determinism and embedded config -------------------------
    cfg = tmp / "synth.json"
    write_config(cfg)
    run("synth", "--config", cfg, "--out", tmp / "a")
    run("synth", "--config", cfg, "--out", tmp / "b")
    for pol in ("sigma_plus", "sigma_minus"):
        a = (tmp / f"a_{pol}.csv").read_bytes()
        b = (tmp / f"b_{pol}.csv").read_bytes()
        assert a == b, f"synth output for {pol} is not deterministic"
    header = (tmp / "a_sigma_plus.csv").read_text().splitlines()
    assert any("config=" in line for line in header[:8])

    # noisy output: same seed identical, different seed differs
    noisy = tmp / "noisy.json"
    write_config(noisy, noise_relative=0.01, seed=7)
    run("synth", "--config", noisy, "--out", tmp / "n1")
    run("synth", "--config", noisy, "--out", tmp / "n2")
    assert (tmp / "n1_sigma_plus.csv").read_bytes() == \
           (tmp / "n2_sigma_plus.csv").read_bytes()
    run("synth", "--config", noisy, "--seed", 8, "--out", tmp / "n3")
    assert (tmp / "n1_sigma_plus.csv").read_bytes() != \
           (tmp / "n3_sigma_plus.csv").read_bytes()

    # thermal populations give identical sigma+ and sigma- spectra (up to
    # summation order in the last floating-point digits)
    th = tmp / "thermal.json"
    write_config(th, population=[0.125] * 8)
    run("synth", "--config", th, "--out", tmp / "th")

    def rows(p):
        return [tuple(map(float, l.split(",")))
                for l in p.read_text().splitlines()
                if l and not l.startswith("#") and not l[0].isalpha()]

    for (fa, aa), (fb, ab) in zip(rows(tmp / "th_sigma_plus.csv"),
                                  rows(tmp / "th_sigma_minus.csv")):
        assert fa == fb
        assert abs(aa - ab) <= 1e-12 * max(abs(aa), 1e-300)

    # --- input errors -> exit 2 -----------------------------------------
    run("synth", "--config", tmp / "missing.json", "--out", tmp / "x", expect=2)
    bad = tmp / "bad.json"
    write_config(bad, population=[0.2] * 8)  # sums to 1.6
    run("synth", "--config", bad, "--out", tmp / "x", expect=2)
    bad.write_text('{"population": [0.125,0.125,0.125,0.125,0.125,0.125,'
                   '0.125,0.125], "unknown_key": 1}')
    run("synth", "--config", bad, "--out", tmp / "x", expect=2)
    bad.write_text("{not json")
    run("synth", "--config", bad, "--out", tmp / "x", expect=2)
    run("reconstruct", "--plus", tmp / "nope.csv",
        "--minus", tmp / "a_sigma_minus.csv", "--out", tmp / "x.json", expect=2)
    # two sigma+ files: polarization mismatch
    run("reconstruct", "--plus", tmp / "a_sigma_plus.csv",
        "--minus", tmp / "a_sigma_plus.csv", "--out", tmp / "x.json", expect=2)

    # --- reconstruct round trip ------------------------------------------
    rep_path = tmp / "report.json"
    run("reconstruct", "--plus", tmp / "a_sigma_plus.csv",
        "--minus", tmp / "a_sigma_minus.csv", "--out", rep_path)
    rep = json.loads(rep_path.read_text())
    for i in range(3):
        assert abs(rep["populations"][i] - POP[i]) < 1e-6, (i, rep["populations"])
    assert abs(rep["f2_total"] - sum(POP[3:])) < 1e-6
    assert abs(rep["n0_cm3"] - 1e10) < 0.005e10
    assert rep["config"]["free_widths"] is False
    # deterministic report
    rep2_path = tmp / "report2.json"
    run("reconstruct", "--plus", tmp / "a_sigma_plus.csv",
        "--minus", tmp / "a_sigma_minus.csv", "--out", rep2_path)
    assert rep_path.read_bytes() == rep2_path.read_bytes()

    # --- calibrate on a raw bundle ---------------------------------------
    bundle_cfg = tmp / "bundle.json"
    write_config(bundle_cfg,
                 axis={"lo_hz": -6e9, "hi_hz": 6e9, "points": 6000},
                 raw_bundle={"fsr_hz": 1e9, "chirp": 0.10})
    run("synth", "--config", bundle_cfg, "--out", tmp / "c")
    map_path = tmp / "map.json"
    cal_spec = tmp / "cal_spectrum.csv"
    r = run("calibrate", "--in", tmp / "c_bundle.csv", "--out-map", map_path,
            "--out-spectrum", cal_spec, "--degree", 4)
    rms = float(r.stdout.strip().split("=")[1])
    assert rms < 2e6, f"anchor rms {rms} Hz too large"
    m = json.loads(map_path.read_text())
    assert m["schema"] == "popspec-frequency-map-v1"
    assert m["config"]["degree"] == 4
    assert len(m["coefficients"]) == 5
    assert cal_spec.exists()
    run("calibrate", "--in", tmp / "nope.csv", "--out-map", map_path, expect=2)

    # --- simulate ---------------------------------------------------------
    curve = tmp / "curve.csv"
    run("simulate", "--scenario", 2, "--grid", "1e-2,1e4,7", "--out", curve)
    lines = [l for l in curve.read_text().splitlines() if l and not l.startswith("#")]
    assert len(lines) == 7 + 1  # header row + 7 grid points
    curve2 = tmp / "curve2.csv"
    run("simulate", "--scenario", 2, "--grid", "1e-2,1e4,7", "--out", curve2)
    assert curve.read_bytes() == curve2.read_bytes()
    run("simulate", "--scenario", 1, "--grid", "oops", "--out", curve, expect=2)

    print("cli roundtrip test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
