import math
import subprocess
import sys

import numpy as np
import pytest

from toric_dlocc.cli import EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, FIGURE_PRESETS, main
from toric_dlocc.errors import ConfigError
from toric_dlocc.gauge import subgroup_spec
from toric_dlocc.lattice import TorusLattice, parse_bipartition
from toric_dlocc.scan import CSV_COLUMNS, ScanConfig, config_from_mapping, parse_config_text, parse_grid, run_scan
from toric_dlocc.validation import SUITES, run_suite


def read_csv(text):
    lines = text.strip().splitlines()
    return lines[0].split(","), lines[1:]


def test_parse_grid():
    assert parse_grid("0.1, 0.2,0.5") == (0.1, 0.2, 0.5)
    assert parse_grid("linspace:0:1:3") == (0.0, 0.5, 1.0)
    with pytest.raises(ConfigError):
        parse_grid("linspace:0:1")


def test_config_text():
    cfg = config_from_mapping(parse_config_text("model = cc  # analytic\nL = 2\n\nlam = 0.1,0.2,0.3\n"))
    assert cfg.model == "cc" and cfg.L == 2 and cfg.lam == (0.1, 0.2, 0.3)
    with pytest.raises(ConfigError):
        parse_config_text("model cc")
    with pytest.raises(ConfigError):
        config_from_mapping({"model": "cc", "colour": "red"})
    with pytest.raises(ConfigError):
        config_from_mapping({"L": "2"})


@pytest.mark.parametrize("kw", [dict(model="nope"), dict(model="cc", lam=(0.3, 0.1)),
                                dict(model="cc", alphas=(-1.0, 1.0)), dict(model="cc", threads=0),
                                dict(model="v3-ed", lam=(0.1, 0.2), lam_z=(0.1,))])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ScanConfig(**kw)


def test_cc_zero_column_is_flat():
    cfg = ScanConfig(model="cc", L=2, bipartition="plaquette:0", lam=(0.0, 0.1, 0.2))
    res = run_scan(cfg)
    lat = TorusLattice(2)
    spec = subgroup_spec(lat, parse_bipartition(lat, "plaquette:0"))
    flat = math.log(spec.order_g / (spec.order_ga * spec.order_gb))
    assert np.allclose(res.surface.values[0], flat, atol=1e-12)


def test_thin_requires_plaquette():
    with pytest.raises(ConfigError):
        run_scan(ScanConfig(model="rowfield-thin", L=3, bipartition="twostar:4", lam=(0.1, 0.2, 0.3)))


def test_thin_scan_shape():
    res = run_scan(ScanConfig(model="rowfield-thin", bipartition="plaquette:0", lam=tuple(np.linspace(0.1, 2.0, 12))))
    # every index decreases as the correlator grows
    assert np.all(res.signs.signs <= 0)


def test_bulk_scan_has_gap_column():
    res = run_scan(ScanConfig(model="rowfield-bulk", L=4, bipartition="twostar:5", lam=(0.2, 0.4, 1.5),
                              chain_length=16))
    assert res.columns[-1] == "inv_gap"
    assert np.all(res.extra["inv_gap"] > 0)


def test_scan_writes_csv(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["scan", "model=cc", "L=2", "lam=0.1,0.2,0.3", "alphas=0.5,2", "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out.read_text())
    assert tuple(header) == CSV_COLUMNS
    assert len(rows) == 6


def test_scan_from_config_file(tmp_path):
    conf = tmp_path / "s.conf"
    conf.write_text("model = cc\nL = 2\nbipartition = twostar:0\nlam = linspace:0.1:0.5:5\n")
    out1, out2 = tmp_path / "1.csv", tmp_path / "2.csv"
    assert main(["scan", str(conf), "--out", str(out1)]) == EXIT_OK
    assert main(["scan", str(conf), "--out", str(out2), "--threads", "2"]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_rerun_byte_identical(tmp_path):
    args = ["scan", "model=rowfield-thin", "lam=0.2,0.6,1.4", "chain_length=32"]
    a, b = tmp_path / "a", tmp_path / "b"
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(capsys):
    assert main(["scan", "model=cc", "L=5", "lam=0.1,0.2,0.3"]) == EXIT_CAPACITY
    assert main(["scan", "model=bogus"]) == EXIT_CONFIG
    assert main(["scan", "model=cc", "L=2", "bipartition=plaquette:99"]) == EXIT_CONFIG
    assert main(["scan", "model=cc", "L=2", "lam=0.3,0.2"]) == EXIT_CONFIG
    with pytest.raises(SystemExit):
        main(["validate", "unknown-suite"])


def test_validate_failure_exit(capsys):
    assert main(["validate", "pfaffian", "--tol", "0"]) == EXIT_VALIDATION


def test_spectrum_dump(capsys):
    assert main(["spectrum", "model=rowfield-thin", "lam=0.5,1.0", "--index", "1"]) == EXIT_OK
    vals = [float(x) for x in capsys.readouterr().out.split()]
    assert len(vals) == 8 and sum(vals) == pytest.approx(1.0)


def test_figdata_fig4(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    assert main(["figdata", "fig4", "lam=linspace:0.1:2.0:6", "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out.read_text())
    assert len(rows) == 6 * 12


def test_presets_cover_figures():
    assert sorted(FIGURE_PRESETS) == ["fig4", "fig5", "fig7", "fig8"]


@pytest.mark.parametrize("suite", SUITES)
def test_validation_suites_pass(suite):
    rep = run_suite(suite)
    assert rep.passed, rep.render()
    assert rep.render() == run_suite(suite).render()
    assert rep.render().startswith(f"# suite: {suite}  seed: 1234")


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "toric_dlocc", "validate", "majorization"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "summary:" in r.stdout
