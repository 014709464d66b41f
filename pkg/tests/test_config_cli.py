"""Config schema, round-tripping, and the command-line surface."""

import contextlib
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from coniso import config, cone, weight
from coniso.cli import main
from coniso.config import ConfigError

QUADRANT_XY = """\
[cone]
kind = "orthant"
n = 2
mask = [1, 2]

[weight]
kind = "monomial"
A = [1.0, 1.0]

[domain]
kind = "ball"
rho = 1.0

[grid]
N = 96
"""


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_round_trip_parse_serialize_parse():
    cfg = config.loads(QUADRANT_XY)
    again = config.loads(config.serialize(cfg))
    assert again == cfg


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        config.loads(QUADRANT_XY + '\n[extras]\nfoo = 1\n')


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        config.loads(QUADRANT_XY.replace('n = 2', 'n = 2\nbogus = 3'))


def test_type_mismatch_rejected():
    with pytest.raises(ConfigError):
        config.loads(QUADRANT_XY.replace('N = 96', 'N = "many"'))
    with pytest.raises(ConfigError):
        # bools are ints in Python; the schema must still tell them apart
        config.loads(QUADRANT_XY.replace('N = 96', 'N = true'))


def test_missing_required_key_rejected():
    with pytest.raises(ConfigError):
        config.loads(QUADRANT_XY.replace('kind = "orthant"\n', ''))


def test_build_cone_variants():
    cfg = config.loads('[cone]\nkind = "sector"\nbeta = 2.0\n')
    assert cfg.build_cone().beta == 2.0
    cfg = config.loads('[cone]\nkind = "orthant"\nn = 2\n')
    # omitted mask constrains every axis
    assert cfg.build_cone().mask == frozenset({1, 2})
    cfg = config.loads('[cone]\nkind = "orthant"\nn = 3\nmask = [2]\n')
    assert cfg.build_cone().kind == "halfspace"
    with pytest.raises(ConfigError):
        config.loads('[cone]\nkind = "sector"\n').build_cone()


def test_build_weight_variants():
    base = '[cone]\nkind = "orthant"\nn = 2\n\n[weight]\n'
    assert config.loads(base + 'kind = "constant"\n').build_weight().degree == 0.0
    w = config.loads(base + 'kind = "monomial"\nA = [1.0, 2.0]\n').build_weight()
    assert w.exponents == (1.0, 2.0)
    w = config.loads(base + 'kind = "radial"\nalpha = 1.5\n').build_weight()
    assert w.kind == weight.RADIAL_POWER and w.power == 1.5
    with pytest.raises(ConfigError):
        config.loads(base + 'kind = "gaussian"\n').build_weight()


def test_build_domain_profile_file(tmp_path):
    prof = tmp_path / "prof.txt"
    cfg = config.loads(QUADRANT_XY)
    grid = cone.cap_quadrature(cfg.build_cone(), 16)
    np.savetxt(prof, np.full(grid.nodes.shape[0], 1.25))
    text = QUADRANT_XY.replace(
        'kind = "ball"\nrho = 1.0', f'kind = "profile-file"\npath = "{prof}"'
    )
    dom = config.loads(text).build_domain(grid)
    assert np.allclose(dom.radii, 1.25)


def run_cli(*argv):
    return main(list(argv))


def test_measure_worked_case(tmp_path):
    out = tmp_path / "measure.json"
    csv = tmp_path / "measure.csv"
    text = QUADRANT_XY + f'\n[output]\njson = "{out}"\ncsv = "{csv}"\nfigures = false\n'
    code = run_cli("measure", "--config", write_config(tmp_path, text))
    assert code == 0
    data = json.loads(out.read_text())
    assert set(data) == {"P", "m", "D", "Q", "Q_ball", "deficit", "N",
                         "violation", "violation_expected"}
    assert data["P"] == pytest.approx(0.5, rel=1e-10)
    assert data["m"] == pytest.approx(0.125, rel=1e-10)
    assert data["Q"] == pytest.approx(2.0 ** 1.25, rel=1e-10)
    assert data["N"] == 96
    assert data["violation"] is False
    header, row = csv.read_text().strip().splitlines()
    assert header == "N,P,m,Q,deficit"
    assert row.startswith("96,0.5,0.125,")


def test_measure_renders_figure_by_default(tmp_path):
    out = tmp_path / "m.json"
    text = QUADRANT_XY + f'\n[output]\njson = "{out}"\n'
    assert run_cli("measure", "--config", write_config(tmp_path, text)) == 0
    png = tmp_path / "m_domain.png"
    assert png.exists() and png.stat().st_size > 0


def test_check_weight_radial_reports_witness(tmp_path):
    text = """\
[cone]
kind = "sector"
beta = 2.5

[weight]
kind = "radial"
alpha = 1.0

[domain]
kind = "ball"
"""
    out = tmp_path / "gate.json"
    text += f'\n[output]\njson = "{out}"\nfigures = false\n'
    # a failed gate is a finding, not an error: exit 0
    assert run_cli("check-weight", "--config", write_config(tmp_path, text)) == 0
    data = json.loads(out.read_text())
    assert data["concavity"] == "fail"
    assert data["min_gap"] < 0.0
    assert len(data["witness"]["x"]) == 2
    assert len(data["witness"]["p"]) == 2


def test_optimize_dump_reloads_as_profile(tmp_path):
    dump = tmp_path / "profile.txt"
    out = tmp_path / "opt.json"
    text = QUADRANT_XY.replace("N = 96", "N = 48") + f"""
[optimize]
modes = 3
starts = 2
max_iter = 400

[output]
json = "{out}"
dump_field = "{dump}"
figures = false
"""
    assert run_cli("optimize", "--config", write_config(tmp_path, text)) == 0
    data = json.loads(out.read_text())
    assert data["deficit"] <= 1e-4

    reread = QUADRANT_XY.replace("N = 96", "N = 48").replace(
        'kind = "ball"\nrho = 1.0', f'kind = "profile-file"\npath = "{dump}"'
    )
    out2 = tmp_path / "re.json"
    reread += f'\n[output]\njson = "{out2}"\nfigures = false\n'
    assert run_cli("measure", "--config", write_config(tmp_path, reread, "re.toml")) == 0
    again = json.loads(out2.read_text())
    assert again["Q"] == pytest.approx(data["Q"], rel=1e-9)


def test_verify_abp_pass_and_violation(tmp_path):
    ok_text = """\
[cone]
kind = "orthant"
n = 2
mask = [1, 2]

[weight]
kind = "monomial"
A = [1.0, 1.0]

[domain]
kind = "disk"
center = [0.9, 1.1]
rho = 0.45

[grid]
N = 48
"""
    out = tmp_path / "abp.json"
    ok_text += f'\n[output]\njson = "{out}"\nfigures = false\n'
    assert run_cli("verify-abp", "--config", write_config(tmp_path, ok_text)) == 0
    data = json.loads(out.read_text())
    assert data["pass"] is True
    assert data["broken"] == []
    assert data["b_consistency"] <= 0.01

    bad_text = """\
[cone]
kind = "sector"
beta = 2.9

[weight]
kind = "radial"
alpha = 1.0

[domain]
kind = "disk"
center = [0.06627652315205164, 0.5459921450706737]
rho = 0.5

[grid]
N = 96
"""
    out2 = tmp_path / "bad.json"
    bad_text += f'\n[output]\njson = "{out2}"\nfigures = false\n'
    code = run_cli("verify-abp", "--config", write_config(tmp_path, bad_text, "bad.toml"))
    assert code == 2
    data = json.loads(out2.read_text())
    assert data["pass"] is False
    assert data["broken"] == ["pointwise_bound"]
    assert data["violation_expected"] is True


def test_verify_abp_field_dump(tmp_path):
    text = """\
[cone]
kind = "orthant"
n = 2
mask = [1, 2]

[weight]
kind = "monomial"
A = [1.0, 1.0]

[domain]
kind = "disk"
center = [0.9, 1.1]
rho = 0.45

[grid]
N = 32
"""
    out = tmp_path / "abp.json"
    dump = tmp_path / "field.csv"
    text += f'\n[output]\njson = "{out}"\ndump_field = "{dump}"\nfigures = false\n'
    assert run_cli("verify-abp", "--config", write_config(tmp_path, text)) == 0
    lines = dump.read_text().strip().splitlines()
    assert lines[0] == "x,y,u,ux,uy"
    assert len(lines) > 100


def test_incompatible_pair_is_config_error(tmp_path):
    text = QUADRANT_XY.replace('kind = "orthant"\nn = 2\nmask = [1, 2]',
                               'kind = "sector"\nbeta = 2.0')
    err = io.StringIO()
    with contextlib.redirect_stderr(err):
        code = run_cli("measure", "--config", write_config(tmp_path, text))
    assert code == 1
    assert "not positive" in err.getvalue()


def test_missing_config_file_is_error():
    err = io.StringIO()
    with contextlib.redirect_stderr(err):
        code = main(["measure", "--config", "/nonexistent/nope.toml"])
    assert code == 1
    assert "coniso: error:" in err.getvalue()


def test_usage_errors_exit_one():
    # argparse defaults to 2, which would collide with the violation code
    proc = subprocess.run(
        [sys.executable, "-m", "coniso.cli"], capture_output=True, text=True
    )
    assert proc.returncode == 1
    proc = subprocess.run(
        [sys.executable, "-m", "coniso.cli", "measure"], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert "error" in proc.stderr


def test_error_messages_name_the_offender(tmp_path):
    path = write_config(tmp_path, QUADRANT_XY.replace("n = 2", "n = 2\nbogus = 3"))
    proc = subprocess.run(
        [sys.executable, "-m", "coniso.cli", "measure", "--config", path],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert "coniso: error:" in proc.stderr
    assert "bogus" in proc.stderr


def test_scan_angle_cli_writes_rows(tmp_path):
    out = tmp_path / "scan.json"
    csv = tmp_path / "scan.csv"
    cfg = tmp_path / "scan.toml"
    cfg.write_text(f'[output]\njson = "{out}"\ncsv = "{csv}"\nfigures = false\n')
    code = run_cli(
        "scan-angle", "--config", str(cfg), "--alpha", "1.0",
        "--beta-min", "2.0", "--beta-max", "2.6", "--steps", "3",
    )
    # the wide end beats the ball, which the radial gate predicts
    assert code == 2
    data = json.loads(out.read_text())
    assert data["violation_expected"] is True
    assert data["bracket"] is not None
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "beta,deficit_opt,c2_min,class"
    assert len(lines) == 4
