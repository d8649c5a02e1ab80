import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgmagnetic import cli
from sgmagnetic.fileio import (
    DECIMATION_HEADER,
    LADDER_HEADER,
    SWEEP_HEADER,
    FieldSpecError,
    SvgScatter,
    fmt,
    format_field_spec,
    parse_field_spec,
    read_config,
    read_csv,
)
from sgmagnetic.forms import FieldSpec, graph_laplacian_matrix
from sgmagnetic.magnetic import counting_function

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# field specs


def test_parse_examples():
    assert parse_field_spec(".:1.0").terms == (("", 1.0),)
    spec = parse_field_spec(".:6.2831853072,01:3.14159")
    assert spec.terms == (("", 6.2831853072), ("01", 3.14159))
    assert parse_field_spec(" 2:-1e-3 , 10:.5 ").terms == (("2", -1e-3), ("10", 0.5))
    assert len(parse_field_spec("")) == 0


@pytest.mark.parametrize(
    "text, message, position",
    [
        (".:1,.:2", "duplicate hole", 4),
        ("3:1", "invalid word character", 0),
        ("01", "expected ':'", 2),
        (".:abc", "malformed beta", 2),
        (".:1;2", "unexpected", 3),
        (".:1,", "invalid word character", 4),
    ],
)
def test_parse_errors(text, message, position):
    with pytest.raises(FieldSpecError, match=message) as exc:
        parse_field_spec(text)
    assert exc.value.position == position
    assert f"at position {position}" in str(exc.value)


words = st.one_of(st.just(""), st.text("012", min_size=1, max_size=4))
betas = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=100)
@given(st.lists(st.tuples(words, betas), max_size=5, unique_by=lambda t: t[0]))
def test_roundtrip(terms):
    spec = FieldSpec(tuple(terms))
    assert parse_field_spec(format_field_spec(spec)) == spec


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(187.5) == "187.5"
    assert fmt(math.nan) == "nan"


# config


def test_read_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nlevel = 3\nbeta-steps = 5  # inline\n\n")
    assert read_config(p) == {"level": "3", "beta_steps": "5"}
    p.write_text("level 3\n")
    with pytest.raises(ValueError, match="key = value"):
        read_config(p)


def test_config_precedence(tmp_path, capsys):
    p = tmp_path / "run.cfg"
    p.write_text("level = 2\nbeta_steps = 3\ncutoff = 1e9\n")
    code, out, _ = run(["sweep", "--config", p, "--level", 3], capsys)
    assert code == 0
    rows = read_csv(out)
    assert len({r["beta"] for r in rows}) == 3
    assert len(rows) == 3 * 39  # level 3 from the flag, all eigenvalues kept


def test_config_errors(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("level = 9\n")
    code, _, err = run(["check", "--config", p], capsys)
    assert code == 2 and "level 9 outside 1..7" in err
    p.write_text("colour = red\n")
    code, _, err = run(["sweep", "--config", p], capsys)
    assert code == 2 and "unknown config key" in err
    code, _, err = run(["sweep", "--level", 8], capsys)
    assert code == 2
    code, _, err = run(["sweep", "--beta-steps", 0], capsys)
    assert code == 2 and "beta steps" in err
    code, _, err = run(["sweep", "--field", ".:1,.:2"], capsys)
    assert code == 2 and "duplicate hole" in err


# sweep


def test_sweep_csv_and_svg(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "s.csv", tmp_path / "s.svg"
    code, out, _ = run(
        ["sweep", "--level", 4, "--beta-steps", 9, "--cutoff", 160, "--out", csv_path, "--svg", svg_path], capsys
    )
    assert code == 0 and out == ""
    text = csv_path.read_text()
    assert text.splitlines()[0] == ",".join(SWEEP_HEADER)
    rows = read_csv(csv_path)
    assert all(float(r["lambda_renormalized"]) <= 160 for r in rows)
    root = ET.parse(svg_path).getroot()
    assert root.tag == SVG_NS + "svg" and root.get("version") == "1.1"
    circles = root.findall(f".//{SVG_NS}circle")
    assert len(circles) == len(rows)
    assert not root.findall(f".//{SVG_NS}polyline")
    # beta runs left to right, eigenvalue bottom to top
    r0 = [r for r in rows if r["index"] == "0"]
    assert float(r0[0]["beta"]) == 0.0 and float(r0[-1]["beta"]) == 2.0


def test_sweep_single_step_is_laplacian(capsys):
    code, out, _ = run(["sweep", "--level", 3, "--beta-steps", 1, "--cutoff", 1e9], capsys)
    assert code == 0
    rows = read_csv(out)
    assert {r["beta"] for r in rows} == {"0"}
    lap = np.linalg.eigvalsh(graph_laplacian_matrix(3, "dirichlet"))
    assert np.allclose([float(r["lambda_raw"]) for r in rows], lap, rtol=1e-11)


def test_sweep_is_byte_stable(tmp_path):
    paths = []
    for jobs in (1, 3, 1):
        p = tmp_path / f"s{len(paths)}.csv"
        assert cli.main(["sweep", "--level", "3", "--beta-steps", "7", "--jobs", str(jobs), "--out", str(p)]) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_sweep_reports_unwritable_path(tmp_path, capsys):
    bad = tmp_path / "missing" / "out.csv"
    code, _, err = run(["sweep", "--level", 2, "--beta-steps", 2, "--out", bad], capsys)
    assert code == 2 and str(bad) in err


def test_svg_validation():
    with pytest.raises(ValueError, match="outside"):
        SvgScatter([(3.0, 1.0)], (0, 2), (0, 10))
    with pytest.raises(ValueError, match="increasing"):
        SvgScatter([], (1, 1), (0, 1))
    text = SvgScatter([(0.5, 5.0), (1.0, 6.0)], (0, 2), (0, 10)).render()
    assert ET.fromstring(text.split("\n", 1)[1]).tag == SVG_NS + "svg"


# decimate


def test_decimate_matches_sweep_level6(capsys):
    code, out, _ = run(["decimate", "--level", 6, "--cutoff", 160], capsys)
    assert code == 0
    assert out.splitlines()[0] == ",".join(DECIMATION_HEADER)
    rows = read_csv(out)
    level = np.sort(np.concatenate([[float(r["lambda_level"])] * int(r["multiplicity"]) for r in rows]))
    limit = np.sort(np.concatenate([[float(r["lambda"])] * int(r["multiplicity"]) for r in rows]))
    code, out, _ = run(["sweep", "--level", 6, "--beta-steps", 1, "--cutoff", 160], capsys)
    graph = np.array([float(r["lambda_renormalized"]) for r in read_csv(out)])
    assert len(level) == len(graph) == counting_function(graph, 160)
    assert np.max(np.abs(level - graph) / graph) <= 1e-9
    # limit values sit above the level-6 values by at most about lambda_6 / 20
    assert np.all(limit >= graph - 1e-9) and np.max((limit - graph) / graph) <= 2e-4
    assert [r["series"] for r in rows][:1] == ["2-series"]
    assert rows[0]["branchword"] == "-----"


def test_decimate_empty_below_lowest(capsys):
    code, out, _ = run(["decimate", "--level", 4, "--cutoff", 10], capsys)
    assert code == 0 and out.strip() == ",".join(DECIMATION_HEADER)


def test_decimate_ordering(capsys):
    _, out, _ = run(["decimate", "--level", 4, "--cutoff", 3000], capsys)
    rows = read_csv(out)
    keys = [(float(r["lambda"]), int(r["series"][0])) for r in rows]
    assert keys == sorted(keys)
    # the cutoff applies to the limit column
    assert all(float(r["lambda"]) <= 3000 for r in rows)


@pytest.mark.parametrize("m, cutoff", [(5, 1000.0), (6, 160.0)])
def test_decimate_multiplicities_sum_to_count(m, cutoff, capsys):
    _, out, _ = run(["decimate", "--level", m, "--cutoff", cutoff], capsys)
    total = sum(int(r["multiplicity"]) for r in read_csv(out))
    graph = np.sort(1.5 * 5 ** m * np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet")))
    assert total == counting_function(graph, cutoff)


# check and ladder


def test_check_passes_and_negative_control(capsys):
    code, out, _ = run(["check", "--level", 2], capsys)
    assert code == 0, out
    assert out.count("[PASS]") == 7 and "7/7 suites passed" in out
    code, out, _ = run(["check", "--level", 2, "--perturb-b-form"], capsys)
    assert code == 1
    failed = [line for line in out.splitlines() if line.startswith("[FAIL]")]
    assert len(failed) == 1 and "h_norm" in failed[0]


def test_ladder_csv(capsys):
    code, out, err = run(["ladder", "--level", 4, "--beta-steps", 3, "--cutoff", 60], capsys)
    assert code == 0 and "fitted scale" in err
    assert out.splitlines()[0] == ",".join(LADDER_HEADER)
    rows = read_csv(out)
    assert {r["k_or_sigma"] for r in rows} >= {"0", "1", "2"}
    for r in rows:
        if r["k_or_sigma"] != "sigma":
            assert float(r["rel_error"]) <= 5e-2


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "sgmagnetic", "decimate", "--level", "2", "--cutoff", "1e9"], capture_output=True, text=True)
    assert res.returncode == 0
    assert len(res.stdout.splitlines()) == 1 + 6
