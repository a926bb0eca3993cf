import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from drplab.cli import main
from drplab.scenarios import BUILTINS, ConfigError, parse_config, resolve

# tracking-error sup-norms of the builtin Van der Pol run (seed 1), frozen from
# the implementation's own run as a regression baseline
VDP_BASELINE = [
    1.8227385973174621, 1.5895414709458808, 1.7545691793483922, 1.4968816054070364,
    1.7281034181468735, 1.5051449069936282, 1.7353244565229697, 1.5213665802358241,
    1.7411087887368077, 1.5282254892631228, 1.728515459879048,
]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    raw = path.read_bytes()
    lines = raw.decode().split("\n")
    assert lines[-1] == "" and b"\r" not in raw
    assert lines[0] == "k,norm"
    return [(int(k), float(v)) for k, v in (ln.split(",") for ln in lines[1:-1])]


def write_config(tmp_path, text, name="cfg.json"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestCertify:
    def test_vdp(self, tmp_path, capsys):
        code, out, _ = run(["certify", "--scenario", "vanderpol-ilc", "--grid", "200", "--out", str(tmp_path)],
                           capsys)
        assert code == 0
        assert "alpha: 0\n" in out and "verdict: certified_stable" in out
        report = json.loads((tmp_path / "vanderpol-ilc-certificate.json").read_text())
        assert report["alpha"] == 0.0 and report["verdict"] == "certified_stable"
        assert report["block_form_max_discrepancy"] <= 1e-8

    def test_unstable(self, tmp_path, capsys):
        code, out, _ = run(["certify", "--scenario", "linear-unstable", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "alpha: 1.2\n" in out and "verdict: not_certified" in out
        assert "argmax_time:" in out and "margin:" in out

    def test_malformed_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path, '{\n  "scenario": "linear-stable",\n  "passes": 5,,\n}\n')
        code, _, err = run(["certify", "--config", cfg], capsys)
        assert code == 2
        assert f"{cfg}:3:" in err and "invalid JSON" in err

    def test_unknown_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, '{\n  "scenario": "linear-stable",\n  "grid": {"T": 1.0, "M": 3}\n}\n')
        code, _, err = run(["certify", "--config", cfg], capsys)
        assert code == 2
        assert f"{cfg}:3: grid/M:" in err

    def test_bad_type(self, tmp_path, capsys):
        cfg = write_config(tmp_path, '{\n  "scenario": "linear-stable",\n  "passes": -3\n}\n')
        code, _, err = run(["simulate", "--config", cfg], capsys)
        assert code == 2 and f"{cfg}:3: passes:" in err

    def test_unknown_scenario(self, capsys):
        code, _, err = run(["certify", "--scenario", "nope"], capsys)
        assert code == 2 and "unknown scenario" in err

    def test_missing_source(self, capsys):
        assert run(["certify"], capsys)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(["certify", "--config", str(tmp_path / "absent.json")], capsys)[0] == 2


class TestSimulate:
    def test_geometric_column(self, tmp_path, capsys):
        code, _, _ = run(["simulate", "--scenario", "linear-stable", "--out", str(tmp_path)], capsys)
        assert code == 0
        rows = read_csv(tmp_path / "linear-stable.csv")
        assert rows == [(k, 0.5**k) for k in range(21)]

    def test_full_precision(self, tmp_path, capsys):
        run(["simulate", "--scenario", "lti-cubic", "--passes", "5", "--out", str(tmp_path)], capsys)
        line = (tmp_path / "lti-cubic.csv").read_text().split("\n")[3]
        value = line.split(",")[1]
        assert float(repr(float(value))) == float(value)
        assert len(value.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) >= 15

    def test_escape_gives_partial_csv(self, tmp_path, capsys):
        code, _, err = run(["simulate", "--scenario", "linear-unstable", "--passes", "100",
                            "--out", str(tmp_path)], capsys)
        assert code == 1 and "pass 76" in err
        rows = read_csv(tmp_path / "linear-unstable.csv")
        assert len(rows) == 76 and rows[-1][1] == pytest.approx(1.2**75)

    def test_row_count_and_svg(self, tmp_path, capsys):
        code, out, _ = run(["simulate", "--scenario", "linear-stable", "--passes", "7", "--svg",
                            "--out", str(tmp_path)], capsys)
        assert code == 0 and len(read_csv(tmp_path / "linear-stable.csv")) == 8
        root = ET.fromstring((tmp_path / "linear-stable.svg").read_text())
        assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 1

    def test_byte_identical(self, tmp_path, capsys):
        outs = []
        for d in ("a", "b"):
            run(["simulate", "--scenario", "lti-cubic", "--seed", "4", "--svg", "--out", str(tmp_path / d)],
                capsys)
            outs.append(((tmp_path / d / "lti-cubic.csv").read_bytes(),
                         (tmp_path / d / "lti-cubic.svg").read_bytes()))
        assert outs[0] == outs[1]

    def test_seed_changes_random_boundary(self, tmp_path, capsys):
        for s in ("1", "2"):
            run(["simulate", "--scenario", "lti-cubic", "--seed", s, "--out", str(tmp_path / s)], capsys)
        assert (tmp_path / "1" / "lti-cubic.csv").read_bytes() != (tmp_path / "2" / "lti-cubic.csv").read_bytes()

    def test_config_file_overrides(self, tmp_path, capsys):
        cfg = write_config(tmp_path, json.dumps({
            "scenario": "linear-stable", "passes": 4, "parameters": {"d": 0.25},
            "boundary": {"y0": {"kind": "constant", "value": [2.0]}},
            "output": {"dir": str(tmp_path / "o")},
        }))
        assert run(["simulate", "--config", cfg], capsys)[0] == 0
        assert read_csv(tmp_path / "o" / "linear-stable.csv") == [(k, 2.0 * 0.25**k) for k in range(5)]

    def test_wrong_kind(self, capsys):
        code, _, err = run(["ilc", "--scenario", "linear-stable"], capsys)
        assert code == 2 and "simulate scenario" in err

    def test_bad_override(self, capsys):
        assert run(["simulate", "--scenario", "linear-stable", "--passes", "0"], capsys)[0] == 2

    def test_boundary_dimension_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, json.dumps({
            "scenario": "linear-stable", "boundary": {"y0": {"kind": "constant", "value": [1.0, 2.0]}}}))
        assert run(["simulate", "--config", cfg], capsys)[0] == 2


class TestIlcAndPicard:
    def test_vdp_regression(self, tmp_path, capsys):
        code, out, _ = run(["ilc", "--scenario", "vanderpol-ilc", "--out", str(tmp_path)], capsys)
        assert code == 0
        rows = read_csv(tmp_path / "vanderpol-ilc.csv")
        assert [k for k, _ in rows] == list(range(11))
        for (_, v), ref in zip(rows, VDP_BASELINE):
            assert v == pytest.approx(ref, rel=1e-9)

    def test_picard_envelope(self, tmp_path, capsys):
        code, _, err = run(["picard", "--scenario", "picard-exp", "--out", str(tmp_path)], capsys)
        assert code == 0 and "warning" not in err
        for k, v in read_csv(tmp_path / "picard-exp.csv"):
            env = math.e / math.factorial(k + 1)
            assert env / 3 <= v <= 3 * env

    def test_picard_stall_warns(self, tmp_path, capsys):
        cfg = write_config(tmp_path, json.dumps({
            "scenario": "picard-exp", "grid": {"N": 200}, "passes": 30,
            "boundary": {"x0": {"kind": "constant", "value": [1.05]}}}))
        code, _, err = run(["picard", "--config", cfg, "--out", str(tmp_path)], capsys)
        assert code == 0 and "warning: per-pass contraction" in err

    def test_picard_vdp(self, tmp_path, capsys):
        assert run(["picard", "--scenario", "picard-vdp", "--out", str(tmp_path)], capsys)[0] == 0
        assert read_csv(tmp_path / "picard-vdp.csv")[-1][1] <= 1e-4


class TestClaims:
    def test_default(self, capsys):
        code, out, _ = run(["claims"], capsys)
        assert code == 0 and out.count("PASS") == 5

    def test_self_test_fails(self, capsys):
        code, out, _ = run(["claims", "--self-test"], capsys)
        assert code == 3 and "claim2_inverted" in out and "FAIL" in out

    def test_seed_reproducible(self, capsys):
        a = run(["claims", "--seed", "17"], capsys)[1]
        b = run(["claims", "--seed", "17"], capsys)[1]
        assert a == b and "seed: 17" in a


def test_every_builtin_resolves():
    for name in BUILTINS:
        cfg = resolve(parse_config(json.dumps({"scenario": name})))
        assert cfg["passes"] >= 1 and cfg["grid"]["N"] >= 1


def test_vdp_builtin_encoding():
    cfg = resolve(parse_config('{"scenario": "vanderpol-ilc"}'))
    assert cfg["grid"] == {"T": 2.0, "N": 2000} and cfg["passes"] == 10
    x0 = cfg["boundary"]["x0"]
    assert x0["lambda_range"] == [0.2, 0.95] and x0["norm_bound"] == 0.09 and x0["limit"] == [0.1, 0.0]


def test_parse_config_rejects_non_object():
    with pytest.raises(ConfigError):
        parse_config("[1, 2]")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "drplab", "certify", "--scenario", "linear-stable",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "alpha: 0.5" in proc.stdout
