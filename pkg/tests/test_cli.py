import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockdyn import cli
from fockdyn.config import ConfigError, InvalidParamsError, RunConfig, parse_config


def cfg(**params):
    return json.dumps({"params": params})


class TestConfig:
    def test_defaults(self):
        c = parse_config(cfg(a=0.5))
        assert (c.n_dim, c.n_max, c.seed) == (128, 50, 20240001)
        assert c.params.a == 0.5 and c.params.u0 == 1

    def test_complex_pairs(self):
        c = parse_config(cfg(a=[0, 1], b=[1, -1], u0=[0.5, 0]))
        assert c.params.a == 1j and c.params.b == 1 - 1j

    def test_syntax_error_has_line(self):
        with pytest.raises(ConfigError, match=r"line 2, column \d+"):
            parse_config('{"params":\n {"a": }}')

    @pytest.mark.parametrize(
        "text,field",
        [
            ('{"params": {"a": "x"}}', "params.a"),
            ('{"params": {"a": [1, 2, 3]}}', "params.a"),
            ('{"params": {"b": 1}}', "params.a"),
            ('{"params": {"a": 1, "q": 1}}', "params.q"),
            ('{"params": {"a": 1}, "n_dim": 1.5}', "n_dim"),
            ('{"params": {"a": 1}, "format": "xml"}', "format"),
            ('{"params": {"a": 1}, "grid": {"rho_values": [], "theta_values": [0]}}', "grid.rho_values"),
            ('{"params": {"a": 1}, "grid": {"rho_values": [1], "theta_values": [4]}}', "grid"),
            ('{"params": {"a": 1}, "extra": 1}', "<root>.extra"),
            ('[1, 2]', "<root>"),
        ],
    )
    def test_field_diagnostics(self, text, field):
        with pytest.raises(ConfigError, match=f"field '{field}"):
            parse_config(text)

    @pytest.mark.parametrize("params", [{"a": 0.5, "u0": 0}, {"a": 0.5, "p": 0.5}])
    def test_invalid_params(self, params):
        with pytest.raises(InvalidParamsError):
            parse_config(json.dumps({"params": params}))

    @settings(max_examples=60)
    @given(
        st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
        st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
        st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False),
        st.integers(2, 512),
        st.integers(0, 2**63),
        st.booleans(),
    )
    def test_round_trip(self, a, b, u0, n_dim, seed, with_grid):
        text = json.dumps(
            {
                "params": {"a": [a.real, a.imag], "b": [b.real, b.imag], "u0": [u0.real, u0.imag], "p": 2},
                "n_dim": n_dim,
                "seed": seed,
                **({"grid": {"rho_values": [0.1, 1 / 3], "theta_values": [0.0, math.pi]}} if with_grid else {}),
                "probe": {"f": {"alpha": [0.1, 0.2], "coeffs": [[1, 0]]}, "targets": [{"alpha": [0, 0], "coeffs": [[0, 0], [1, 0]]}]},
            }
        )
        c = parse_config(text)
        again = parse_config(c.to_json())
        assert again == c
        assert again.to_json() == c.to_json()


def run(command, text, **kw):
    return cli.run(command, text, **kw)


class TestCommands:
    def test_classify_identity(self):
        code, out, _ = run("classify", cfg(a=1))
        d = json.loads(out)
        assert code == 0 and d["ritt"]["value"] == "Yes" and d["spectrum"]["kind"] == "Singleton"
        assert set(d) >= {"bounded", "compact", "power_bounded", "supercyclic", "ritt", "unconditional_ritt", "spectrum", "m_constant", "norm_upper"}
        assert set(d["ritt"]) >= {"value", "reason"}

    def test_classify_not_power_bounded(self):
        code, out, _ = run("classify", cfg(a=[0.5, 0], u0=[2, 0]))
        assert code == 0 and json.loads(out)["power_bounded"] is False

    def test_classify_unbounded_reports_inf(self):
        code, out, _ = run("classify", cfg(a=1, b=1))
        d = json.loads(out)
        assert code == 0 and d["bounded"] is False and d["m_constant"] == "inf"

    def test_malformed(self):
        code, out, err = run("classify", "{not json")
        assert code == 2 and out == "" and "line 1" in err

    def test_zero_weight(self):
        assert run("classify", cfg(a=0.5, u0=0))[0] == 3

    def test_verify_unbounded(self):
        code, _, err = run("verify", cfg(a=1, b=1, c=0, u0=1))
        assert code == 4 and "c != -a conj(b)" in err

    def test_verify_rank_one(self):
        code, out, _ = run("verify", cfg(a=0, u0=-1), n_dim=32)
        d = json.loads(out)
        assert code == 0 and d["consistent"]
        assert d["ritt_scan"]["symbolic_verdict"] == "No" and d["ritt_scan"]["verdict_hint"] == "Diverging"
        assert set(d) >= {"ritt_scan", "kreiss_scan", "nz_sequence", "uncond_estimate", "probe", "inequalities"}
        assert "isometry" not in d

    def test_verify_stable_yes(self):
        code, out, _ = run("verify", cfg(a=0.5, u0=0.9), n_dim=64)
        d = json.loads(out)
        assert code == 0 and d["ritt_scan"]["stable"] is True

    def test_verify_isometry_section(self):
        code, out, _ = run("verify", cfg(a=1, b=1, c=-1, u0=math.exp(-0.5)), n_dim=48)
        d = json.loads(out)
        assert code == 0 and d["isometry"]["pass"]

    def test_verify_inconsistent(self, monkeypatch):
        # a scan that always looks divergent contradicts a Yes verdict
        real = cli.dl.ritt_functional_scan

        def fake(*args, **kw):
            r = real(*args, **kw)
            r.verdict_hint = "Diverging"
            return r

        monkeypatch.setattr(cli.dl, "ritt_functional_scan", fake)
        code, out, _ = run("verify", cfg(a=0.5, u0=0.9), n_dim=16)
        assert code == 1 and json.loads(out)["failed_sections"] == ["ritt_scan"]

    def test_verify_rejects_csv(self):
        assert run("verify", json.dumps({"params": {"a": 0.5}, "format": "csv"}))[0] == 2

    def test_matrix_csv(self):
        code, out, _ = run("matrix", json.dumps({"params": {"a": 0.5}, "n_dim": 3}))
        assert code == 0 and out.splitlines()[0] == "1+0j,0+0j,0+0j"

    def test_scan_identity(self):
        text = json.dumps({"params": {"a": 1}, "n_dim": 8})
        code, out, _ = run("scan", text)
        rows = out.splitlines()[1:]
        assert code == 0 and rows and all(float(r.split(",")[2]) == pytest.approx(1, abs=1e-12) for r in rows)

    def test_scan_json(self):
        text = json.dumps({"params": {"a": 0.5}, "n_dim": 8, "format": "json", "scan_kind": "kreiss",
                           "grid": {"rho_values": [0.5], "theta_values": [0, 1]}})
        code, out, _ = run("scan", text)
        d = json.loads(out)
        assert code == 0 and d["kind"] == "kreiss" and len(d["points"]) == 2

    def test_scan_unbounded(self):
        assert run("scan", cfg(a=2))[0] == 4

    def test_probe_constant_orbit(self):
        text = json.dumps({"params": {"a": 0.5}, "n_dim": 16, "n_max": 10,
                           "probe": {"f": {"alpha": 0, "coeffs": [1]}, "targets": [{"coeffs": [0, 1]}]}})
        code, out, _ = run("probe", text)
        assert code == 0 and out.splitlines()[1].split(",")[0] == "1"

    def test_overrides(self):
        code, out, _ = run("matrix", cfg(a=0.5), n_dim=4)
        assert len(out.splitlines()) == 4
        assert run("matrix", cfg(a=0.5), n_dim=1)[0] == 2


def test_determinism():
    text = cfg(a=0.5, b=1, c=0.2, u0=0.7)
    first = run("verify", text, n_dim=24)
    assert first == run("verify", text, n_dim=24)


def test_entry_point(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"params": {"a": [0.5, 0], "u0": [2, 0]}}))
    out = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "fockdyn", "classify", "--config", str(config), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == ""
    assert json.loads(out.read_text())["power_bounded"] is False
    proc = subprocess.run([sys.executable, "-m", "fockdyn", "classify", "--config", str(tmp_path / "missing.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_output_from_config(tmp_path):
    target = tmp_path / "m.csv"
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"params": {"a": 0.5}, "n_dim": 2, "output": str(target)}))
    assert cli.main(["matrix", "--config", str(config)]) == 0
    assert target.read_text().splitlines()[0] == "1+0j,0+0j"


def test_run_config_is_dataclass():
    assert isinstance(parse_config(cfg(a=0.5)), RunConfig)
