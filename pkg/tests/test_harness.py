import copy
import csv
import json

import numpy as np
import pytest

from yflow import harness
from yflow.errors import ConfigurationError, NumericalError
from yflow.expression import parse_expression
from yflow.harness import (
    CSV_HEADER,
    CheckRecord,
    VerificationReport,
    emit_report,
    load_config,
    read_report,
    run_scenario,
    validate_config,
    write_outputs,
)

RIGIDITY = {
    "name": "rigidity",
    "m": 3,
    "grid": {"r_max": 8.0, "n": 160},
    "time": {"T": 0.2, "dt": 0.01, "output_stamps": [0.0, 0.1, 0.2]},
    "initial": {"kind": "constant", "value": 1.0},
    "checks": [{"id": "rigidity", "tolerance": 5e-3}, {"id": "positivity", "tolerance": 0.0}],
}

EXHAUSTION = {
    "name": "exhaust",
    "m": 3,
    "grid": {"r_max": 8.0, "n": 160},
    "time": {"T": 0.2, "dt": 0.01},
    "initial": {"kind": "euclidean"},
    "exhaustion": {"k_list": [6, 7, 8], "r_obs": 3},
    "checks": [
        {"id": "theorem1", "tolerance": 1e-2},
        {"id": "exhaustion_cauchy", "tolerance": 0.0},
    ],
}


def edited(base, path, value):
    doc = copy.deepcopy(base)
    node = doc
    keys = path.split(".")
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node[k]
    last = keys[-1]
    if value is KeyError:
        del node[last]
    elif isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value
    return doc


class TestValidation:
    def test_valid(self):
        cfg = validate_config(RIGIDITY)
        assert cfg.grid.h == pytest.approx(0.05)
        assert not cfg.is_exhaustion
        assert cfg.stamps == [0.0, 0.1, 0.2]

    def test_default_stamps(self):
        cfg = validate_config(edited(RIGIDITY, "time.output_stamps", KeyError))
        assert len(cfg.stamps) == 11 and cfg.stamps[-1] == 0.2

    @pytest.mark.parametrize(
        "path,value,field",
        [
            ("m", 2, "m"),
            ("m", 3.5, "m"),
            ("name", "", "name"),
            ("grid.n", 4, "grid"),
            ("grid.r_max", -1.0, "grid.r_max"),
            ("time.dt", 0.0, "time.dt"),
            ("time.T", KeyError, "time.T"),
            ("time.output_stamps", [0.0, 0.3], "time.output_stamps"),
            ("initial.kind", "gaussian", "initial.kind"),
            ("initial.value", -1.0, "initial.value"),
            ("checks.0.id", "nope", "checks[0].id"),
            ("checks.0.tolerance", -1.0, "checks[0].tolerance"),
            ("grid.r_max", 2.0, "grid.r_max"),
        ],
    )
    def test_field_paths(self, path, value, field):
        with pytest.raises(ConfigurationError) as info:
            validate_config(edited(RIGIDITY, path, value))
        assert str(info.value).startswith(field)

    def test_unknown_field(self):
        doc = dict(RIGIDITY, extra=1)
        with pytest.raises(ConfigurationError, match="extra"):
            validate_config(doc)

    def test_exhaustion_window(self):
        with pytest.raises(ConfigurationError, match="exhaustion.k_list"):
            validate_config(edited(EXHAUSTION, "exhaustion.r_obs", 4))

    def test_exhaustion_beyond_grid(self):
        with pytest.raises(ConfigurationError, match=r"exhaustion.k_list\[2\]"):
            validate_config(edited(EXHAUSTION, "exhaustion.k_list", [6, 8, 10]))

    def test_exhaustion_only_check(self):
        doc = edited(RIGIDITY, "checks", [{"id": "exhaustion_cauchy", "tolerance": 0.0}])
        with pytest.raises(ConfigurationError, match=r"checks\[0\].id"):
            validate_config(doc)

    def test_check_param(self):
        doc = edited(RIGIDITY, "checks", [{"id": "lemma5", "tolerance": 1.0, "r0": 0.5}])
        with pytest.raises(ConfigurationError, match=r"checks\[0\].r0"):
            validate_config(doc)
        doc = edited(RIGIDITY, "checks", [{"id": "lemma1", "tolerance": 1.0, "r0": 4}])
        with pytest.raises(ConfigurationError, match=r"checks\[0\].r0"):
            validate_config(doc)

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigurationError):
            load_config(p)

    def test_expression_initial(self):
        doc = edited(RIGIDITY, "initial", {"kind": "expression", "expr": "1 + exp(-r^2)"})
        u = validate_config(doc).initial_field()
        np.testing.assert_allclose(u.values, 1 + np.exp(-u.r**2))

    def test_expression_nonpositive(self):
        doc = edited(RIGIDITY, "initial", {"kind": "expression", "expr": "1 - r"})
        with pytest.raises(ConfigurationError, match="initial.expr"):
            validate_config(doc)


class TestExpression:
    def test_evaluate(self):
        r = np.linspace(0, 2, 5)
        f = parse_expression("2*sech(r/2)^4 + sqrt(r) - pi*tanh(r) + sinh(r)*cosh(r) - e")
        ref = 2 / np.cosh(r / 2) ** 4 + np.sqrt(r) - np.pi * np.tanh(r) + np.sinh(r) * np.cosh(r) - np.e
        np.testing.assert_allclose(f(r), ref)

    def test_constant_broadcast(self):
        assert np.all(parse_expression("-3")(np.zeros(4)) == -3.0)

    @pytest.mark.parametrize(
        "text", ["__import__('os')", "r.real", "x + 1", "log(r)", "r if r else 1", "1 +", "[r]"]
    )
    def test_rejected(self, text):
        with pytest.raises(ConfigurationError):
            parse_expression(text)


class TestRun:
    def test_rigidity_pass(self):
        result, report = run_scenario(RIGIDITY)
        assert report.status == "pass"
        assert [c.id for c in report.checks] == ["rigidity", "positivity"]
        assert report.checks[0].violation < 1e-10
        np.testing.assert_allclose(result.times[-1], 0.2)

    def test_empty_checks(self):
        result, report = run_scenario(edited(RIGIDITY, "checks", []))
        assert report.status == "pass" and report.checks == []

    def test_failing_check(self):
        doc = edited(RIGIDITY, "initial", {"kind": "euclidean"})
        _, report = run_scenario(doc)
        assert report.status == "fail"
        rec = report.checks[0]
        assert not rec.passed and rec.anchor == "g(t) = (m(m-1)t + 1) g_H"

    def test_exhaustion(self):
        result, report = run_scenario(EXHAUSTION)
        assert report.status == "pass", report.to_dict()
        d = report.solver["sup_differences"]
        assert len(d) == 2 and d[1] < d[0]

    def test_fatal_solver_error(self, monkeypatch):
        def boom(*args, **kwargs):
            raise NumericalError("singular system")

        monkeypatch.setattr(harness, "solve_dirichlet", boom)
        result, report = run_scenario(RIGIDITY)
        assert result is None
        assert report.status == "fail"
        assert "singular system" in report.error


class TestOutputs:
    def test_csv_layout(self, tmp_path):
        cfg = validate_config(RIGIDITY)
        result, report = run_scenario(cfg)
        paths = write_outputs(cfg, result, report, tmp_path)
        assert [p.name for p in paths] == ["rigidity.csv", "rigidity.report.json"]
        with open(paths[0]) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == CSV_HEADER
        body = np.array(rows[1:], dtype=float)
        assert body.shape == (3 * 161, 5)
        t, r, u, U, R = body.T
        np.testing.assert_allclose(u, 6 * t + 1, rtol=1e-12)
        np.testing.assert_allclose(U, u**0.25, rtol=1e-12)
        np.testing.assert_allclose(R, -6 / u, rtol=1e-12)
        assert np.array_equal(np.unique(t), [0.0, 0.1, 0.2])

    def test_rerun_byte_identical(self, tmp_path):
        cfg = validate_config(EXHAUSTION)
        for sub in ("a", "b"):
            result, report = run_scenario(cfg)
            write_outputs(cfg, result, report, tmp_path / sub)
        for name in ("exhaust.csv", "exhaust.report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_report_round_trip(self, tmp_path):
        rep = VerificationReport(
            "s", [CheckRecord("lemma1", "x", 1e-4, 5e-3), CheckRecord("lemma5", "y", 0.1, 5e-3)],
            {"m": 3}, wall_time=1.0,
        )
        back = read_report(emit_report(rep, tmp_path / "r.json"))
        assert back.to_dict() == rep.to_dict()
        data = json.loads((tmp_path / "r.json").read_text())
        assert data["status"] == "fail"
        assert [c["pass"] for c in data["checks"]] == [True, False]
        assert "wall_time" not in data

    def test_no_csv_on_fatal(self, tmp_path, monkeypatch):
        monkeypatch.setattr(harness, "solve_dirichlet", lambda *a, **k: (_ for _ in ()).throw(NumericalError("x")))
        cfg = validate_config(RIGIDITY)
        result, report = run_scenario(cfg)
        paths = write_outputs(cfg, result, report, tmp_path)
        assert [p.name for p in paths] == ["rigidity.report.json"]

    def test_nan_violation_fails(self):
        assert not CheckRecord("a", "b", float("nan"), 1.0).passed
