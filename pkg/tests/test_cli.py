import io
import json
import warnings

import pytest

from pvfree import dump_grid_field, gaussian_test_field
from pvfree import cli
from pvfree.cli import execute_command
from pvfree.errors import ConvergenceError


def run(argv, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    outcome = execute_command(argv, stdout=out, stderr=err)
    return outcome, out.getvalue(), err.getvalue()


@pytest.fixture
def scheme_file(tmp_path):
    path = tmp_path / "scheme.json"
    outcome, _, _ = run(["scheme", "--m0", "1", "--m1", "2", "--m2", "3", "--json", str(path)])
    assert outcome.exit_code == 0
    return path


@pytest.fixture
def field_file(tmp_path):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f = gaussian_test_field(1.0, 1.0, 8, 6.0)
    path = tmp_path / "field.json"
    path.write_bytes(dump_grid_field(f))
    return path


def test_scheme_from_masses(scheme_file):
    doc = json.loads(scheme_file.read_text())
    assert doc["c"] == pytest.approx([1.0, -1.6, 0.6], abs=1e-15)
    assert doc["cutoff"] == pytest.approx(1.56811, abs=1e-5)
    assert "0.59999999999999998" in scheme_file.read_text()


def test_scheme_from_cutoff():
    outcome, out, _ = run(["scheme", "--m0", "1", "--cutoff", "10", "--ratio", "4"])
    assert outcome.exit_code == 0
    doc = json.loads(out)
    assert doc["cutoff"] == pytest.approx(10.0, rel=1e-10)
    assert doc["m"][2] == pytest.approx(4 * doc["m"][1], rel=1e-15)


def test_scheme_needs_masses_or_cutoff():
    outcome, _, err = run(["scheme", "--m0", "1", "--m1", "2"])
    assert outcome.exit_code == 2 and "usage" in err


def test_infeasible_cutoff_is_input_error():
    outcome, _, err = run(["scheme", "--m0", "1", "--cutoff", "0.5"])
    assert outcome.exit_code == 2 and err


def test_unknown_subcommand():
    outcome, out, err = run(["frobnicate"])
    assert outcome.exit_code == 2
    assert "usage:" in err and out == ""


def test_unknown_flag():
    outcome, _, err = run(["uehling", "--k", "1", "--bogus"])
    assert outcome.exit_code == 2 and "usage:" in err


def test_empty_argv():
    assert run([])[0].exit_code == 2


def test_help_exits_zero():
    outcome, out, _ = run(["--help"])
    assert outcome.exit_code == 0 and "verify" in out


def test_uehling_command():
    outcome, out, _ = run(["uehling", "--k", "1"])
    assert outcome.exit_code == 0
    assert float(out) == pytest.approx(0.0192353209028294, rel=1e-12)
    assert len(out.strip().replace("0.", "", 1)) >= 16


def test_verify_theta_prints_grid():
    outcome, out, _ = run(["verify", "--suite", "theta"])
    assert outcome.exit_code == 0
    assert sum(line.startswith("PASS") for line in out.splitlines()) == 9


@pytest.mark.parametrize("suite", ["pv", "bessel", "fermi", "quadrature", "uehling", "fields"])
def test_fast_suites_pass(suite):
    outcome, out, _ = run(["verify", "--suite", suite])
    assert outcome.exit_code == 0, out


def test_verify_failure_maps_to_exit_one(monkeypatch):
    from pvfree import checks

    def broken(spec):
        return [checks.CheckResult("pv", "forced", False, "detail")]

    monkeypatch.setitem(checks.SUITES, "pv", broken)
    outcome, out, _ = run(["verify", "--suite", "pv"])
    assert outcome.exit_code == 1
    failures = json.loads(out.strip().splitlines()[-1])["failures"]
    assert failures == [{"suite": "pv", "name": "forced", "detail": "detail"}]


def test_numeric_failure_maps_to_exit_three(monkeypatch, tmp_path):
    import pvfree.multipliers as mult

    def fail(*args, **kwargs):
        raise ConvergenceError("thermal integral did not converge at k=[1.0], beta=[2.0]")

    monkeypatch.setattr(mult, "build_table", fail)
    outcome, _, err = run(["table", "--beta", "2", "--k-min", "1", "--k-max", "1", "--samples", "1",
                           "--out", str(tmp_path / "t.csv")])
    assert outcome.exit_code == 3
    assert "k=[1.0], beta=[2.0]" in err


def test_table_and_csv(tmp_path, scheme_file):
    out_path = tmp_path / "t.csv"
    outcome, _, _ = run(["table", "--quantity", "m0", "--beta", "1", "--k-min", "0.5",
                         "--k-max", "8", "--samples", "5", "--log-k",
                         "--scheme-file", str(scheme_file), "--out", str(out_path)])
    assert outcome.exit_code == 0 and outcome.artifacts == [str(out_path)]
    rows = out_path.read_text().splitlines()
    assert rows[0] == "k,M0,MT,Gamma,Gamma_over_k2,err"
    assert len(rows) == 6
    assert float(rows[-1].split(",")[0]) == pytest.approx(8.0)


def test_table_rejects_bad_range(tmp_path):
    outcome, _, _ = run(["table", "--beta", "1", "--k-min", "0", "--k-max", "1", "--samples", "3",
                         "--log-k", "--out", str(tmp_path / "x.csv")])
    assert outcome.exit_code == 2


def test_table_deterministic_across_workers(tmp_path, monkeypatch, scheme_file):
    texts = []
    for n in ("1", "2"):
        monkeypatch.setenv("PVFREE_THREADS", n)
        path = tmp_path / f"t{n}.csv"
        assert run(["table", "--quantity", "all", "--beta", "0.9", "--k-min", "0", "--k-max", "6",
                    "--samples", "11", "--scheme-file", str(scheme_file),
                    "--out", str(path)])[0].exit_code == 0
        texts.append(path.read_bytes())
    assert texts[0] == texts[1]


def test_energy_deterministic_across_workers(tmp_path, monkeypatch, scheme_file, field_file):
    texts = []
    for n in ("1", "2"):
        monkeypatch.setenv("PVFREE_THREADS", n)
        path = tmp_path / f"e{n}.json"
        outcome, _, _ = run(["energy", "--field", str(field_file), "--beta", "1", "--tol", "1e-6",
                             "--scheme-file", str(scheme_file), "--kappa", "2",
                             "--out", str(path)])
        assert outcome.exit_code == 0
        texts.append(path.read_bytes())
    assert texts[0] == texts[1]
    doc = json.loads(texts[0])
    assert doc["kappa"] == 2
    assert doc["grid"]["n"] == [8, 8, 8]


def test_energy_bad_field_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 7}')
    outcome, _, err = run(["energy", "--field", str(bad), "--beta", "1",
                           "--out", str(tmp_path / "r.json")])
    assert outcome.exit_code == 2 and "version" in err


def test_main_returns_exit_code(capsys):
    assert cli.main(["uehling", "--k", "2"]) == 0
    assert cli.main(["nope"]) == 2
