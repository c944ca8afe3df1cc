import json

import pytest

from safd.cli import build_parser, main


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dim_json(capsys):
    code, out, err = run(capsys, "dim", "mcmullen", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["experiment"] == "dim"
    rows = dict(map(tuple, report["tables"][0]["rows"]))
    assert rows["lyapunov_dimension"] == pytest.approx(1.0)
    assert rows["chi_1"] == pytest.approx(1.0)
    assert "PASS" in err


def test_dim_reports_user_coordinates(capsys):
    code, out, _ = run(capsys, "dim", "swapped", "--json")
    assert code == 0
    tables = {t["name"]: t for t in json.loads(out)["tables"]}
    assert {row[0] for row in tables["full_dimension"]["rows"]} == {"1,2", "2,1"}


def test_dim_csv(capsys):
    code, out, _ = run(capsys, "dim", "cantor")
    assert code == 0
    assert out.startswith("# dimensions\nquantity,value\n")


def test_csv_files(capsys, tmp_path):
    code, _, _ = run(capsys, "dim", "mcmullen", "--csv", str(tmp_path / "out.csv"))
    assert code == 0
    assert (tmp_path / "out.dimensions.csv").is_file()
    assert (tmp_path / "out.full_dimension.csv").is_file()


def test_sep(capsys):
    code, out, _ = run(capsys, "sep", "overlap", "--max-n", "3", "--json")
    assert code == 0
    rows = json.loads(out)["tables"][0]["rows"]
    assert rows[1] == [2, 0, "1/4", "02=10"]


def test_sep_coordinates(capsys):
    code, out, err = run(capsys, "sep", "mcmullen", "--coord", "2", "--max-n", "4", "--json")
    assert code == 0
    rows = json.loads(out)["tables"][0]["rows"]
    assert rows[0][1] == "2/3"
    assert "coordinate overlaps are full overlaps" in err
    code, _, err = run(capsys, "sep", "mcmullen")
    assert code == 2
    assert err.startswith("safd: ")


def test_errors_map_to_exit_codes(capsys):
    assert run(capsys, "dim", "no-such-model")[0] == 2
    assert run(capsys, "sep", "overlap", "--max-n", "12", "--budget", "1000")[0] == 3
    assert run(capsys, "experiment", "superexp", "--seed", "-1")[0] == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["experiment", "nope"])
    assert info.value.code == 2


def test_workers_do_not_change_results(capsys):
    argv = ("estimate", "cantor", "--samples", "70000", "--levels", "4", "8", "--json")
    code, single, _ = run(capsys, *argv, "--workers", "1")
    assert code == 0
    code, threaded, _ = run(capsys, *argv, "--workers", "2")
    assert code == 0
    assert single == threaded


def test_seed_changes_results(capsys):
    argv = ("estimate", "cantor", "--samples", "5000", "--levels", "3", "6", "--json")
    _, first, _ = run(capsys, *argv, "--seed", "1")
    _, second, _ = run(capsys, *argv, "--seed", "2")
    assert json.loads(first)["seed"] == 1
    assert first != second


def test_experiment(capsys):
    code, out, _ = run(capsys, "experiment", "superexp", "--n", "2", "--seed", "4", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["seed"] == 4
    assert report["config"]["n"] == 2
    assert report["config"]["details"]["model"] == "example_ab"


def test_disint(capsys):
    code, out, _ = run(
        capsys, "disint", "swapped", "--n", "2", "--samples", "20000", "--json"
    )
    assert code in (0, 1)
    tables = {t["name"]: t for t in json.loads(out)["tables"]}
    assert set(tables) == {"gamma", "h_rw", "kappa", "convolution"}
    assert [row[2] for row in tables["gamma"]["rows"]] == ["00", "01 10", "11"]
    assert tables["h_rw"]["rows"][0] == [1, pytest.approx(0.25)]


@pytest.mark.parametrize(
    "argv",
    [
        ("experiment", "superexp", "--n", "2", "--seed", "4"),
        ("experiment", "entropy-increase", "--N", "2", "--n", "2", "--samples", "5000", "--seed", "4"),
    ],
)
def test_experiment_reports_do_not_depend_on_workers(capsys, argv):
    _, one, _ = run(capsys, *argv, "--json", "--workers", "1")
    _, again, _ = run(capsys, *argv, "--json", "--workers", "1")
    _, eight, _ = run(capsys, *argv, "--json", "--workers", "8")
    assert one == again == eight
    assert "workers" not in json.loads(one)["config"]
