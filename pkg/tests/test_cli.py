"""Command-line interface: exit codes, reports, benchmark CSVs."""
import csv
import json

from fdcop import cli, model


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGenerate:
    def test_tree_to_file(self, tmp_path, capsys):
        out = tmp_path / "p.json"
        code, _, err = run_cli(capsys, "generate", "tree", "-n", "6",
                               "--seed", "3", "-o", str(out))
        assert code == 0
        assert "variables=6" in err
        p = model.load(out)
        assert len(p.variables) == 6

    def test_graph_to_stdout(self, capsys):
        code, out, err = run_cli(capsys, "generate", "graph", "-n", "5",
                                 "--p1", "0.4", "--seed", "1")
        assert code == 0
        doc = json.loads(out)
        assert len(doc["variables"]) == 5

    def test_invalid_size(self, capsys):
        code, _, err = run_cli(capsys, "generate", "tree", "-n", "1")
        assert code == cli.EXIT_INVALID
        assert "invalid input" in err


class TestSolve:
    def test_report_fields(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        run_cli(capsys, "generate", "tree", "-n", "5", "--seed", "2",
                "-o", str(path))
        code, out, _ = run_cli(capsys, "solve", str(path), "--engine", "dpop")
        assert code == 0
        report = json.loads(out)
        assert report["engine"] == "dpop"
        assert report["stats"]["total_messages"] == 10
        assert report["stats"]["total_messages"] == report["bounds"]["predicted_messages"]
        assert set(report["assignment"]) == {f"x{i:03d}" for i in range(5)}

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "solve", "/nonexistent.json")
        assert code == cli.EXIT_INVALID

    def test_capacity_exit(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        run_cli(capsys, "generate", "graph", "-n", "14", "--p1", "0.6",
                "--seed", "0", "-o", str(path))
        code, _, err = run_cli(capsys, "solve", str(path), "--engine", "dpop",
                               "-d", "9")
        assert code == cli.EXIT_CAPACITY
        assert "capacity" in err

    def test_ef_on_tree(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        run_cli(capsys, "generate", "tree", "-n", "5", "--seed", "4",
                "--concave", "-o", str(path))
        code, out, _ = run_cli(capsys, "solve", str(path), "--engine", "ef-dpop")
        assert code == 0
        report = json.loads(out)
        assert report["utility"] >= report["bounds"]["error_bound_discrete"] * -1


class TestBench:
    def test_csv_shape_and_aggregates(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code, msg, _ = run_cli(capsys, "bench", "--kind", "tree", "-n", "5",
                               "--engines", "dpop,hcms", "--seeds", "3",
                               "-o", str(out))
        assert code == 0
        with out.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 * 3
        assert set(rows[0]) == set(cli.ROW_FIELDS)
        for row in rows:
            assert row["status"] == "ok"
            assert row["messages"] == "10" if row["engine"] == "dpop" else True
        agg = tmp_path / "bench-agg.csv"
        with agg.open() as fh:
            agg_rows = list(csv.DictReader(fh))
        assert len(agg_rows) == 2
        for row in agg_rows:
            assert row["completed"] == "3"

    def test_unknown_engine(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "bench", "--engines", "zen",
                               "-o", str(tmp_path / "x.csv"))
        assert code == cli.EXIT_INVALID


class TestVerify:
    def test_passes_on_small_tree(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        run_cli(capsys, "generate", "tree", "-n", "5", "--seed", "1",
                "--concave", "-o", str(path))
        code, out, _ = run_cli(capsys, "verify", str(path))
        assert code == 0
        assert "all" in out and "passed" in out

    def test_passes_on_small_graph(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        run_cli(capsys, "generate", "graph", "-n", "6", "--p1", "0.3",
                "--seed", "2", "--concave", "-o", str(path))
        code, out, _ = run_cli(capsys, "verify", str(path))
        assert code == 0

    def test_rejects_large_instance(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        run_cli(capsys, "generate", "tree", "-n", "9", "-o", str(path))
        code, _, err = run_cli(capsys, "verify", str(path))
        assert code == cli.EXIT_INVALID
