import json

import numpy as np
import pytest

from ousheet.cli import EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main
from ousheet.errors import ConditionDViolation, DesignFileError, NonpositiveCoordinate
from ousheet.fisher import trend_information_equidistant
from ousheet.io import RunManifest, dump_design, load_design, parse_design, read_csv, save_design, write_csv
from ousheet.model import GridDesign, MonotoneDesign, ScatteredDesign


class TestDesignFiles:
    def test_monotone_round_trip_exact(self, tmp_path):
        des = MonotoneDesign((0.1, 0.7), np.array([0.1, 1 / 3, 0.2]), np.array([2 / 7, 0.05, 0.4]))
        path = tmp_path / "d.json"
        save_design(des, path)
        back = load_design(path)
        np.testing.assert_array_equal(back.d, des.d)
        np.testing.assert_array_equal(back.delta, des.delta)
        assert back.origin == des.origin

    def test_monotone_points(self):
        des = parse_design('{"type": "monotone", "points": [[1, 1], [2, 3], [4, 3.5]]}')
        assert des.d.tolist() == [2.0, 0.5] and des.delta.tolist() == [1.0, 2.0]

    def test_grid_forms(self):
        g = parse_design('{"type": "grid", "points": [[0, 0], [0, 1], [1, 0], [1, 1]]}')
        assert isinstance(g, GridDesign) and g.n == 4
        with pytest.raises(DesignFileError):
            parse_design('{"type": "grid", "points": [[0, 0], [0, 1], [1, 0]]}')
        g2 = parse_design(dump_design(GridDesign([0, 0.5], [1, 2, 3])))
        assert g2.t_coords.tolist() == [0, 0.5] and g2.s_coords.tolist() == [1, 2, 3]

    def test_scattered_round_trip(self):
        s = ScatteredDesign([(0.3, 0.1), (0.1, 0.9)])
        back = parse_design(dump_design(s))
        np.testing.assert_array_equal(back.points(), s.points())

    def test_malformed_json_reports_position(self):
        with pytest.raises(DesignFileError, match=r"line 2, column"):
            parse_design('{"type": "monotone",\n "points": [[1, 2],, ]}')

    @pytest.mark.parametrize(
        "text",
        [
            "[]",
            '{"points": [[1, 1]]}',
            '{"type": "hexagon"}',
            '{"type": "monotone", "points": [[1, "a"]]}',
            '{"type": "monotone", "origin": [1, 1], "d": [0.1]}',
            '{"type": "scattered", "points": [[1, 1], [1, 1]]}',
        ],
    )
    def test_schema_errors(self, text):
        with pytest.raises(DesignFileError):
            parse_design(text)

    def test_condition_d_in_file(self):
        with pytest.raises(ConditionDViolation):
            parse_design('{"type": "monotone", "points": [[1, 1], [2, 1]]}')

    def test_origin_positivity(self):
        text = '{"type": "monotone", "origin": [0, 0], "d": [0.1], "delta": [0.1]}'
        with pytest.raises(NonpositiveCoordinate):
            parse_design(text)
        assert parse_design(text, allow_nonpositive_origin=True).origin == (0.0, 0.0)


class TestCsv:
    def test_round_trip(self):
        m = RunManifest("test", {"alpha": 1.0}, seeds=[3])
        text = write_csv([[1, 0.1 + 0.2, "x"]], ["a", "b", "c"], manifest=m)
        comments, cols, rows = read_csv(text, from_text=True)
        assert cols == ["a", "b", "c"]
        assert rows[0][1] == 0.1 + 0.2
        assert any(c.startswith("command: test") for c in comments)
        assert "seeds: 3" in comments


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def design_file(tmp_path):
    path = tmp_path / "design.json"
    path.write_text(json.dumps({"type": "monotone", "points": [[1, 1], [1.5, 1.25], [2, 1.5], [2.5, 1.75]]}))
    return path


class TestCli:
    def test_info(self, capsys, design_file):
        code, out, _ = _run(capsys, "info", "--design", str(design_file))
        assert code == EXIT_OK
        comments, cols, rows = read_csv(out, from_text=True)
        assert cols[0] == "n" and rows[0][0] == 4
        assert rows[0][cols.index("m_theta")] == pytest.approx(trend_information_equidistant(4, 2.25), rel=1e-14)
        assert any(c.startswith("input ") and "sha256=" in c for c in comments)

    def test_info_grid_notice(self, capsys, tmp_path):
        path = tmp_path / "g.json"
        save_design(GridDesign([0, 1], [0, 1]), path)
        code, out, err = _run(capsys, "info", "--design", str(path))
        assert code == EXIT_OK and "oracle-only" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = _run(capsys, "info", "--design", str(tmp_path / "none.json"))
        assert code == EXIT_INPUT and err.startswith("error:")

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        code, _, err = _run(capsys, "info", "--design", str(path))
        assert code == EXIT_INPUT and "line 1" in err

    def test_condition_d_exit(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"type": "monotone", "points": [[1, 1], [1, 2]]}')
        code, _, err = _run(capsys, "info", "--design", str(path))
        assert code == EXIT_INPUT and "point 1" in err

    def test_bad_parameter(self, capsys, design_file):
        code, _, _ = _run(capsys, "info", "--design", str(design_file), "--alpha", "-1")
        assert code == EXIT_INPUT

    def test_optimal_trend_writes_design(self, capsys, tmp_path):
        out_design = tmp_path / "opt.json"
        code, out, _ = _run(capsys, "optimal-trend", "--n", "4", "--region", "0", "1", "0", "1",
                            "--out-design", str(out_design))
        assert code == EXIT_OK
        _, cols, rows = read_csv(out, from_text=True)
        assert rows[0][cols.index("m_theta")] == pytest.approx(trend_information_equidistant(4, 2.0), rel=1e-14)
        # the region corner (0, 0) becomes the origin, which needs the relaxed positivity check
        with pytest.raises(NonpositiveCoordinate):
            load_design(out_design)
        assert load_design(out_design, allow_nonpositive_origin=True).n == 4

    def test_surface(self, capsys):
        code, out, _ = _run(capsys, "surface", "--resolution", "2")
        _, cols, rows = read_csv(out, from_text=True)
        assert code == EXIT_OK and len(rows) == 4 and cols == ["r1", "r2", "m_theta", "phi", "psi"]

    def test_search(self, capsys, tmp_path):
        out_path = tmp_path / "search.csv"
        code, _, _ = _run(capsys, "search", "--objective", "phi", "--n", "3", "--region", "0", "1", "0", "1",
                          "--starts", "2", "--seed", "5", "--out", str(out_path))
        assert code == EXIT_OK
        comments, cols, rows = read_csv(out_path)
        assert "seeds: 5" in comments
        assert sum(r[0] == "run" for r in rows) == 2

    def test_seed_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("OU_DESIGN_SEED", "9")
        _, out, _ = _run(capsys, "verify", "--trials", "1")
        assert "# seeds: 9" in out
        monkeypatch.setenv("OU_DESIGN_SEED", "nine")
        code, _, _ = _run(capsys, "verify", "--trials", "1")
        assert code == EXIT_INPUT

    def test_simulate_reproducible(self, capsys, design_file):
        args = ("simulate", "--design", str(design_file), "--replications", "5", "--seed", "4")
        _, a, _ = _run(capsys, *args)
        _, b, _ = _run(capsys, *args)
        strip = lambda s: [ln for ln in s.splitlines() if not ln.startswith("# timestamp")]
        assert strip(a) == strip(b)
        _, cols, rows = read_csv(a, from_text=True)
        assert len(rows) == 5 and cols[:2] == ["replication", "theta_hat"]

    def test_fisher_check(self, capsys, design_file):
        code, out, _ = _run(capsys, "fisher-check", "--design", str(design_file), "--replications", "200")
        _, _, rows = read_csv(out, from_text=True)
        assert code == EXIT_OK and rows[0][0] == "theta_variance"

    def test_verify(self, capsys):
        code, out, _ = _run(capsys, "verify", "--trials", "5", "--n-max", "6")
        _, _, rows = read_csv(out, from_text=True)
        assert code == EXIT_OK and len(rows) == 4 and all(r[-1] == "pass" for r in rows)

    def test_verify_self_test_fails(self, capsys):
        code, out, _ = _run(capsys, "verify", "--trials", "5", "--n-max", "6", "--self-test")
        _, _, rows = read_csv(out, from_text=True)
        assert code == EXIT_VERIFY and all(r[-1] == "FAIL" for r in rows)

    def test_verify_zero_trials(self, capsys):
        code, out, _ = _run(capsys, "verify", "--trials", "0")
        _, cols, rows = read_csv(out, from_text=True)
        assert code == EXIT_OK and rows == [] and cols[0] == "suite"

    def test_tables(self, capsys):
        code, out, _ = _run(capsys, "tables")
        _, cols, rows = read_csv(out, from_text=True)
        status = cols.index("status")
        assert code == EXIT_OK
        assert all(r[status] in ("ok", "annotated", "unavailable") for r in rows)

    def test_pretty(self, capsys):
        code, out, _ = _run(capsys, "surface", "--resolution", "2", "--format", "pretty")
        assert code == EXIT_OK and out.splitlines()[0].split() == ["r1", "r2", "m_theta", "phi", "psi"]

    def test_argparse_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["search", "--objective", "volume", "--n", "3", "--region", "0", "1", "0", "1"])
        assert exc.value.code == 2
