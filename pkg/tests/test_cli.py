import csv
import io
import json

import pytest

from journal_indicators.__main__ import build_parser, main
from journal_indicators.errors import (
    EXIT_DEGENERATE,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    EXIT_VALIDATION_FAILED,
)

pytestmark = pytest.mark.usefixtures("restore_logging")

CITATIONS = (
    "journal_id,paper_id,citations\n"
    "A,a1,12\nA,a2,4\nA,a3,0\nA,a4,7\nA,a5,3\n"
    "B,b1,0\nB,b2,0\nB,b3,0\n"
)

TWO_JOURNALS = (
    "id,name,n_papers,m,v,mu,sigma\n"
    "1,NEW ENGL J MED,670,65.91,107.38,3.32,1.48\n"
    "4,ANN INTERN MED,302,17.88,22.40,2.46,0.89\n"
)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def table(text):
    """Data rows of a csv result, skipping '# key: value' header lines."""
    body = "".join(line for line in io.StringIO(text) if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def test_help_lists_subcommands(capsys):
    code, out = run(capsys, "--help")
    assert code == EXIT_OK
    for name in ("summarize", "indicators", "compare", "rank", "validate", "plot-data"):
        assert name in out.out


def test_seed_required_for_validate():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["validate", "--summary", "x.csv"])


def test_summarize(capsys, write_file):
    code, out = run(capsys, "summarize", "--input", write_file("c.csv", CITATIONS))
    assert code == EXIT_OK
    rows = table(out.out)
    assert [row["id"] for row in rows] == ["A", "B"]
    b = rows[1]
    assert (b["n_papers"], b["m"], b["v"], b["mu"], b["sigma"]) == ("3", "1", "0", "0", "0")
    assert "mu_derived" in b and "sigma_derived" in b


def test_summarize_output_is_a_summary_file(capsys, write_file, tmp_path):
    target = tmp_path / "summary.csv"
    assert main(["summarize", "--input", write_file("c.csv", CITATIONS), "--output", str(target)]) == EXIT_OK
    code, out = run(capsys, "indicators", "--summary", str(target))
    assert code == EXIT_OK
    assert len(table(out.out)) == 2


def test_summarize_negative_count(capsys, write_file):
    code, out = run(capsys, "summarize", "--input", write_file("c.csv", CITATIONS + "B,b4,-2\n"))
    assert code == EXIT_INVARIANT
    assert out.out == ""


def test_summarize_parse_error(capsys, write_file):
    code, _ = run(capsys, "summarize", "--input", write_file("c.csv", CITATIONS + "B,b4,lots\n"))
    assert code == EXIT_PARSE


def test_indicators_medical(capsys, medical_path):
    code, out = run(capsys, "indicators", "--summary", medical_path)
    assert code == EXIT_OK
    rows = table(out.out)
    assert len(rows) == 30
    assert rows[0]["name"] == "NEW ENGL J MED"
    assert rows[0]["jif"] == "65.91"
    assert rows[0]["h_int"] == "113"


def test_indicators_json(capsys, medical_path):
    code, out = run(capsys, "indicators", "--summary", medical_path, "--format", "json")
    assert code == EXIT_OK
    rows = json.loads(out.out)
    assert rows[0]["id"] == "1"
    assert rows[0]["h_real"] == pytest.approx(113, abs=1)


def test_indicators_empty_summary(capsys, write_file):
    code, _ = run(capsys, "indicators", "--summary", write_file("s.csv", "id,name,n_papers,m,v\n"))
    assert code != EXIT_OK


def test_invalid_row_exit_code(capsys, write_file):
    code, _ = run(capsys, "indicators", "--summary", write_file("s.csv", "id,name,n_papers,m,v\nx,X,5,0.5,1\n"))
    assert code == EXIT_INVARIANT


def test_compare(capsys, write_file):
    code, out = run(capsys, "compare", "--summary", write_file("s.csv", TWO_JOURNALS), "--t", "1", "--r", "4")
    assert code == EXIT_OK
    row, = table(out.out)
    assert float(row["csi"]) == pytest.approx(0.691, abs=1e-3)
    assert row["kappa_status"] == "reached"


def test_compare_with_itself(capsys, medical_path):
    code, out = run(capsys, "compare", "--summary", medical_path, "--t", "2", "--r", "2")
    assert code == EXIT_OK
    row, = table(out.out)
    assert row["csi"] == "0.5"
    assert row["kappa_status"] == "unreachable"
    assert row["reachable"] == "false"
    assert row["kappa_t"] == ""


def test_compare_unknown_id(capsys, medical_path):
    code, _ = run(capsys, "compare", "--summary", medical_path, "--t", "1", "--r", "99")
    assert code == EXIT_USAGE


def test_compare_point_masses(capsys, write_file):
    summary = "id,name,n_papers,m,v,mu,sigma\na,A,10,3,0,1.0,0\nb,B,10,3,0,1.0,0\n"
    code, _ = run(capsys, "compare", "--summary", write_file("s.csv", summary), "--t", "a", "--r", "b")
    assert code == EXIT_DEGENERATE


def test_rank(capsys, medical_path):
    code, out = run(capsys, "rank", "--summary", medical_path, "--moments", "derived")
    assert code == EXIT_OK
    rows = table(out.out)
    assert len(rows) == 30
    assert rows[0]["id"] == "1"


def test_rank_single_journal(capsys, write_file):
    code, out = run(capsys, "rank", "--summary", write_file("s.csv", "id,name,n_papers,m,v\nx,X,40,3,2\n"))
    assert code == EXIT_OK
    row, = table(out.out)
    assert row["rank"] == "0.5"


def test_validate_deterministic(capsys, write_file):
    path = write_file("s.csv", TWO_JOURNALS)
    args = ["validate", "--summary", path, "--seed", "12", "--samples", "3000", "--trials", "800",
            "--tolerance", "0.5", "--format", "json"]
    first_code, first = run(capsys, *args)
    second_code, second = run(capsys, *args)
    assert first_code == second_code
    assert first.out == second.out
    assert json.loads(first.out)["header"]["seed"] == 12


def test_validate_zero_tolerance(capsys, write_file):
    code, out = run(capsys, "validate", "--summary", write_file("s.csv", TWO_JOURNALS), "--seed", "1",
                    "--samples", "2000", "--trials", "500", "--tolerance", "0")
    assert code == EXIT_VALIDATION_FAILED
    assert "# passed: false" in out.out


def test_plot_data_single_journal(capsys, write_file):
    citations = "journal_id,paper_id,citations\nA,a1,5\nA,a2,4\nA,a3,3\nA,a4,2\nA,a5,1\n"
    code, out = run(capsys, "plot-data", "--figure", "h", "--citations", write_file("c.csv", citations),
                    "--seed", "0")
    assert code == EXIT_OK
    row, = table(out.out)
    assert row["subject"] == "A"
    assert row["x"] == "3"


def test_plot_data_csi_synthetic_medical(capsys, medical_path):
    code, out = run(capsys, "plot-data", "--figure", "csi", "--summary", medical_path, "--seed", "7",
                    "--moments", "derived", "--samples", "20000")
    assert code == EXIT_OK
    assert "# points: 435" in out.out
    assert "# identity_min: " in out.out
    rows = table(out.out)
    assert len(rows) == 435
    assert max(abs(float(row["x"]) - float(row["y"])) for row in rows) < 0.03


def test_plot_data_kappa_keeps_both_components(capsys, write_file):
    code, out = run(capsys, "plot-data", "--figure", "kappa", "--summary", write_file("s.csv", TWO_JOURNALS),
                    "--seed", "3", "--samples", "20000", "--trials", "4000")
    assert code == EXIT_OK
    rows = table(out.out)
    assert [(row["subject"], row["component"]) for row in rows] == [("1|4", "kappa_t"), ("1|4", "kappa_r")]
    assert int(float(rows[0]["y"])) > int(float(rows[1]["y"]))


def test_plot_data_unknown_figure(capsys, medical_path):
    code, _ = run(capsys, "plot-data", "--figure", "impact", "--summary", medical_path, "--seed", "0")
    assert code == EXIT_USAGE


def test_plot_data_needs_an_input(capsys):
    code, _ = run(capsys, "plot-data", "--figure", "h", "--seed", "0")
    assert code == EXIT_USAGE


def test_settings_override(capsys, medical_path, tmp_path):
    settings = tmp_path / "settings.json"
    settings.write_text(json.dumps({"output": {"format": "json"}}), encoding="utf-8")
    code, out = run(capsys, "--settings", str(settings), "rank", "--summary", medical_path)
    assert code == EXIT_OK
    assert json.loads(out.out)[0]["position"] == 1


def test_bad_settings(capsys, medical_path, tmp_path):
    code, _ = run(capsys, "--settings", str(tmp_path / "absent.json"), "rank", "--summary", medical_path)
    assert code == EXIT_USAGE
