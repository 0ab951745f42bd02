import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from gdasp.cli import main

from conftest import CORPUS

OPERA = str(CORPUS / "opera.pl")


def scasp(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_opera_long_tree(capsys):
    code, out, _ = scasp(capsys, "--tree", "--long", OPERA)
    assert code == 0
    assert out == (
        "Answer 1\n"
        "A \\= monday\n"
        "{ opera(A │{A \\= monday}), not home(A │{A \\= monday}) }\n"
        "\n"
        "opera(A │{A \\= monday}) :-\n"
        "    not home(A │{A \\= monday}) :-\n"
        "        not o_home_1(A │{A \\= monday}) :-\n"
        "            chs(opera(A │{A \\= monday})).\n"
        "        not o_home_2(A │{A \\= monday}) :-\n"
        "            A \\= monday.\n"
        "global_constraint.\n"
    )


def test_ophthalmologist_model_line(capsys):
    code, out, _ = scasp(capsys, CORPUS / "peter.pl")
    assert code == 0
    assert out.splitlines()[2].startswith("{ intraocularLens, correctiveLens,")


def test_no_models_exit(capsys):
    code, out, _ = scasp(capsys, CORPUS / "loop.pl")
    assert code == 1 and out == "no models\n"


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.pl"
    bad.write_text("p :- q\nr.\n")
    code, _, err = scasp(capsys, bad)
    assert code == 2
    assert err.startswith(f"{bad}:2:")


def test_missing_file_and_missing_query(tmp_path, capsys):
    assert scasp(capsys, tmp_path / "nope.pl")[0] == 2
    f = tmp_path / "noquery.pl"
    f.write_text("p.\n")
    code, _, err = scasp(capsys, f)
    assert code == 2 and "no query" in err


def test_unsupported_exit(tmp_path, capsys):
    f = tmp_path / "u.pl"
    f.write_text("q(f(X)).\np :- not q(Y).\n?- p.\n")
    code, _, err = scasp(capsys, f)
    assert code == 3 and "unsupported" in err


def test_query_flag_overrides_directive(capsys):
    code, out, _ = scasp(capsys, "--query", "?- home(monday).", "-n", "0", OPERA)
    assert code == 0
    assert out.count("Answer ") == 2


def test_files_concatenate_in_order(tmp_path, capsys):
    rules = tmp_path / "rules.pl"
    facts = tmp_path / "facts.pl"
    rules.write_text("p(X) :- q(X).\n")
    facts.write_text("q(a).\nq(b).\n?- p(X).\n")
    code, out, _ = scasp(capsys, "-n", "0", rules, facts)
    assert code == 0
    assert "X = a" in out and "X = b" in out


def test_dual_listing(capsys):
    code, out, _ = scasp(capsys, "--dual", CORPUS / "peter.pl")
    assert code == 0
    assert "not o_laserSurgery_1 :- shortSighted, not tightOnMoney, correctiveLens.\n" in out
    assert "Answer 1" in out  # embedded query still runs


def test_code_listing_without_query(tmp_path, capsys):
    f = tmp_path / "p.pl"
    f.write_text("p :- not q.\n")
    code, out, _ = scasp(capsys, "--code", f)
    assert code == 0 and out == "p :- not q.\n"


def test_html_output(tmp_path, capsys):
    page = tmp_path / "out.html"
    code, _, _ = scasp(capsys, "--tree", "--human", "--html", page, CORPUS / "opera_pred.pl")
    assert code == 0
    doc = page.read_text(encoding="utf-8")
    root = ET.fromstring(doc.split("\n", 1)[1])
    assert root.find(".//h1").text == "opera_pred.pl"
    summaries = [s.text for s in root.iter("summary")]
    assert summaries[0] == "Bob goes to the opera on a day A not equal monday, because"


def test_ascii_flag(capsys):
    _, out, _ = scasp(capsys, "--ascii", OPERA)
    assert "│" not in out and "A |{A \\= monday}" in out


def test_show_projects_model_except_long(tmp_path, capsys):
    f = tmp_path / "s.pl"
    f.write_text("p :- q.\nq.\n#show q.\n?- p.\n")
    assert scasp(capsys, f)[1].splitlines()[2] == "{ q }"
    assert scasp(capsys, "--long", f)[1].splitlines()[2] == "{ p, q }"


def test_output_is_deterministic(capsys):
    argv = ["--tree", "--mid", "--neg", "-n", "0", CORPUS / "pas_excerpt.pl"]
    assert scasp(capsys, *argv) == scasp(capsys, *argv)


def test_oracle_flag(tmp_path, capsys):
    f = tmp_path / "e.pl"
    f.write_text("p :- not q.\nq :- not p.\n")
    code, out, _ = scasp(capsys, "--oracle", f)
    assert code == 0
    assert out == "Model 1: { p }\nModel 2: { q }\n2 stable model(s)\n"


def test_stats_line(capsys):
    _, _, err = scasp(capsys, "--stats", OPERA)
    assert err.startswith("% solve time:")


def test_level_flags_are_exclusive(capsys):
    with pytest.raises(SystemExit):
        main(["--short", "--long", OPERA])


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "gdasp", OPERA], capture_output=True, text=True, encoding="utf-8")
    assert done.returncode == 0
    assert done.stdout.splitlines()[1] == "A \\= monday"
