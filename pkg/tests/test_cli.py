import shlex
import subprocess
import sys

import pytest

from iwasawa import cli
from iwasawa.cli import DocumentError, main, parse_document, print_document

GRADED = """# coker diag(X, X^2)
ring Fp p=5 vars=X,Y weights=1,1
rel X, 0
rel 0, X^2
"""

LAMBDA_PN = """ring Zp[[T]] p=3 prec=3^12,T^20
rel 3
rel T
"""

GROUP = """5 6 2 1
1 5 0 1
1 0 5 1
6 0 0 1
1 0 0 6
"""


def run(tmp_path, capsys, args, text=None, name="doc.txt"):
    if text is not None:
        path = tmp_path / name
        path.write_text(text)
        args = [a if a != "FILE" else str(path) for a in args]
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def machine_results(out):
    rows = {}
    for line in out.splitlines():
        if line.startswith("result="):
            kv = dict(part.split("=", 1) for part in shlex.split(line))
            rows.setdefault(kv["result"], []).append(kv)
    return rows


def test_parse_graded_document():
    doc = parse_document(GRADED)
    assert doc.kind == "graded"
    assert doc.module.ngens == 2 and len(doc.module.relations) == 2


def test_parse_lambda_document():
    doc = parse_document(LAMBDA_PN)
    assert doc.kind == "lambda" and doc.precision == (3, 12, 20)
    assert doc.lambda_module.ngens == 1


def test_parse_errors_carry_location():
    with pytest.raises(DocumentError, match="p must be prime"):
        parse_document("ring Fp p=4 vars=X,Y\nrel X\n")
    with pytest.raises(DocumentError, match="line 3"):
        parse_document("ring Fp p=5 vars=X,Y\nrel X\nrel Y^^2\n")
    with pytest.raises(DocumentError, match="line 2"):
        parse_document("ring Fp p=5 vars=X,Y\nbogus X\n")
    with pytest.raises(DocumentError):
        parse_document("ring Fp p=5 vars=X,Y\nrel X, Y\nrel X\n")


@pytest.mark.parametrize("text", [GRADED, LAMBDA_PN, GROUP])
def test_print_parse_roundtrip(text):
    canon = print_document(parse_document(text))
    assert print_document(parse_document(canon)) == canon


def test_decompose_report(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, ["decompose", "FILE", "--format", "machine"], GRADED)
    assert code == 0
    res = machine_results(out)
    assert res["L"][0]["value"] == "[(X), (X^2)]"
    assert res["chi"][0]["value"] == "X^3"
    assert res["fitting_match"][0]["value"] == "true"
    assert all("route" in r for rows in res.values() for r in rows)


def test_weierstrass_command(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, ["weierstrass", "--series", "3+3*T+O(3^12,T^20)", "--format", "machine"])
    assert code == 0
    res = machine_results(out)
    assert res["mu"][0]["value"] == "1" and res["lambda"][0]["value"] == "0"
    assert res["u"][0]["value"].startswith("1 + T + O(")


def test_weierstrass_needs_precision_tail(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, ["weierstrass", "--series", "3+3*T"])
    assert code == 1 and "error" in err
    code, out, _ = run(tmp_path, capsys, ["weierstrass", "--series", "3+3*T", "--precision", "3^12,T^20"])
    assert code == 0


def test_precision_exhaustion_exits_2(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, ["weierstrass", "--series", "3*T + O(3^1, T^5)"])
    assert code == 2 and "inconclusive" in out


def test_analyze_lambda_two_routes(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, ["analyze", "FILE", "--format", "machine"], LAMBDA_PN)
    assert code == 0
    rows = machine_results(out)["pseudo_null"]
    assert len(rows) == 2 and {r["value"] for r in rows} == {"true"}
    assert rows[0]["route"] != rows[1]["route"]


def test_analyze_graded(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, ["analyze", "FILE"], GRADED)
    assert code == 0
    assert "grade: 1" in out and "W: {X}" in out


def test_route_disagreement_fails_loudly(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "lambda_is_pseudo_null", lambda M: False)
    code, _, err = run(tmp_path, capsys, ["analyze", "FILE"], LAMBDA_PN)
    assert code == 1 and "disagreement" in err


def test_command_document_mismatch(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, ["group-check", "FILE"], GRADED)
    assert code == 1 and "group" in err


def test_char_ideal_lambda(tmp_path, capsys):
    text = "ring Zp[[T]] p=3 prec=3^12,T^20\nrel 3*T\n"
    code, out, _ = run(tmp_path, capsys, ["char-ideal", "FILE", "--format", "machine"], text)
    assert code == 0
    res = machine_results(out)
    assert (res["mu"][0]["value"], res["lambda"][0]["value"]) == ("1", "1")


def test_gr_bridge_shift_agreement(tmp_path, capsys):
    text = "ring Zp[[T]] p=3 prec=3^12,T^20\nrel 3*T, 0\nrel 0, T^2 + 3\n"
    code, out, _ = run(tmp_path, capsys, ["gr-bridge", "FILE", "--shifts", "1,0"], text)
    assert code == 0
    assert "W[0,0]" in out and "W[1,0]" in out


def test_group_check_statuses(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, ["group-check", "FILE", "--samples", "30", "--format", "machine"], GROUP)
    assert code == 0
    res = machine_results(out)
    assert res["verdict"][0]["value"] == "pass"
    assert res["weights"][0]["value"] == "[1, 1, 1, 1, 1]"

    fake = "5 6 2 1\n1 5 0 1\nvaluation\n0 1 5\n"
    code, _, _ = run(tmp_path, capsys, ["group-check", "FILE"], fake)
    assert code == 1

    coarse = "5 2 2 1\n1 5 0 1\n1 0 5 1\n"
    code, _, _ = run(tmp_path, capsys, ["group-check", "FILE", "--samples", "10"], coarse)
    assert code == 2


def test_reports_are_deterministic(tmp_path, capsys):
    args = ["decompose", "FILE", "--witness", "--seed", "3"]
    first = run(tmp_path, capsys, args, GRADED)
    second = run(tmp_path, capsys, args, GRADED)
    assert first == second


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "iwasawa.cli", "weierstrass", "--series", "T^2 + 3*T + 3 + O(3^12, T^20)"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "lambda: 2" in proc.stdout
