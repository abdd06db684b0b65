"""Command-line front end"""
import json

import pytest

from toposforge.cli import build_parser, main

TRUNCATION = """
sheaf T on sierpinski
sections X: a b
sections U: a
restrict X->U: a->a b->a
"""


def test_eval_double_negation(capsys):
    assert main(["eval", "--space", "sierpinski", "--formula", "~~U"]) == 0
    assert capsys.readouterr().out.strip() == "FORCED on X; truth-value = X"


def test_eval_excluded_middle(capsys):
    assert main(["eval", "--space", "sierpinski", "--formula", "U \\/ ~U"]) == 0
    assert capsys.readouterr().out.strip() == "NOT-FORCED on X; truth-value = U"


def test_eval_on_a_named_open(capsys):
    assert main(["eval", "--space", "sierpinski", "--open", "U", "--formula", "U \\/ ~U"]) == 0
    assert capsys.readouterr().out.strip() == "FORCED on U; truth-value = U"


def test_eval_over_a_spectrum(capsys):
    code = main(["eval", "--ring", "zmod 12", "--formula", "forall s:O. ~inv(s) => nilp(s)"])
    assert code == 0
    assert capsys.readouterr().out.startswith("FORCED on X")


def test_truth(capsys):
    assert main(["truth", "--space", "sierpinski", "--formula", "~U"]) == 0
    assert capsys.readouterr().out.strip() == "truth-value = {}"


def test_translate(capsys):
    assert main(["translate", "--nucleus", "negneg", "exists x:F. p(x)=y"]) == 0
    assert capsys.readouterr().out.strip() == "~~(exists x:F. ~~(p(x) = y))"


def test_translate_json(capsys):
    assert main(["--format", "json", "translate", "--elide-gray", "a = b /\\ c = d"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["translated"] == "box[j] (a = b) /\\ box[j] (c = d)"
    assert payload["elided_gray_boxes"] is True


def test_syntax_error_exit_code(capsys):
    assert main(["eval", "--space", "sierpinski", "--formula", "forall x:F. ("]) == 2
    err = capsys.readouterr().err
    assert "offset 13" in err
    assert "^" in err


def test_unknown_space_exit_code(capsys):
    assert main(["eval", "--space", "moebius", "--formula", "true"]) == 3
    assert "unknown space" in capsys.readouterr().err


def test_sheafify(tmp_path, capsys):
    path = tmp_path / "truncation.sheaf"
    path.write_text(TRUNCATION, encoding="utf-8")
    assert main(["sheafify", "T", "--space", "sierpinski", "--load", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("a(T) along negneg")
    assert "sheaf: yes" in out
    assert "unit injective: no" in out


def test_eval_with_bound_sections(tmp_path, capsys):
    """Two global sections that agree only on U"""
    path = tmp_path / "truncation.sheaf"
    path.write_text(TRUNCATION, encoding="utf-8")
    code = main([
        "eval", "--space", "sierpinski", "--load", str(path),
        "--declare", "x:T", "--declare", "y:T", "--bind", "x=a", "--bind", "y=b", "--formula", "x = y",
    ])
    assert code == 0
    assert capsys.readouterr().out.strip() == "NOT-FORCED on X; truth-value = U"


def test_spec(capsys):
    assert main(["spec", "--ring", "zmod 12"]) == 0
    out = capsys.readouterr().out
    assert "ring: zmod 12 (12 elements)" in out
    assert "frame: 4 elements" in out
    assert "points: 2" in out
    assert "  X: 12" in out


def test_spec_json(capsys):
    assert main(["--format", "json", "spec", "--ring", "zmod 4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] == 4
    assert len(payload["points"]) == 1


def test_verify_spectrum(capsys):
    assert main(["verify", "spectrum", "--ring", "zmod 12"]) == 0
    out = capsys.readouterr().out
    assert "frame=4 elements, points=2" in out
    assert "FAIL" not in out


def test_parser_requires_a_context():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["eval", "--formula", "true"])
    with pytest.raises(SystemExit):
        build_parser().parse_args(["verify", "everything"])
