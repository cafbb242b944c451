import pytest

from instructforge.errors import TemplateError
from instructforge.templates import TemplateSet


def test_packaged_templates_all_load(templates):
    names = [
        "reframe",
        "filter_answerable",
        "generate_constraints",
        "recombine",
        "synthesize_structural_pool",
        "augment_structural",
        "filter_conflicts",
        "generate_response",
        "generate_response_adherent",
        "responder",
        "judge_response",
        "detect_rephrase",
        "score_sample",
    ]
    for name in names:
        assert templates.raw(name).strip()


def test_render_substitutes_placeholders(templates):
    text = templates.render("reframe", query="make me a sandwich", min_variants=3)
    assert "make me a sandwich" in text
    assert "{{" not in text


def test_render_missing_placeholder_value(templates):
    with pytest.raises(TemplateError):
        templates.render("reframe", query="x")  # min_variants missing


def test_unknown_template(templates):
    with pytest.raises(TemplateError):
        templates.raw("no_such_stage")


def test_directory_override(tmp_path):
    (tmp_path / "reframe.txt").write_text("custom: {{query}} / {{min_variants}}", encoding="utf-8")
    custom = TemplateSet(tmp_path)
    assert custom.render("reframe", query="q", min_variants=4) == "custom: q / 4"
    with pytest.raises(TemplateError):
        custom.raw("filter_answerable")  # override dir must carry the full set it uses
