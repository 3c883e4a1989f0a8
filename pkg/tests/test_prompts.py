import re
from collections import Counter
from dataclasses import replace

import pytest

from optfuzz.collector import collect
from optfuzz.errors import ContextOverflow
from optfuzz.programs import TestProgram
from optfuzz.prompts import engine
from optfuzz.prompts.engine import (
    Family,
    FewShotExample,
    PromptConfig,
    Requirement,
    RequirementFormat,
    ShotKind,
    build_feedback_prompt,
    build_generation_prompt,
    build_summarization_prompt,
    code_only,
    convert_requirement,
    load_seed_shots,
    nl_only,
    split_requirement,
)
from optfuzz.sut.minilang.sut import MINILANG_ROOT, minilang_descriptor

from conftest import load_fixture

DESC = minilang_descriptor()
CATALOG = {o.name: o for o in collect(DESC)}
SHOTS = load_seed_shots(MINILANG_ROOT / "fewshot.yaml", list(CATALOG.values()))
MIXED = load_fixture("mixed_requirements.json")


def req(text="Needs a multiply feeding an add.\n```\nx * y + z\n```\n", opt="mul_add_fuse"):
    return Requirement(opt, RequirementFormat.MIXED, text, "stub")


def program(i, code):
    return TestProgram(f"t{i}", "mul_add_fuse", code, 0)


def squash(text):
    return re.sub(r"\s+", "", text)


def test_summarization_structure():
    b = build_summarization_prompt(CATALOG["mul_add_fuse"], SHOTS.summarization, DESC)
    shot_req = SHOTS.summarization[0].requirement.text.strip()
    assert b.family is Family.SUMMARIZE and b.example_ids == ()
    assert b.text.index(shot_req) < b.text.index(CATALOG["mul_add_fuse"].main_source.strip())
    assert b.text.endswith("### Requirement\n")
    assert "[" + "TARGET INPUT]" not in b.text and DESC.input_kind in b.text


def test_zero_shot_summarization():
    b = build_summarization_prompt(CATALOG["const_fold"], [], DESC)
    assert b.text.count("### Instruction") == 1


def test_pattern_matcher_template():
    target = CATALOG["neg_neg_elim"]
    assert target.kind.value == "PatternMatcher"
    b = build_summarization_prompt(target, [], DESC)
    assert engine.load_template("summarize_pattern").split()[0] in b.text


def test_aux_dropped_before_failing():
    target = replace(CATALOG["add_zero_elim"], aux_sources=(("big", "x = 1\n" * 500),))
    fits_main = len(build_summarization_prompt(replace(target, aux_sources=()), [], DESC).text)
    b = build_summarization_prompt(target, [], DESC, PromptConfig(context_tokens=fits_main, chars_per_token=1))
    assert "x = 1" not in b.text and target.main_source.strip() in b.text
    with pytest.raises(ContextOverflow):
        build_summarization_prompt(target, [], DESC, PromptConfig(context_tokens=10, chars_per_token=1))


def test_generation_prompt():
    b = build_generation_prompt(req(), SHOTS.generation, DESC, opt_name="mul_add_fuse")
    assert b.family is Family.GENERATE and b.example_ids == ()
    assert b.text.endswith("### Program\n")
    assert not re.search(r"\[[A-Z ]+\]", b.text)


def test_generation_shot_order_and_truncation():
    s1 = replace(SHOTS.generation[0], test="print(111)\n")
    s2 = replace(SHOTS.generation[0], test="print(222)\n")
    b = build_generation_prompt(req(), [s1, s2], DESC)
    assert b.text.index("print(111)") < b.text.index("print(222)")
    zero = len(build_generation_prompt(req(), [], DESC).text)
    one = len(build_generation_prompt(req(), [s2], DESC).text)
    small = build_generation_prompt(req(), [s1, s2], DESC, PromptConfig(context_tokens=one, chars_per_token=1))
    assert "print(111)" not in small.text and "print(222)" in small.text
    assert zero < one


def test_raw_impl_requirement_embeds_source():
    opt = CATALOG["mul_add_fuse"]
    raw = convert_requirement(req(), RequirementFormat.RAW_IMPL, opt)
    assert raw.text == opt.full_source()
    b = build_generation_prompt(raw, [], DESC)
    assert opt.main_source.strip() in b.text


def test_feedback_prompt():
    ex = [program(i, f"let x = {i}\nprint(x * 2 + 1)\n") for i in range(3)]
    b = build_feedback_prompt(req(), ex, DESC)
    assert b.family is Family.FEEDBACK and b.example_ids == ("t0", "t1", "t2")
    assert b.text.endswith("### New program\n")
    assert build_feedback_prompt(req(), ex[:1], DESC).example_ids == ("t0",)
    with pytest.raises(ValueError):
        build_feedback_prompt(req(), [], DESC)


def test_feedback_drops_largest():
    ex = [program(0, "print(1)\n"), program(1, "print(2)\n" * 300), program(2, "print(3)\n")]
    full_small = len(build_feedback_prompt(req(), [ex[0], ex[2]], DESC).text)
    b = build_feedback_prompt(req(), ex, DESC, PromptConfig(context_tokens=full_small, chars_per_token=1))
    assert b.example_ids == ("t0", "t2")
    with pytest.raises(ContextOverflow):
        build_feedback_prompt(req(), ex, DESC, PromptConfig(context_tokens=50, chars_per_token=1))


def test_rendering_deterministic():
    a = build_generation_prompt(req(), SHOTS.generation, DESC)
    b = build_generation_prompt(req(), SHOTS.generation, DESC)
    assert a.text == b.text and a.hash == b.hash


def test_shot_kind_validation():
    with pytest.raises(ValueError):
        FewShotExample("i", ShotKind.GENERATION, requirement=req())
    with pytest.raises(ValueError):
        build_generation_prompt(req(), SHOTS.summarization, DESC)
    with pytest.raises(ValueError):
        Requirement("x", RequirementFormat.MIXED, "", "human")


@pytest.mark.parametrize("item", MIXED, ids=[m["name"] for m in MIXED])
def test_split_partitions_mixed(item):
    text = item["text"]
    assert "".join(s for _, s in split_requirement(text)) == text
    both = nl_only(text) + code_only(text)
    assert Counter(squash(both)) == Counter(squash(text))
    assert "```" not in nl_only(text)


def test_convert_keeps_mixed_when_part_empty():
    prose = req("Just prose.\n")
    assert convert_requirement(prose, RequirementFormat.CODE_ONLY) is prose
    assert convert_requirement(req(), RequirementFormat.NL_ONLY).text == "Needs a multiply feeding an add.\n"


def test_seed_file_must_name_catalog_entry(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("opt: nope\nrequirement: r\ntest: t\n")
    with pytest.raises(ValueError):
        load_seed_shots(p, list(CATALOG.values()))
