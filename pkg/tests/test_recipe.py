import json

import pytest

from kinescript import Recipe, SegmentSpec, load_recipe, validate_recipe
from kinescript.errors import InvalidRecipe
from kinescript.recipe import recipe_from_dict, recipe_to_dict


def seg(**kw):
    base = dict(mode="Walk", duration_s=2.0, movement="forward")
    base.update(kw)
    return SegmentSpec(**base)


def test_valid_recipe_passes(reg):
    validate_recipe(Recipe("ok", 1, (seg(), seg(mode="Run", speed=2.0))), reg)


def test_zero_duration_rejected(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(duration_s=0.0),)), reg)
    assert e.value.segment == 0
    assert e.value.field == "duration_s"


def test_unknown_mode_names_segment(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(), seg(mode="Moonwalk"))), reg)
    assert e.value.segment == 1
    assert e.value.field == "mode"


def test_speed_override_out_of_range(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(mode="Run", speed=5.0),)), reg)
    assert e.value.field == "speed"


def test_speed_override_on_fixed_speed_mode(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(mode="Walk", speed=1.0),)), reg)
    assert e.value.field == "speed"


def test_turn_deg_requires_heading(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(mode="Squat", movement="none", turn_deg=30.0),)), reg)
    assert e.value.field == "turn_deg"


def test_movement_requires_heading(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(mode="Squat"),)), reg)
    assert e.value.field == "movement"


def test_turn_left_sign_consistency(reg):
    with pytest.raises(InvalidRecipe):
        validate_recipe(Recipe("bad", 1, (seg(movement="turn_left", turn_deg=-90.0),)), reg)


def test_height_override_validated(reg):
    with pytest.raises(InvalidRecipe) as e:
        validate_recipe(Recipe("bad", 1, (seg(mode="Squat", movement="none", height=0.05),)), reg)
    assert e.value.field == "height"


def test_empty_segments_rejected(reg):
    with pytest.raises(InvalidRecipe):
        validate_recipe(Recipe("bad", 1, ()), reg)


def test_dict_round_trip(reg):
    r = Recipe("demo", 42, (seg(), seg(mode="Run", speed=2.0, turn_deg=45.0)))
    assert recipe_from_dict(recipe_to_dict(r), reg) == r


def test_load_from_file(tmp_path, reg):
    doc = {"name": "f", "seed": 9,
           "segments": [{"mode": "Walk", "duration_s": 1.0, "movement": "forward"}]}
    p = tmp_path / "r.json"
    p.write_text(json.dumps(doc))
    r = load_recipe(p, reg)
    assert r.name == "f" and r.seed == 9 and len(r.segments) == 1


def test_unknown_segment_field_rejected(reg):
    doc = {"name": "f", "seed": 1,
           "segments": [{"mode": "Walk", "duration_s": 1.0, "velocity": 3}]}
    with pytest.raises(InvalidRecipe):
        recipe_from_dict(doc, reg)
