import pytest
from hypothesis import given, strategies as st

from markovmix.errors import InvalidInputError, SchemaError
from markovmix.states import (
    DEFAULT_SPACE,
    REDUCED_ORDER,
    BinarizationRule,
    CompoundState,
    OrdinalScale,
    ReducedState,
    StateSpace,
    binarize,
    index_of,
    load_state_space,
    state_of,
)

# Expected cut of each score, written out independently of the library.
MOOD_BAD = {1: True, 2: True, 3: True, 4: False, 5: False}
PAIN_HIGH = {1: False, 2: False, 3: True, 4: True, 5: True}


@pytest.mark.parametrize(
    "mood, pain, expected",
    [(3, 2, "BL"), (5, 5, "GH"), (1, 1, "BL")],
)
def test_binarize_examples(mood, pain, expected):
    assert binarize(CompoundState(mood, pain)) is ReducedState(expected)


def test_binarize_agrees_with_score_table_everywhere():
    seen = set()
    for m in range(1, 6):
        for p in range(1, 6):
            s = binarize(CompoundState(m, p))
            assert s.good_mood is not MOOD_BAD[m]
            assert s.high_pain is PAIN_HIGH[p]
            seen.add(s)
    assert seen == set(ReducedState)


@pytest.mark.parametrize("mood, pain, field", [(0, 2, "mood"), (6, 2, "mood"), (3, 0, "pain"), (3, 9, "pain")])
def test_binarize_out_of_range_names_field(mood, pain, field):
    with pytest.raises(InvalidInputError) as err:
        binarize(CompoundState(mood, pain))
    assert err.value.field == field


def test_canonical_order():
    assert index_of(ReducedState.BH) == 0
    assert index_of(ReducedState.GL) == 3
    assert index_of("BL") == 1
    assert len({index_of(s) for s in ReducedState}) == 4
    assert [s.value for s in REDUCED_ORDER] == ["BH", "BL", "GH", "GL"]


@given(st.integers(0, 3))
def test_index_roundtrip(i):
    assert index_of(state_of(i)) == i


def test_state_of_rejects_bad_index():
    with pytest.raises(InvalidInputError):
        state_of(4)


def test_compound_index_is_row_major():
    assert DEFAULT_SPACE.n_compound == 25
    assert DEFAULT_SPACE.compound_index(CompoundState(1, 1)) == 0
    assert DEFAULT_SPACE.compound_index(CompoundState(1, 5)) == 4
    assert DEFAULT_SPACE.compound_index(CompoundState(2, 1)) == 5
    for i in range(25):
        assert DEFAULT_SPACE.compound_index(DEFAULT_SPACE.compound_state(i)) == i
    assert DEFAULT_SPACE.compound_labels[7] == "m2p3"


def test_scale_needs_two_levels():
    with pytest.raises(SchemaError):
        OrdinalScale("x", ("only",))


def test_rule_must_partition():
    mood = OrdinalScale("m", ("a", "b", "c"))
    pain = OrdinalScale("p", ("a", "b"))
    with pytest.raises(SchemaError):
        StateSpace(mood, pain, BinarizationRule(frozenset({1, 2, 3}), frozenset({2})))
    with pytest.raises(SchemaError):
        StateSpace(mood, pain, BinarizationRule(frozenset({1, 4}), frozenset({2})))


def test_scores_for_inverts_binarize():
    for s in ReducedState:
        moods, pains = DEFAULT_SPACE.scores_for(s)
        for m in moods:
            for p in pains:
                assert binarize(CompoundState(m, p)) is s


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "space.yaml"
    cfg.write_text(
        "mood:\n  levels: [awful, meh, fine, great]\n  bad: [1, 2]\n"
        "pain:\n  levels: [none, some, lots]\n  high: [3]\n"
    )
    space = load_state_space(cfg)
    assert space.n_compound == 12
    assert space.binarize(CompoundState(3, 2)) is ReducedState.GL
    assert StateSpace.from_dict(space.to_dict()) == space
    assert load_state_space(None) is DEFAULT_SPACE


def test_config_missing_keys(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("mood:\n  levels: [a, b]\n")
    with pytest.raises(SchemaError):
        load_state_space(cfg)
