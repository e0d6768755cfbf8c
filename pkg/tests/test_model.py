import json

import pytest

from poslex.errors import IllegalTransition, NotArTagged, UnknownEntry
from poslex.model import (
    LABELED_CORRECT,
    LABELED_UNDECIDED,
    REVIEWED_ACCURATE,
    TRANSLATED,
    LexiconEntry,
    ReviewEvent,
    TagDef,
    TagSet,
    default_tagset,
    entry_id,
    transition,
)


def ev(entry, kind, payload, seq=1):
    return ReviewEvent(seq=seq, entry_id=entry.id, kind=kind, payload=payload,
                       actor="t", ts="2026-01-01T00:00:00Z")


@pytest.fixture
def entry():
    return LexiconEntry(id=entry_id("خانه", "N_SING"), source_form="خانه", tag="N_SING",
                        frequency=3, translation="ماڵ", state=TRANSLATED)


class TestTagSet:
    def test_default_catalog_has_38_tags_ar_last(self):
        ts = default_tagset()
        assert len(ts.tags) == 38
        assert ts.codes()[-1] == "AR"
        assert "N_SING" in ts and "XYZ" not in ts

    def test_categories_follow_prefixes(self):
        ts = default_tagset()
        assert ts.lookup("N_PL").category == "noun"
        assert ts.lookup("V_SUB").category == "verb"
        assert ts.lookup("ADJ_CMPR").category == "adjective"
        assert ts.lookup("ADV_NEGG").category == "adverb"
        assert ts.lookup("DELM").category == "delimiter"
        assert ts.lookup("CON").category == "function"
        assert ts.lookup("AR").category == "other"

    def test_round_trip(self):
        ts = default_tagset()
        again = TagSet.from_dict(json.loads(json.dumps(ts.to_dict())))
        assert again == ts

    def test_rejects_bad_codes_and_duplicates(self):
        with pytest.raises(ValueError):
            TagSet(name="x", tags=(TagDef("bad code", "", "other"),))
        with pytest.raises(ValueError):
            TagSet(name="x", tags=(TagDef("A", "", "other"), TagDef("A", "", "other")))


class TestEntryId:
    def test_same_pair_same_id(self):
        assert entry_id("خانه", "N_SING") == entry_id("خانه", "N_SING")

    def test_tab_in_key_cannot_collide_across_fields(self):
        assert entry_id("a\tb", "C") != entry_id("a", "b\tC")

    def test_different_tag_different_id(self):
        assert entry_id("خانه", "N_SING") != entry_id("خانه", "N_PL")


class TestLabelTransitions:
    def test_label_correct(self, entry):
        out = transition(entry, ev(entry, "label", {"label": "correct"}))
        assert out.state == LABELED_CORRECT
        assert entry.state == TRANSLATED  # input untouched

    @pytest.mark.parametrize("label,state", [
        ("correct", "labeled_correct"),
        ("not-correct", "labeled_not_correct"),
        ("undecided", "labeled_undecided"),
    ])
    def test_all_labels(self, entry, label, state):
        assert transition(entry, ev(entry, "label", {"label": label})).state == state

    def test_relabel_without_unlabel_refused(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "correct"}))
        with pytest.raises(IllegalTransition):
            transition(labeled, ev(labeled, "label", {"label": "undecided"}, seq=2))

    def test_unlabel_returns_to_translated(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "undecided"}))
        back = transition(labeled, ev(labeled, "label", {"label": None}, seq=2))
        assert back.state == TRANSLATED

    def test_unlabel_of_unlabeled_refused(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "label", {"label": None}))

    def test_unknown_label_refused(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "label", {"label": "maybe"}))

    def test_label_requires_translated(self, entry):
        raw = LexiconEntry(id=entry.id, source_form=entry.source_form, tag=entry.tag,
                           frequency=1, state="deduped")
        with pytest.raises(IllegalTransition):
            transition(raw, ev(raw, "label", {"label": "correct"}))


class TestVerdictTransitions:
    def test_verdict_only_from_correct(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "correct"}))
        out = transition(labeled, ev(labeled, "verdict", {"verdict": "accurate"}, seq=2))
        assert out.state == REVIEWED_ACCURATE

    def test_verdict_on_undecided_refused(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "undecided"}))
        assert labeled.state == LABELED_UNDECIDED
        with pytest.raises(IllegalTransition):
            transition(labeled, ev(labeled, "verdict", {"verdict": "accurate"}, seq=2))

    def test_verdict_on_translated_refused(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "verdict", {"verdict": "repeated"}))

    def test_verdict_is_terminal(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "correct"}))
        done = transition(labeled, ev(labeled, "verdict", {"verdict": "concerned"}, seq=2))
        for kind, payload in [("label", {"label": None}), ("verdict", {"verdict": "accurate"}),
                              ("edit", {"before": "ماڵ", "after": "x"})]:
            with pytest.raises(IllegalTransition):
                transition(done, ev(done, kind, payload, seq=3))


class TestEditTransitions:
    def test_edit_records_before_and_after(self, entry):
        out = transition(entry, ev(entry, "edit", {"before": "ماڵ", "after": "ماڵی", "reason": "manual"}))
        assert out.translation == "ماڵی"
        assert [e.before for e in out.edits] == ["ماڵ"]
        assert [e.after for e in out.edits] == ["ماڵی"]

    def test_edit_with_stale_before_refused(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "edit", {"before": "دیکه", "after": "x"}))

    def test_edit_to_empty_refused(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "edit", {"before": "ماڵ", "after": ""}))

    def test_edit_allowed_on_correct_label(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "correct"}))
        out = transition(labeled, ev(labeled, "edit", {"before": "ماڵ", "after": "ماڵم"}, seq=2))
        assert out.translation == "ماڵم"
        assert out.state == LABELED_CORRECT

    def test_edit_refused_on_not_correct(self, entry):
        labeled = transition(entry, ev(entry, "label", {"label": "not-correct"}))
        with pytest.raises(IllegalTransition):
            transition(labeled, ev(labeled, "edit", {"before": "ماڵ", "after": "x"}, seq=2))

    def test_edits_accumulate(self, entry):
        one = transition(entry, ev(entry, "edit", {"before": "ماڵ", "after": "الف"}))
        two = transition(one, ev(one, "edit", {"before": "الف", "after": "ب"}, seq=2))
        assert len(two.edits) == 2
        assert two.translation == "ب"


class TestFlags:
    def test_ar_flag_on_ar_entry(self):
        e = LexiconEntry(id=entry_id("الله", "AR"), source_form="الله", tag="AR",
                         frequency=1, translation="الله", state=TRANSLATED)
        out = transition(e, ev(e, "flag", {"flag": "ar"}))
        assert out.ar_flag

    def test_ar_flag_on_other_tag_refused(self, entry):
        with pytest.raises(NotArTagged):
            transition(entry, ev(entry, "flag", {"flag": "ar"}))

    def test_source_repeat_needs_correct_label(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "flag", {"flag": "source_repeat"}))
        labeled = transition(entry, ev(entry, "label", {"label": "correct"}))
        out = transition(labeled, ev(labeled, "flag", {"flag": "source_repeat"}, seq=2))
        assert out.source_repeat

    def test_unknown_flag_refused(self, entry):
        with pytest.raises(IllegalTransition):
            transition(entry, ev(entry, "flag", {"flag": "starred"}))


def test_event_targeting_other_entry_refused(entry):
    other = ReviewEvent(seq=1, entry_id="feedfeedfeedfeed", kind="label",
                        payload={"label": "correct"}, actor="t", ts="2026-01-01T00:00:00Z")
    with pytest.raises(UnknownEntry):
        transition(entry, other)


def test_event_dict_round_trip():
    event = ReviewEvent(seq=9, entry_id="abc", kind="edit",
                        payload={"before": "x", "after": "y"}, actor="a", ts="2026-01-01T00:00:00Z")
    assert ReviewEvent.from_dict(json.loads(json.dumps(event.to_dict()))) == event
