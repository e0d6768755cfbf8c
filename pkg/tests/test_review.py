import random
from collections import defaultdict

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poslex import review
from poslex.errors import CorruptJournal, MalformedCsv, NothingToStrip
from poslex.model import (
    EVENT_LABEL,
    EVENT_VERDICT,
    LABELED_CORRECT,
    LABELED_NOT_CORRECT,
    LABELED_UNDECIDED,
    REVIEWED_ACCURATE,
    REVIEWED_REPEATED,
    TRANSLATED,
    LexiconEntry,
    ReviewEvent,
    entry_id,
)
from poslex.normalize import normalize


def entry(form, tag, freq=1, state=TRANSLATED, translation=None, **kw):
    if translation is None and state != "deduped":
        translation = form
    return LexiconEntry(id=entry_id(form, tag), source_form=form, tag=tag,
                        frequency=freq, state=state, translation=translation, **kw)


def label_event(seq, target, label):
    return ReviewEvent(seq=seq, entry_id=target.id, kind=EVENT_LABEL,
                       payload={"label": label}, actor="t", ts="2026-01-01T00:00:00.000000Z")


class TestJournalParse:
    def journal_text(self, events, newline=True):
        text = "\n".join(review.event_line(e) for e in events)
        return text + ("\n" if newline else "")

    def test_round_trip(self):
        e1 = entry("خانه", "N_SING")
        events = [label_event(1, e1, "correct")]
        assert review.parse_journal(self.journal_text(events)) == events

    def test_empty_text(self):
        assert review.parse_journal("") == []

    def test_torn_final_line_dropped(self):
        e1 = entry("خانه", "N_SING")
        events = [label_event(1, e1, "correct"), label_event(2, e1, None)]
        text = self.journal_text(events)[:-10]
        assert review.parse_journal(text) == events[:1]

    def test_torn_line_with_newline_rejected(self):
        # damage on a line that *was* terminated is corruption, not a torn tail
        e1 = entry("خانه", "N_SING")
        events = [label_event(1, e1, "correct")]
        text = self.journal_text(events)[:-10] + "\n"
        with pytest.raises(CorruptJournal) as err:
            review.parse_journal(text)
        assert err.value.last_good == 0

    def test_interior_garbage_rejected(self):
        e1 = entry("خانه", "N_SING")
        events = [label_event(1, e1, "correct"), label_event(2, e1, None)]
        good = [review.event_line(e) for e in events]
        text = good[0] + "\n{oops\n" + good[1] + "\n"
        with pytest.raises(CorruptJournal) as err:
            review.parse_journal(text)
        assert err.value.last_good == 1

    def test_seq_gap_rejected(self):
        e1 = entry("خانه", "N_SING")
        events = [label_event(1, e1, "correct"), label_event(2, e1, None),
                  label_event(3, e1, "correct")]
        text = "\n".join([review.event_line(events[0]),
                          review.event_line(events[2])]) + "\n"
        with pytest.raises(CorruptJournal) as err:
            review.parse_journal(text)
        assert err.value.last_good == 1
        assert "1 to 3" in str(err.value)

    def test_seq_repeat_rejected(self):
        e1 = entry("خانه", "N_SING")
        line = review.event_line(label_event(1, e1, "correct"))
        with pytest.raises(CorruptJournal):
            review.parse_journal(line + "\n" + line + "\n")

    def test_must_start_at_one(self):
        e1 = entry("خانه", "N_SING")
        with pytest.raises(CorruptJournal) as err:
            review.parse_journal(review.event_line(label_event(3, e1, "correct")) + "\n")
        assert err.value.last_good == 0

    def test_missing_file_is_empty(self, tmp_path):
        assert review.read_journal(tmp_path / "absent.jsonl") == []


class TestReplay:
    def test_label_then_unlabel(self):
        e1 = entry("خانه", "N_SING")
        events = [label_event(1, e1, "correct"), label_event(2, e1, None)]
        out = review.replay([e1], events)
        assert out[0].state == TRANSLATED

    def test_preserves_input_order(self):
        e1, e2 = entry("ب", "N_SING"), entry("ا", "N_SING")
        out = review.replay([e1, e2], [label_event(1, e2, "correct")])
        assert [e.source_form for e in out] == ["ب", "ا"]
        assert out[1].state == LABELED_CORRECT

    def test_unknown_target_rejected(self):
        from poslex.errors import UnknownEntry

        ghost = entry("روح", "N_SING")
        with pytest.raises(UnknownEntry):
            review.replay([entry("خانه", "N_SING")], [label_event(1, ghost, "correct")])


class TestSourceRepeats:
    def test_variant_forms_collide(self):
        a = entry("كتاب", "N_SING", state=LABELED_CORRECT)
        b = entry("کتاب", "N_SING", state=LABELED_CORRECT)
        assert review.detect_source_repeats([a, b]) == [b.id]

    def test_first_in_order_is_keeper(self):
        a = entry("كتاب", "N_SING", state=LABELED_CORRECT)
        b = entry("کتاب", "N_SING", state=LABELED_CORRECT)
        assert review.detect_source_repeats([b, a]) == [a.id]

    def test_tags_partition_the_space(self):
        a = entry("خوب", "ADJ_SIM", state=LABELED_CORRECT)
        b = entry("خوب", "ADV", state=LABELED_CORRECT)
        assert review.detect_source_repeats([a, b]) == []

    def test_only_correct_pool_counts(self):
        a = entry("كتاب", "N_SING", state=LABELED_NOT_CORRECT)
        b = entry("کتاب", "N_SING", state=LABELED_CORRECT)
        assert review.detect_source_repeats([a, b]) == []

    def test_already_flagged_skipped(self):
        a = entry("كتاب", "N_SING", state=LABELED_CORRECT)
        b = entry("کتاب", "N_SING", state=LABELED_CORRECT, source_repeat=True)
        assert review.detect_source_repeats([a, b]) == []


class TestCollapseGroups:
    def test_highest_frequency_kept(self):
        a = entry("خانه", "N_SING", freq=5, state=LABELED_CORRECT, translation="ماڵ")
        b = entry("منزل", "N_SING", freq=2, state=LABELED_CORRECT, translation="ماڵ")
        assert review.collapse_groups([a, b]) == [(a.id, [b.id])]

    def test_frequency_tie_lexicographic_source(self):
        a = entry("از", "P", freq=8, state=LABELED_CORRECT, translation="لە")
        b = entry("در", "P", freq=8, state=LABELED_CORRECT, translation="لە")
        assert review.collapse_groups([b, a]) == [(a.id, [b.id])]

    def test_normalized_translations_collide(self):
        a = entry("خانه", "N_SING", freq=5, state=LABELED_CORRECT, translation="مال‌")
        b = entry("منزل", "N_SING", freq=2, state=LABELED_CORRECT, translation="مال")
        assert review.collapse_groups([a, b]) == [(a.id, [b.id])]

    def test_tag_separates_groups(self):
        a = entry("او", "PRO", freq=3, state=LABELED_CORRECT, translation="ئەو")
        b = entry("آن", "DET", freq=3, state=LABELED_CORRECT, translation="ئەو")
        assert review.collapse_groups([a, b]) == []

    def test_shuffle_invariant(self):
        rng = random.Random(7)
        pool = []
        for i in range(30):
            pool.append(entry(f"واژه{i}", "N_SING", freq=rng.randint(1, 9),
                              state=LABELED_CORRECT, translation=f"وشە{i % 7}"))
        reference = review.collapse_groups(pool)
        for _ in range(10):
            shuffled = pool[:]
            rng.shuffle(shuffled)
            assert review.collapse_groups(shuffled) == reference

    def test_against_brute_force(self):
        rng = random.Random(13)
        pool = [entry(f"واژه{i}", rng.choice(["N_SING", "V_PA"]), freq=rng.randint(1, 5),
                      state=LABELED_CORRECT, translation=f"وشە{i % 5}")
                for i in range(60)]
        grouped = defaultdict(list)
        for e in pool:
            grouped[(e.tag, normalize(e.translation))].append(e)
        expected_losers = set()
        for members in grouped.values():
            if len(members) < 2:
                continue
            keeper = min(members, key=lambda e: (-e.frequency, e.source_form, e.id))
            expected_losers.update(e.id for e in members if e.id != keeper.id)
        planned_losers = {lid for _, losers in review.collapse_groups(pool) for lid in losers}
        assert planned_losers == expected_losers

    def test_flagged_and_demoted_do_not_participate(self):
        a = entry("خانه", "N_SING", freq=5, state=LABELED_CORRECT, translation="ماڵ",
                  source_repeat=True)
        b = entry("منزل", "N_SING", freq=2, state=REVIEWED_REPEATED, translation="ماڵ")
        c = entry("مال", "N_SING", freq=1, state=LABELED_CORRECT, translation="ماڵ")
        assert review.collapse_groups([a, b, c]) == []


class TestQueues:
    def test_order_tag_then_freq_desc_then_form(self):
        es = [entry("ب", "V_PA", 1), entry("ا", "N_SING", 2),
              entry("پ", "N_SING", 9), entry("ت", "N_SING", 2)]
        ordered = review.order_queue(es)
        assert [e.source_form for e in ordered] == ["پ", "ا", "ت", "ب"]

    def test_triage_queue_translated_only(self):
        es = [entry("ا", "N_SING"), entry("ب", "N_SING", state=LABELED_CORRECT)]
        assert [e.source_form for e in review.triage_queue(es)] == ["ا"]

    def test_review_queue_excludes_flagged(self):
        es = [entry("ا", "N_SING", state=LABELED_CORRECT),
              entry("ب", "N_SING", state=LABELED_CORRECT, source_repeat=True)]
        assert [e.source_form for e in review.review_queue(es)] == ["ا"]


class TestStrips:
    def test_leading_pronoun(self):
        assert review.strip_leading("من دەچم") == "دەچم"

    def test_trailing_pronoun(self):
        assert review.strip_trailing("دەچیت تۆ") == "دەچیت"

    def test_bare_pronoun_not_strippable(self):
        assert not review.can_strip_leading("تۆ")
        assert not review.can_strip_trailing("تۆ")
        with pytest.raises(NothingToStrip):
            review.strip_leading("تۆ")

    def test_prefix_must_be_whole_word(self):
        assert not review.can_strip_leading("منداڵ دەچێت")

    def test_no_pronoun_raises(self):
        with pytest.raises(NothingToStrip):
            review.strip_trailing("دەچم")

    def test_none_translation_not_strippable(self):
        assert not review.can_strip_leading(None)

    def test_custom_pronoun_list(self):
        assert review.strip_leading("ئێمە دەچین", pronouns=("ئێمە",)) == "دەچین"


class TestPartitionLists:
    def test_six_lists_by_state(self):
        states = {
            "correct": LABELED_CORRECT,
            "not-correct": LABELED_NOT_CORRECT,
            "undecided": LABELED_UNDECIDED,
            "accurate": REVIEWED_ACCURATE,
            "repeated": REVIEWED_REPEATED,
            "concerned": "reviewed_concerned",
        }
        pool = [entry(f"واژه{i}_{name}", "N_SING", state=state)
                for i, (name, state) in enumerate(states.items())]
        lists = review.partition_lists(pool)
        assert set(lists) == set(states)
        for name in states:
            assert len(lists[name]) == 1

    def test_translated_entries_appear_nowhere(self):
        lists = review.partition_lists([entry("خانه", "N_SING")])
        assert all(v == [] for v in lists.values())

    def test_lists_are_ordered(self):
        pool = [entry("ب", "N_SING", 1, state=LABELED_CORRECT),
                entry("ا", "N_SING", 5, state=LABELED_CORRECT)]
        lists = review.partition_lists(pool)
        assert [e.source_form for e in lists["correct"]] == ["ا", "ب"]


class TestSheets:
    def pool(self):
        return [entry("خانه", "N_SING", 5), entry("رفت", "V_PA", 3)]

    def test_triage_sheet_has_blank_label_column(self):
        data = review.triage_export_csv(self.pool()).decode()
        lines = data.splitlines()
        assert lines[0] == "id,source_form,tag,frequency,translation,label"
        assert all(line.endswith(",") for line in lines[1:])

    def test_parse_triage_happy(self):
        pool = self.pool()
        data = review.triage_export_csv(pool).decode()
        filled = data.replace("ماڵ,", "ماڵ,correct") if "ماڵ" in data else data
        lines = data.splitlines()
        lines[1] += "correct"
        lines[2] += "not-correct"
        rows = review.parse_triage_csv("\n".join(lines).encode() + b"\n",
                                       {e.id for e in pool})
        assert [(r[2]) for r in rows] == ["correct", "not-correct"]
        assert rows[0][0] == 2

    def test_blank_labels_skipped(self):
        pool = self.pool()
        data = review.triage_export_csv(pool)
        assert review.parse_triage_csv(data, {e.id for e in pool}) == []

    @pytest.mark.parametrize("label", ["Correct", "yes", "accurate"])
    def test_unknown_label_rejects_file(self, label):
        pool = self.pool()
        lines = review.triage_export_csv(pool).decode().splitlines()
        lines[1] += label
        with pytest.raises(MalformedCsv) as err:
            review.parse_triage_csv("\n".join(lines).encode(), {e.id for e in pool})
        assert err.value.line_no == 2

    def test_unknown_id_rejects_file(self):
        pool = self.pool()
        lines = review.triage_export_csv(pool).decode().splitlines()
        lines[2] = "deadbeefdeadbeef,x,N_SING,1,x,correct"
        with pytest.raises(MalformedCsv) as err:
            review.parse_triage_csv("\n".join(lines).encode(), {e.id for e in pool})
        assert err.value.line_no == 3

    def test_duplicate_id_rejects_file(self):
        pool = self.pool()
        lines = review.triage_export_csv(pool).decode().splitlines()
        lines[1] += "correct"
        lines.append(lines[1])
        with pytest.raises(MalformedCsv) as err:
            review.parse_triage_csv("\n".join(lines).encode(), {e.id for e in pool})
        assert err.value.line_no == 4

    def test_wrong_header_rejected(self):
        with pytest.raises(MalformedCsv) as err:
            review.parse_triage_csv(b"id,label\nx,correct\n", {"x"})
        assert err.value.line_no == 1

    def test_bom_tolerated(self):
        pool = self.pool()
        lines = review.triage_export_csv(pool).decode().splitlines()
        lines[1] += "undecided"
        data = "﻿" + "\n".join(lines) + "\n"
        rows = review.parse_triage_csv(data.encode("utf-8"), {e.id for e in pool})
        assert len(rows) == 1

    def test_review_sheet_verdict_column(self):
        pool = [entry("خانه", "N_SING", state=LABELED_CORRECT)]
        data = review.review_export_csv(pool).decode()
        assert data.splitlines()[0].endswith(",verdict")
        lines = data.splitlines()
        lines[1] += "accurate"
        rows = review.parse_review_csv("\n".join(lines).encode(), {pool[0].id})
        assert rows == [(2, pool[0].id, "accurate")]

    def test_review_sheet_refuses_labels(self):
        pool = [entry("خانه", "N_SING", state=LABELED_CORRECT)]
        lines = review.review_export_csv(pool).decode().splitlines()
        lines[1] += "correct"
        with pytest.raises(MalformedCsv):
            review.parse_review_csv("\n".join(lines).encode(), {pool[0].id})

    def test_list_csv_columns(self):
        data = review.list_csv(self.pool()).decode()
        assert data.splitlines()[0] == "id,source_form,tag,frequency,translation"


class TestEditReversal:
    def test_restores_previous_translation(self):
        from poslex.model import EditRecord

        e = entry("می‌روم", "V_PRS", state=LABELED_CORRECT, translation="دەچم",
                  edits=(EditRecord(ts="t", before="من دەچم", after="دەچم",
                                    reason="strip_leading"),))
        reverted = review.edit_reversal(e)
        assert reverted.translation == "من دەچم"
        assert reverted.edits == ()

    def test_no_edits_rejected(self):
        with pytest.raises(ValueError):
            review.edit_reversal(entry("خانه", "N_SING"))


@given(st.lists(st.tuples(st.sampled_from(["N_SING", "V_PA", "ADJ_SIM"]),
                          st.integers(0, 4), st.integers(1, 9)), max_size=40))
def test_partition_lists_cover_every_settled_entry(drawn):
    states = [LABELED_CORRECT, LABELED_NOT_CORRECT, LABELED_UNDECIDED,
              REVIEWED_ACCURATE, REVIEWED_REPEATED]
    pool = [entry(f"واژه{i}", tag, freq, state=states[s])
            for i, (tag, s, freq) in enumerate(drawn)]
    lists = review.partition_lists(pool)
    seen = [e.id for lst in lists.values() for e in lst]
    assert sorted(seen) == sorted(e.id for e in pool)
