import random
from pathlib import Path

import pytest

from poslex.corpus import CorpusFormat
from poslex.model import default_tagset
from poslex.project import ProjectStore
from poslex.translate import MemoryCache, StubBackend, TranslateConfig, load_dictionary, translate_entries

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "poslex" / "data"

# Frozen reference distribution for the bundled catalog, used as a
# regression oracle: (tag, entry count, expected percentage display,
# expected percentile display). Counts sum to 13385.
REFERENCE_ROWS = [
    ("ADJ", 4, "0.0003", "0.1"),
    ("ADJ_CMPR", 133, "0.0099", "0.8"),
    ("ADJ_INO", 52, "0.0039", "0.6"),
    ("ADJ_ORD", 21, "0.0016", "0.4"),
    ("ADJ_SIM", 2181, "0.1629", "0.9"),
    ("ADJ_SUP", 153, "0.0114", "0.8"),
    ("ADV", 23, "0.0017", "0.4"),
    ("ADV_EXM", 8, "0.0006", "0.2"),
    ("ADV_I", 11, "0.0008", "0.3"),
    ("ADV_NEGG", 8, "0.0006", "0.2"),
    ("ADV_NI", 314, "0.0235", "0.9"),
    ("ADV_TIME", 58, "0.0043", "0.7"),
    ("CON", 119, "0.0089", "0.7"),
    ("DEFAULT", 5, "0.0004", "0.2"),
    ("DELM", 75, "0.0056", "0.7"),
    ("DET", 14, "0.0010", "0.3"),
    ("IF", 4, "0.0003", "0.1"),
    ("INT", 4, "0.0003", "0.1"),
    ("MORP", 25, "0.0019", "0.4"),
    ("MQUA", 3, "0.0002", "0.08"),
    ("N_PL", 2147, "0.1604", "0.9"),
    ("N_SING", 6998, "0.5228", "1"),
    ("NP", 6, "0.0004", "0.2"),
    ("OH", 2, "0.0001", "0.05"),
    ("OHH", 1, "0.0001", "0.03"),
    ("P", 50, "0.0037", "0.6"),
    ("PP", 27, "0.0020", "0.5"),
    ("PRO", 44, "0.0033", "0.6"),
    ("PS", 15, "0.0011", "0.3"),
    ("QUA", 29, "0.0022", "0.5"),
    ("SPEC", 34, "0.0025", "0.5"),
    ("V_AUX", 22, "0.0016", "0.4"),
    ("V_IMP", 48, "0.0036", "0.6"),
    ("V_PA", 274, "0.0205", "0.9"),
    ("V_PRE", 209, "0.0156", "0.8"),
    ("V_PRS", 165, "0.0123", "0.8"),
    ("V_SUB", 99, "0.0074", "0.7"),
]

REFERENCE_TOTAL = 13385

# bundled toy corpus facts, checked by the data-generation step
TOY_LINES = 200
TOY_TOKENS = 194
TOY_QUARANTINED = 3
TOY_ENTRIES = 63

FAST = TranslateConfig(rate_per_sec=1e9)


def no_sleep(_seconds):
    pass


@pytest.fixture(scope="session")
def toy_corpus_bytes():
    return (DATA_DIR / "toy_corpus.txt").read_bytes()


@pytest.fixture(scope="session")
def toy_dictionary():
    return load_dictionary(DATA_DIR / "toy_dictionary.tsv")


@pytest.fixture
def ingested_store(tmp_path, toy_corpus_bytes):
    store = ProjectStore.init(tmp_path / "proj")
    store.ingest(toy_corpus_bytes, CorpusFormat())
    yield store
    store.close()


@pytest.fixture
def translated_store(ingested_store, toy_dictionary):
    ingested_store.translate(StubBackend(toy_dictionary), FAST, sleep_fn=no_sleep)
    return ingested_store


def translate_fresh(entries, dictionary, cfg=FAST, cache=None):
    """Unit-test shortcut: run the translation stage outside a store."""
    return translate_entries(
        entries, StubBackend(dictionary), cfg, cache or MemoryCache(), sleep_fn=no_sleep
    )


def random_corpus(rng: random.Random, tagset=None, n_tokens=60):
    """A small synthetic tagged corpus as bytes, tab delimited."""
    tagset = tagset or default_tagset()
    codes = tagset.codes()
    vocab = [f"واژه{i}" for i in range(rng.randint(5, 25))]
    lines = []
    for _ in range(n_tokens):
        surface = rng.choice(vocab)
        tag = rng.choice(codes)
        lines.append(f"{surface}\t{tag}")
    return ("\n".join(lines) + "\n").encode("utf-8")
