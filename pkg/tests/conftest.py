from pathlib import Path

import pytest

from adthemes.ingestion import PageRegistry, load_corpus
from adthemes.lexicon import load_lexicon
from adthemes.textpipe import LinguisticLexicon, dedup, process_ad

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"
FIXTURE_CORPUS = DATA / "fixtures" / "ads_50.ndjson"
FIXTURE_REGISTRY = DATA / "fixtures" / "page_registry.csv"
LING_LEXICON = DATA / "lexicon_nl.tsv"
WORDLISTS = DATA / "wordlists"
BASELINE = DATA / "population_nl.csv"
STOPWORDS = DATA / "stopwords_nl.txt"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def ling():
    return LinguisticLexicon.from_file(LING_LEXICON)


@pytest.fixture(scope="session")
def registry():
    return PageRegistry.from_file(FIXTURE_REGISTRY)


@pytest.fixture(scope="session")
def fixture_corpus(registry):
    corpus, report = load_corpus(FIXTURE_CORPUS, registry)
    assert report.rejected == 0
    return corpus


@pytest.fixture(scope="session")
def fixture_texts(fixture_corpus, ling):
    return dedup(process_ad(ad, ling) for ad in fixture_corpus)


@pytest.fixture()
def seed_lexicon(ling):
    # Function-scoped: tests mutate it through decisions.
    return load_lexicon(WORDLISTS, ling)


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion on the terminal."""
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.skipped:
        print(f"\nACCEPTANCE SKIP: {name} ({report.longrepr[2] if report.longrepr else ''})")
    elif report.when == "call":
        print(f"\nACCEPTANCE {'PASS' if report.passed else 'FAIL'}: {name}")
