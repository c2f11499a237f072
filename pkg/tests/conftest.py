import pytest

from bitt.model import AnnotatedSentence, Triple

WORKED_TOKENS = ["The", "White", "House", "in", "Washington", ",", "America"]
WORKED_TRIPLES = {
    Triple("Washington", "Contains", "The White House"),
    Triple("America", "Contains", "The White House"),
    Triple("America", "Contains", "Washington"),
}


def sentence(words, triples, sid="s"):
    """Sentence from a word string (or list) and (head, rel, tail) tuples."""
    if isinstance(words, str):
        words = words.split()
    return AnnotatedSentence.build(sid, words, [Triple(*t) for t in triples])


@pytest.fixture
def worked():
    return AnnotatedSentence.build("white-house", WORKED_TOKENS, WORKED_TRIPLES)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def verdict(request):
    """Record one acceptance line; the caller asserts afterwards."""

    def record(number, name, ok, detail=""):
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
        line = f"[{status}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
        request.config.stash[ACCEPTANCE].append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: l.split("criterion ")[1]):
            terminalreporter.write_line(line)
