import pytest

from bbu import AnnotatedExample, generate_population, mnli_analog_config

_CRITERIA = {}


def record_criterion(number, title, passed, detail=""):
    _CRITERIA[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number}. {title}  {detail}".rstrip())


@pytest.fixture(scope="session")
def mnli_population():
    return generate_population(mnli_analog_config())


def make_examples(protected, unprotected, neither=()):
    """Examples carrying raw costs, ids assigned in order."""
    out = []
    for tag, costs in ((1, protected), (-1, unprotected), (0, neither)):
        for c in costs:
            out.append(AnnotatedExample(f"e{len(out)}", tag, raw_cost=c))
    return out


def brute_disparity(costs, signs):
    """Mean-difference oracle written with plain loops."""
    a_sum = a_n = b_sum = b_n = 0
    for c, s in zip(costs, signs):
        if s == 1:
            a_sum += c
            a_n += 1
        elif s == -1:
            b_sum += c
            b_n += 1
    return a_sum / a_n - b_sum / b_n


def random_population(rng, size):
    """Random signs with both groups present and uniform costs."""
    signs = rng.choice([-1, 0, 1], size=size, p=[0.4, 0.2, 0.4])
    signs[0], signs[1] = 1, -1
    costs = rng.uniform(0, 1, size=size)
    return costs, signs
