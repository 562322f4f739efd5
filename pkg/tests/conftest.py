import numpy as np
import pytest

from chiral_teleport.molecule import MoleculeAmplitudes
from chiral_teleport.statevec import make_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, kinds_labels: dict[str, tuple[str, ...]]):
    """Random normalised state over the product of the given label sets."""
    import itertools

    names = list(kinds_labels)
    terms = []
    for combo in itertools.product(*(kinds_labels[n] for n in names)):
        amp = complex(rng.normal(), rng.normal())
        terms.append((dict(zip(names, combo)), amp))
    s = make_state(terms)
    return s / s.norm()


def random_m(rng) -> MoleculeAmplitudes:
    return MoleculeAmplitudes.random(rng)


# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    _CRITERIA[n] = (title, "PASS" if call.excinfo is None else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, verdict = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}")
