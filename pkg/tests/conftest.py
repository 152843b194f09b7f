"""Shared test helpers and a per-criterion summary for the acceptance suite."""

import numpy as np
import pytest

ACCEPTANCE_CRITERIA = {
    "test_p1": "P1 planted-cluster recovery",
    "test_p2": "P2 clustering oracle equivalence",
    "test_p3": "P3 metric oracles",
    "test_p4": "P4 class-based keyword weighting",
    "test_p5": "P5 coherence bounds and oracle",
    "test_p6": "P6 reduction properties",
    "test_p7": "P7 lexical tables and percentiles",
    "test_p8": "P8 table shapes and reproducibility",
}


def gaussian_clusters(rng, k, per_cluster, d, spread=0.5, sep=8.0):
    """k Gaussian blobs of per_cluster points each in d dimensions.

    Centers sit at staggered radii along random directions, so every pair of
    centers is at least sep apart. Labels follow generation order.
    """
    centers = np.zeros((k, d))
    for i in range(1, k):
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        centers[i] = direction * (sep * i)
    X = np.vstack([rng.normal(c, spread, (per_cluster, d)) for c in centers])
    y = np.repeat(np.arange(k), per_cluster)
    return X, y


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tmp_corpus(tmp_path):
    """Two small plain-text files; ingest order and doc ids follow the list."""
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text(
        "The union met on Tuesday evening to argue over winter wages. "
        "Delegates from the foundry demanded a rise before the new year. "
        "The vote passed.\n",
        encoding="utf-8",
    )
    b.write_text(
        "Evening classes at the institute taught geometry to apprentices. "
        "Attendance doubled once the reading room opened its doors. "
        "Rents along the canal kept climbing through the autumn months.\n",
        encoding="utf-8",
    )
    return [str(a), str(b)]


def _criterion_of(nodeid: str) -> str | None:
    if "test_acceptance.py::" not in nodeid:
        return None
    name = nodeid.rsplit("::", 1)[-1]
    for prefix, label in ACCEPTANCE_CRITERIA.items():
        if name == prefix or name.startswith(prefix + "_"):
            return label
    return None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, bool] = {}
    for status, ok in (("passed", True), ("failed", False), ("error", False)):
        for report in terminalreporter.stats.get(status, []):
            label = _criterion_of(getattr(report, "nodeid", ""))
            if label is None:
                continue
            outcomes[label] = outcomes.get(label, True) and ok
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for label in ACCEPTANCE_CRITERIA.values():
        if label in outcomes:
            verdict = "PASS" if outcomes[label] else "FAIL"
            terminalreporter.write_line(f"{label}: {verdict}")
