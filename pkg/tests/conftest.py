"""
Shared fixtures: quiet single-threaded settings and small in-memory tables
"""

import pytest

from lawmine.config.settings import reset_settings
from lawmine.ingest import Dataset
from lawmine.language.terms import Variable, Vocabulary
from lawmine.services.monitoring_service import get_monitoring_service


@pytest.fixture(scope="session", autouse=True)
def lawmine_environment():
    with pytest.MonkeyPatch.context() as mp:
        mp.setenv("LAWMINE_WORKERS", "1")
        mp.setenv("LAWMINE_LOG_LEVEL", "WARNING")
        mp.setenv("LAWMINE_LOG_FORMAT", "text")
        reset_settings()
        yield
    reset_settings()


@pytest.fixture
def monitoring():
    service = get_monitoring_service()
    service.reset()
    yield service
    service.reset()


@pytest.fixture
def flow_vocab() -> Vocabulary:
    return Vocabulary(
        (
            Variable.nominal("Proto", ["TCP", "UDP", "ICMP"]),
            Variable.nominal("DstIp", ["internal", "external"]),
            Variable.ordinal("SrcPort", 0, 65535),
            Variable.ordinal("DstPort", 0, 65535),
            Variable.ordinal("Packets", 1, 1000),
            Variable.ordinal("Bytes", 20, 1500000),
        )
    )


def flow_rows(count: int = 400):
    """TCP web traffic, UDP DNS to external resolvers and a little ICMP; Bytes stays within 40..1500 per packet"""
    rows = []
    for i in range(count):
        packets = 1 + i % 7
        if i % 20 == 0:
            rows.append({"Proto": "ICMP", "DstIp": "internal", "SrcPort": 0, "DstPort": 0, "Packets": 1, "Bytes": 64})
        elif i % 4 == 0:
            rows.append(
                {"Proto": "UDP", "DstIp": "external", "SrcPort": 40000 + i, "DstPort": 53, "Packets": 1, "Bytes": 80 + i % 50}
            )
        else:
            rows.append(
                {
                    "Proto": "TCP",
                    "DstIp": "internal" if i % 3 else "external",
                    "SrcPort": 40000 + i,
                    "DstPort": 443 if i % 2 else 80,
                    "Packets": packets,
                    "Bytes": packets * (40 + i % 1400),
                }
            )
    return rows


@pytest.fixture
def flows(flow_vocab) -> Dataset:
    return Dataset.from_rows(flow_rows(), flow_vocab.names)
