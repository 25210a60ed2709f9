# --------------------------------------

# The ledger stores runs and checks with SQLAlchemy core only. Rows come back as plain
# dataclasses, and the run_summaries view aggregates checks per run without any primary key
# guessing: one row per run, however many checks it has.

# --------------------------------------

from contextlib import contextmanager

import pytest
import sqlalchemy as sa
from rich import print
from sqlalchemy.pool import StaticPool

from toeplitz_lattice.cli.reports import SuiteReport
from toeplitz_lattice.ledger.session import LedgerError, LedgerSessionFactory
from toeplitz_lattice.ledger.tables import LedgerBase, RunRecord, run_summaries, view_table


@contextmanager
def init_ledger(auto_commit: bool = True):
    engine = sa.create_engine("sqlite://", poolclass=StaticPool, echo=False)
    ledger = LedgerSessionFactory(engine, auto_commit=auto_commit)
    ledger.create_schema()
    yield ledger
    LedgerBase.metadata.drop_all(engine)


def make_report(command: str, failures: int, total: int = 3) -> SuiteReport:
    report = SuiteReport(command, 42, {"command": command, "seed": 42})
    for i in range(total):
        report.check(f"{command}.check{i}", i >= failures, 1e-12 * i, 1e-9)
    return report


def test_record_and_read_back():
    with init_ledger() as ledger:
        with ledger.begin() as session:
            run = session.record(make_report("toeplitz", 0), "reports/toeplitz-42.json")

        with ledger.begin() as session:
            runs = session.runs()
            print(runs)
            assert len(runs) == 1
            assert isinstance(runs[0], RunRecord)
            assert runs[0].id == run.id
            assert runs[0].passed
            assert runs[0].report_path == "reports/toeplitz-42.json"
            checks = session.checks(run.id)
            assert [c.name for c in checks] == [f"toeplitz.check{i}" for i in range(3)]
            assert checks[2].value == pytest.approx(2e-12)


def test_summary_view_counts_failures():
    with init_ledger() as ledger:
        with ledger.begin() as session:
            session.record(make_report("povm", 2))
            session.record(make_report("quantize", 0, total=5))
            session.record(make_report("asymptotics", 0, total=0))

        with ledger.begin() as session:
            summaries = {row["command"]: row for row in session.summaries()}
            assert summaries["povm"]["checks"] == 3
            assert summaries["povm"]["failed"] == 2
            assert not summaries["povm"]["passed"]
            assert summaries["quantize"]["checks"] == 5
            assert summaries["quantize"]["failed"] == 0
            assert summaries["asymptotics"]["checks"] == 0
            assert [r.command for r in session.runs("povm")] == ["povm"]


def test_failed_block_is_rolled_back():
    with init_ledger() as ledger:
        with pytest.raises(RuntimeError):
            with ledger.begin() as session:
                session.record(make_report("toeplitz", 0))
                raise RuntimeError("boom")

        with ledger.begin() as session:
            assert session.runs() == []


def test_closed_session_refuses_work():
    with init_ledger(auto_commit=False) as ledger:
        with ledger.begin() as session:
            session.record(make_report("toeplitz", 0))
            session.commit()
            with pytest.raises(LedgerError):
                session.runs()

        with ledger.begin() as session:
            assert len(session.runs()) == 1


def test_unreachable_ledger_is_a_ledger_error(tmp_path):
    with pytest.raises(LedgerError):
        LedgerSessionFactory.from_url(f"sqlite:///{tmp_path}/missing/dir/ledger.db")


def test_view_exposes_the_selected_columns():
    assert [c.name for c in run_summaries.columns] == ["id", "command", "seed", "passed", "checks", "failed"]
    assert isinstance(run_summaries.c.checks.type, sa.Integer)


def test_view_table_is_created_and_dropped_with_its_metadata():
    metadata = sa.MetaData()
    numbers = sa.Table("numbers", metadata, sa.Column("value", sa.Integer, primary_key=True))
    evens = view_table("evens", metadata, sa.select(numbers.c.value).where(numbers.c.value % 2 == 0))
    engine = sa.create_engine("sqlite://", poolclass=StaticPool)

    metadata.create_all(engine)
    with engine.begin() as connection:
        connection.execute(sa.insert(numbers), [{"value": v} for v in range(5)])
        assert connection.scalars(sa.select(evens.c.value).order_by(evens.c.value)).all() == [0, 2, 4]
    assert "evens" in sa.inspect(engine).get_view_names()

    metadata.drop_all(engine)
    assert sa.inspect(engine).get_view_names() == []
