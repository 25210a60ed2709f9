"""
Sessions on the run ledger.

A session is a thin wrapper around one `Connection` and is always inside a transaction: commit
or rollback it, or let `LedgerSessionFactory.begin` do it for you. Query results are mapped back
to the ledger dataclasses without any ORM identity tracking.
"""

from __future__ import annotations

import json
import logging
from contextlib import contextmanager
from dataclasses import asdict
from typing import Any, Iterator, Literal, Optional, Protocol, Sequence

import sqlalchemy as sa
from sqlalchemy import Connection, Engine
from sqlalchemy.exc import SQLAlchemyError
from typing_extensions import assert_never

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.ledger.tables import CheckRecord, LedgerBase, RunRecord, run_summaries

logger = logging.getLogger(__name__)


class LedgerError(BaseToeplitzLatticeException):
    pass


class CheckLike(Protocol):
    name: str
    passed: bool
    value: Optional[float]
    tolerance: Optional[float]
    detail: str


class ReportLike(Protocol):
    command: str
    seed: int
    passed: bool
    config: dict[str, Any]

    @property
    def checks(self) -> Sequence[CheckLike]: ...


class LedgerSessionFactory:
    """
    Creates ledger sessions on an engine. Use one factory per process and call `begin` for every
    transaction.

    params:
        engine:
            The engine the ledger lives on.
        auto_commit:
            Commit when the `begin` block ends without error, roll back otherwise. With False
            every uncommitted transaction is rolled back.

    Example:
        ```python
        import sqlalchemy as sa
        from toeplitz_lattice.ledger.session import LedgerSessionFactory

        ledger = LedgerSessionFactory(sa.create_engine("sqlite://"))
        ledger.create_schema()
        with ledger.begin() as session:
            assert session.runs() == []
        ```
    """

    def __init__(self, engine: Engine, *, auto_commit: bool = True):
        self.engine = engine
        self.auto_commit = auto_commit

    @classmethod
    def from_url(cls, url: str) -> LedgerSessionFactory:
        """Connect to `url` and create the ledger tables if needed."""
        try:
            factory = cls(sa.create_engine(url))
            factory.create_schema()
        except SQLAlchemyError as err:
            raise LedgerError(f"Cannot open ledger {url!r}: {err}") from err
        return factory

    def create_schema(self):
        LedgerBase.metadata.create_all(self.engine)

    @contextmanager
    def begin(self) -> Iterator[LedgerSession]:
        with self.engine.begin() as conn:
            try:
                yield LedgerSession(conn)
                if self.auto_commit:
                    conn.commit()
                elif conn.in_transaction():
                    conn.rollback()
            except Exception as err:
                if self.auto_commit:
                    conn.rollback()
                raise err


class LedgerSession:
    """One transaction on the ledger."""

    def __init__(self, conn: Connection):
        self.conn = conn
        self.state: Literal["open", "closed"] = "open"

    def _ensure_open(self):
        if self.state == "closed":
            raise LedgerError("Session is already closed")
        elif self.state == "open":
            return
        else:
            assert_never(self.state)

    def commit(self):
        self._ensure_open()
        self.conn.commit()
        self.state = "closed"

    def rollback(self):
        self._ensure_open()
        self.conn.rollback()
        self.state = "closed"

    def record(self, report: ReportLike, report_path: Optional[str] = None) -> RunRecord:
        """Insert a run and all of its checks; returns the stored run."""
        self._ensure_open()
        run = RunRecord(
            command=report.command,
            seed=report.seed,
            passed=report.passed,
            config_json=json.dumps(report.config, sort_keys=True, default=str),
            report_path=report_path,
        )
        checks = [
            CheckRecord(
                run_id=run.id,
                name=check.name,
                passed=check.passed,
                value=check.value,
                tolerance=check.tolerance,
                detail=check.detail,
            )
            for check in report.checks
        ]
        self.conn.execute(sa.insert(RunRecord).values(asdict(run)))
        if checks:
            self.conn.execute(sa.insert(CheckRecord), [asdict(c) for c in checks])
        logger.info("ledger: recorded run %s (%s, %d checks)", run.id, run.command, len(checks))
        return run

    def runs(self, command: Optional[str] = None) -> list[RunRecord]:
        self._ensure_open()
        query = sa.select(RunRecord.__table__).order_by(RunRecord.__table__.c.command)
        if command is not None:
            query = query.where(RunRecord.__table__.c.command == command)
        return [RunRecord(**row._mapping) for row in self.conn.execute(query)]

    def checks(self, run_id: str) -> list[CheckRecord]:
        self._ensure_open()
        table = CheckRecord.__table__
        query = sa.select(table).where(table.c.run_id == run_id).order_by(table.c.name)
        return [CheckRecord(**row._mapping) for row in self.conn.execute(query)]

    def summaries(self) -> list[dict[str, Any]]:
        """Rows of the `run_summaries` view: id, command, seed, passed, checks, failed."""
        self._ensure_open()
        query = sa.select(run_summaries).order_by(run_summaries.c.command)
        return [dict(row._mapping) for row in self.conn.execute(query)]
