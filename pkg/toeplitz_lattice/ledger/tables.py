"""
Tables of the run ledger.

Every CLI invocation with `--ledger URL` stores one `RunRecord` and one `CheckRecord` per
checked invariant. The `run_summaries` view aggregates the checks of each run, so
"which runs failed, and how many checks did they fail" is a single select.
"""

from __future__ import annotations

from typing import Any, Optional
from uuid import uuid4

import sqlalchemy as sa
from sqlalchemy.exc import NoInspectionAvailable
from sqlalchemy.ext import compiler
from sqlalchemy.orm import DeclarativeBase, Mapped, MappedAsDataclass, mapped_column
from sqlalchemy.schema import DDLElement


class LedgerBase(MappedAsDataclass, DeclarativeBase):
    pass


class RunRecord(LedgerBase):
    __tablename__ = "runs"

    command: Mapped[str] = mapped_column(sa.String(64))
    seed: Mapped[int]
    passed: Mapped[bool]
    config_json: Mapped[str] = mapped_column(sa.Text())
    report_path: Mapped[Optional[str]] = mapped_column(sa.Text(), default=None)
    id: Mapped[str] = mapped_column(primary_key=True, default_factory=lambda: str(uuid4()))


class CheckRecord(LedgerBase):
    __tablename__ = "checks"

    run_id: Mapped[str] = mapped_column(sa.ForeignKey("runs.id"))
    name: Mapped[str] = mapped_column(sa.String(128))
    passed: Mapped[bool]
    value: Mapped[Optional[float]] = mapped_column(default=None)
    tolerance: Mapped[Optional[float]] = mapped_column(default=None)
    detail: Mapped[str] = mapped_column(sa.Text(), default="")
    id: Mapped[str] = mapped_column(primary_key=True, default_factory=lambda: str(uuid4()))


class CreateView(DDLElement):
    """`CREATE VIEW name AS <selectable>`, with literal binds so it works on every backend."""

    def __init__(self, name: str, selectable: sa.Select[Any]):
        self.name = name
        self.selectable = selectable


class DropView(DDLElement):
    def __init__(self, name: str, cascade: bool = False, if_exists: bool = False):
        self.name = name
        self.cascade = cascade
        self.if_exists = if_exists


@compiler.compiles(CreateView)
def _create_view(element: CreateView, compiler, **kw):
    return 'CREATE VIEW "%s" AS %s' % (
        element.name,
        compiler.sql_compiler.process(element.selectable, literal_binds=True),
    )


@compiler.compiles(DropView)
def _drop_view(element: DropView, compiler, **kw):
    text = "DROP VIEW "
    if element.if_exists:
        text += "IF EXISTS "
    text += f'"{element.name}"'
    if element.cascade:
        text += " CASCADE"
    return text


def _view_exists(ddl, target, connection, **kw) -> bool:
    try:
        return ddl.name in sa.inspect(connection).get_view_names()
    except NoInspectionAvailable:
        return False


def _view_missing(ddl, target, connection, **kw) -> bool:
    return not _view_exists(ddl, target, connection, **kw)


def view_table(
    name: str, metadata: sa.MetaData, selectable: sa.Select[Any], *, cascade: bool = False
) -> sa.TableClause:
    """
    A table clause backed by a view, created after and dropped before the tables of `metadata`.

    params:
        name:
            The view name.
        metadata:
            The metadata whose `create_all` / `drop_all` manage the view.
        selectable:
            The select statement defining the view.
        cascade:
            Drop with CASCADE (not supported by SQLite).
    """
    view = sa.table(name, *(sa.column(col.name, col.type) for col in selectable.selected_columns))
    sa.event.listen(
        metadata,
        "after_create",
        CreateView(name, selectable).execute_if(callable_=_view_missing),  # type: ignore
    )
    sa.event.listen(
        metadata,
        "before_drop",
        DropView(name, cascade=cascade).execute_if(callable_=_view_exists),  # type: ignore
    )
    return view


def run_summary_query() -> sa.Select[Any]:
    checks = CheckRecord.__table__
    runs = RunRecord.__table__
    return (
        sa.select(
            runs.c.id,
            runs.c.command,
            runs.c.seed,
            runs.c.passed,
            sa.func.count(checks.c.id).label("checks"),
            sa.func.coalesce(
                sa.func.sum(sa.case((checks.c.passed == sa.false(), 1), else_=0)), 0
            ).label("failed"),
        )
        .select_from(runs.outerjoin(checks, checks.c.run_id == runs.c.id))
        .group_by(runs.c.id, runs.c.command, runs.c.seed, runs.c.passed)
    )


run_summaries = view_table("run_summaries", LedgerBase.metadata, run_summary_query())
