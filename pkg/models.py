import json
import logging
import uuid
from datetime import datetime, timezone

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

logger = logging.getLogger(__name__)

Base = declarative_base()


def _utcnow():
    return datetime.now(timezone.utc)


class Run(Base):
    __tablename__ = 'runs'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    command = Column(String(50), nullable=False)
    seed = Column(Integer)
    version = Column(String(20))
    exit_code = Column(Integer, default=0)
    report = Column(Text)  # canonical JSON of the report
    created_at = Column(DateTime, default=_utcnow)

    # Relationship to the checks found in the report
    checks = relationship("RunCheck", back_populates="run", cascade="all, delete-orphan")

    def __init__(self, id=None, command=None, seed=None, version=None, exit_code=0, report=None):
        self.id = id or str(uuid.uuid4())
        self.command = command
        self.seed = seed
        self.version = version
        self.exit_code = exit_code
        self.report = report

    def to_dict(self):
        return {
            'id': self.id,
            'command': self.command,
            'seed': self.seed,
            'version': self.version,
            'exit_code': self.exit_code,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'check_count': len(self.checks) if self.checks else 0,
        }


class RunCheck(Base):
    __tablename__ = 'run_checks'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    run_id = Column(String(36), ForeignKey('runs.id'), nullable=False)
    name = Column(String(200), nullable=False)
    lhs = Column(Float)
    rhs = Column(Float)
    holds = Column(Boolean, default=True)

    run = relationship("Run", back_populates="checks")

    def __init__(self, id=None, run_id=None, name=None, lhs=None, rhs=None, holds=True):
        self.id = id or str(uuid.uuid4())
        self.run_id = run_id
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        self.holds = holds

    def to_dict(self):
        return {
            'id': self.id,
            'run_id': self.run_id,
            'name': self.name,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'holds': self.holds,
        }


def init_db(database_url):
    """
    Create the engine and tables for a history database

    Args:
        database_url (str): SQLAlchemy URL, e.g. sqlite:///runs.db

    Returns:
        sessionmaker: factory for sessions bound to the engine
    """
    engine = create_engine(database_url, pool_pre_ping=True)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine, expire_on_commit=False)


def extract_checks(report, prefix=''):
    """
    Collect every {"lhs", "rhs", "holds"} entry in a report tree

    Returns:
        list: (dotted name, lhs, rhs, holds) tuples
    """
    found = []
    if isinstance(report, dict):
        if 'holds' in report and 'lhs' in report and 'rhs' in report:
            found.append((prefix or 'report', report['lhs'], report['rhs'], bool(report['holds'])))
        for key, value in report.items():
            found.extend(extract_checks(value, f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(report, list):
        for index, value in enumerate(report):
            found.extend(extract_checks(value, f"{prefix}[{index}]"))
    return found


def record_run(session_factory, command, seed, version, exit_code, report):
    """
    Store one CLI run and the checks in its report

    Returns:
        str: the new run id
    """
    session = session_factory()
    try:
        run = Run(command=command, seed=seed, version=version, exit_code=exit_code,
                  report=json.dumps(report, sort_keys=True))
        session.add(run)
        for name, lhs, rhs, holds in extract_checks(report):
            run.checks.append(RunCheck(run_id=run.id, name=name, lhs=lhs, rhs=rhs, holds=holds))
        session.commit()
        logger.debug(f"Recorded run {run.id} with {len(run.checks)} checks")
        return run.id
    except Exception as e:
        session.rollback()
        logger.error(f"Error recording run: {str(e)}")
        raise
    finally:
        session.close()


def list_runs(session_factory, limit=20, command=None):
    """Most recent runs first"""
    session = session_factory()
    try:
        query = session.query(Run)
        if command:
            query = query.filter(Run.command == command)
        runs = query.order_by(Run.created_at.desc()).limit(limit).all()
        return [run.to_dict() for run in runs]
    finally:
        session.close()
