"""Python access to the logomon core.

Entities are plain dicts using the same camelCase fields as the JSON export
and the HTTP API. Failures raise LogomonError carrying the error code.
"""

import json as _json

from . import _logomon

__all__ = [
    "LogomonError",
    "Store",
    "assign_homework",
    "ingest_report",
    "assignment_status",
    "child_progress",
    "indefinite_article_for",
    "build_bundle",
    "simulate_device",
    "read_result_archive",
    "import_result_archive",
    "cli",
]


class LogomonError(Exception):
    def __init__(self, body):
        self.body = body
        self.code = body.get("code")
        self.http_status = body.get("httpStatus")
        self.details = body.get("details", {})
        super().__init__(f"{self.code}: {body.get('message')}")


def _call(fn, *args, decode=True):
    try:
        result = fn(*args)
    except _logomon.Error as exc:
        raise LogomonError(_json.loads(str(exc))) from None
    return _json.loads(result) if decode else result


class Store:
    def __init__(self, root):
        self._store = _call(_logomon.Store.open, str(root), decode=False)

    @property
    def root(self):
        return self._store.root

    def put(self, kind, entity):
        return _call(self._store.put, kind, _json.dumps(entity), decode=False)

    def get(self, kind, entity_id):
        return _call(self._store.get, kind, entity_id)

    def list(self, kind):
        return _call(self._store.list, kind)

    def count(self, kind):
        return _call(self._store.count, kind, decode=False)

    def erase(self, kind, entity_id):
        _call(self._store.erase, kind, entity_id, decode=False)

    def register_media_asset(self, kind, source):
        return _call(self._store.register_media_asset, kind, str(source))

    def audit(self):
        return _call(self._store.audit, decode=False)

    def export(self):
        return _call(self._store.export_json)

    def seed(self, document):
        _call(self._store.seed, _json.dumps(document), decode=False)


def assign_homework(store, child_id, template_id, assigned_date, deadline_days):
    return _call(_logomon.assign_homework, store._store, child_id, template_id, assigned_date, deadline_days)


def ingest_report(store, intake):
    return _call(_logomon.ingest_report, store._store, _json.dumps(intake))


def assignment_status(store, assignment_id, today):
    return _call(_logomon.assignment_status, store._store, assignment_id, today)


def child_progress(store, child_id):
    return _call(_logomon.child_progress, store._store, child_id)


def indefinite_article_for(word):
    return _call(_logomon.indefinite_article_for, _json.dumps(word), decode=False)


def build_bundle(store, assignment_id, exported_at=None):
    """Returns (archive bytes, manifest digest)."""
    return _call(_logomon.build_bundle, store._store, assignment_id, exported_at, decode=False)


def simulate_device(archive, error_rate=0.0, seed=0, report_date=None):
    return _call(_logomon.simulate_device, archive, error_rate, seed, report_date, decode=False)


def read_result_archive(archive):
    return _call(_logomon.read_result_archive, archive)


def import_result_archive(store, archive):
    return _call(_logomon.import_result_archive, store._store, archive)


def cli(*args):
    """Runs the command line in-process; returns (exit code, stdout, stderr)."""
    return _logomon.cli([str(a) for a in args])
