"""
Common methods and attributes for the various oamsim commands
"""
import json
import logging
import os

import pandas
import sqlalchemy

import liboam
from liboam import exceptions, exports
from liboam.base import to_serializable

#: Engines by database url, created on first use.
_DB_CONNECTIONS = {}
_DB_CURRENT = None

#: Exit status per error class, most specific first.
EXIT_CODES = (
    (exceptions.ConfigError, 2),
    (exceptions.SamplingError, 3),
    (exceptions.FitError, 4),
    (OSError, 5),
    (exceptions.OAMError, 1),
)


def logger():
    """Returns a handle to a python logger with the name 'liboam.cli'"""
    return logging.getLogger("liboam.cli")


def exit_code_for(error):
    "Map an exception onto the command's exit status"
    for cls, code in EXIT_CODES:
        if isinstance(error, cls):
            return code
    return 1


def print_report(report):
    """Pretty-print a report dictionary"""
    print(json.dumps(report, indent=2, sort_keys=True,
                     default=to_serializable))


def report_header(scenario):
    """Fields every report starts with: the scenario echo and the
    library version"""
    return {'scenario': scenario.echo(), 'version': liboam.__version__,
            'kind': scenario['kind']}


class OutputWriter(object):
    """Writes a run's artifacts into one output directory, honouring the
    requested formats, and remembers what it wrote"""

    def __init__(self, out_dir, formats=('csv', 'pgm', 'json')):
        self.out_dir = out_dir
        self.formats = set(formats)
        self.written = []

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def _done(self, path):
        self.written.append(os.path.basename(path))
        return path

    def image(self, stem, array, **metadata):
        "Write a 2-D array as PGM and/or CSV"
        if 'pgm' in self.formats:
            self._done(exports.write_pgm(self.path(stem + '.pgm'), array))
        if 'csv' in self.formats:
            self._done(exports.write_grid_csv(
                self.path(stem + '.csv'), array, **metadata))

    def frame(self, name, frame):
        if 'csv' in self.formats:
            self._done(exports.write_frame_csv(self.path(name), frame))

    def records(self, name, records):
        "Count records are always written; analysis reads them back"
        self._done(exports.write_records_csv(self.path(name), records))

    def sidecar(self, name, data):
        "JSON that accompanies an image, written whenever images are"
        if self.formats & {'pgm', 'csv', 'json'}:
            self._done(exports.write_json(self.path(name), data))

    def report(self, report, name='report.json'):
        report = dict(report, artifacts=sorted(self.written + [name]))
        if 'json' in self.formats:
            exports.write_json(self.path(name), report)
        return report


def get_db(url=None, db_debug=False):
    """Returns the engine for ``url``, creating it on first use. Without a
    url the engine most recently asked for is returned."""
    global _DB_CURRENT
    if url is None:
        url = _DB_CURRENT
    if url is None:
        raise exceptions.ConfigError("no database url given", key="--db")
    if url not in _DB_CONNECTIONS:
        _DB_CONNECTIONS[url] = sqlalchemy.create_engine(url, echo=db_debug)
    _DB_CURRENT = url
    return _DB_CONNECTIONS[url]


def db_upsert(table, data_frame, tmp_table_prefix="upsert_tmp_"):
    """Store rows through a temporary table: rows whose primary key (the
    first index level) already exists are deleted, then the new rows are
    appended. The data frame must carry named index levels."""
    if not sqlalchemy.inspect(get_db()).has_table(table):
        with get_db().begin() as conn:
            return data_frame.to_sql(table, conn, if_exists="replace")
    keys = []
    if type(data_frame.index) is pandas.MultiIndex:
        keys.extend(data_frame.index.names)
    elif data_frame.index.name:
        keys.append(data_frame.index.name)
    if not keys:
        raise exceptions.ConfigError(
            "no keys could be discerned for {} data frame".format(table))
    tmp_table = f"{tmp_table_prefix}{table}"
    query = f"DELETE FROM {table} WHERE "
    query += f"{keys[0]} IN (SELECT {keys[0]} FROM {tmp_table})"
    logger().debug("upsert query: %s", query)
    with get_db().begin() as conn:
        data_frame.to_sql(tmp_table, conn, if_exists="replace")
        conn.execute(sqlalchemy.text(query))
        conn.execute(sqlalchemy.text(f"DROP TABLE {tmp_table}"))
        return data_frame.to_sql(table, conn, if_exists="append")


def archive_run(url, run_id, records=None, blocks=None):
    """Archive count records and a per-block witness table under
    ``run_id`` in the database at ``url``"""
    get_db(url)
    if records:
        frame = exports.records_frame(records)
        frame.insert(0, 'run_id', run_id)
        frame.insert(1, 'row', range(len(frame)))
        db_upsert('count_records', frame.set_index(['run_id', 'row']))
    if blocks:
        frame = pandas.DataFrame([
            {'run_id': run_id, 'block': i,
             'witness': None if w is None else w.value,
             'witness_sigma': None if w is None else w.sigma}
            for i, w in enumerate(blocks)])
        db_upsert('witness_blocks', frame.set_index(['run_id', 'block']))
    logger().info("archived run %s to database", run_id)
