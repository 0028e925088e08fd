"""
File formats written and read by liboam: count-record CSV, gridded arrays as
CSV with a metadata header or as 16-bit PGM, and sorted-key JSON reports.
Every writer replaces its target atomically.
"""
import contextlib
import json
import logging
import os
import tempfile

import imageio.v3 as iio
import numpy as np
import pandas

from .base import to_serializable
from .detection import CountRecord, RECORD_COLUMNS
from .exceptions import ConfigError

LOG = logging.getLogger('liboam.exports')

PGM_MAXVAL = 65535


@contextlib.contextmanager
def atomic_write(path, mode='w'):
    """Yield a file handle on a temporary file next to ``path``; it replaces
    ``path`` only once the block completes without error"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, tmp_path = tempfile.mkstemp(
        dir=directory, prefix='.' + os.path.basename(path) + '.')
    try:
        with os.fdopen(handle, mode) as stream:
            yield stream
        os.replace(tmp_path, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_path)
        raise
    LOG.debug("wrote %s", path)


def pgm_image(array):
    """Scale a 2-D array to 16-bit with its maximum at PGM_MAXVAL, returned
    row-major along y as image writers expect"""
    data = np.asarray(array, dtype=float)
    if data.ndim != 2:
        raise ValueError("PGM export needs a 2-D array")
    peak = data.max() if data.size else 0.0
    if peak > 0:
        scaled = np.rint(np.clip(data, 0, None) / peak * PGM_MAXVAL)
    else:
        scaled = np.zeros_like(data)
    # image rows run along y; our arrays are indexed [x, y]
    return np.ascontiguousarray(scaled.T.astype(np.uint16))


def read_pgm(path):
    "Read a PGM back into an [x, y] array of integers"
    return np.asarray(iio.imread(path, plugin='pillow')).T.astype(np.int64)


def write_pgm(path, array):
    "Write a max-normalized 16-bit binary PGM"
    image = pgm_image(array)
    with atomic_write(path, 'wb') as stream:
        iio.imwrite(stream, image, plugin='pillow', extension='.pgm')
    return path


def write_grid_csv(path, array, **metadata):
    """Write a 2-D array row-major (one row per x index) with ``# key:
    value`` metadata lines, eg. the grid pitch and wavelength"""
    lines = ["{}: {}".format(k, metadata[k]) for k in sorted(metadata)]
    with atomic_write(path) as stream:
        np.savetxt(stream, np.asarray(array), delimiter=',', fmt='%.10g',
                   header="\n".join(lines))
    return path


def read_grid_csv(path):
    "Returns (array, metadata dict of strings)"
    metadata = {}
    with open(path) as stream:
        for line in stream:
            if not line.startswith('#'):
                break
            key, _, value = line[1:].strip().partition(':')
            metadata[key.strip()] = value.strip()
    return np.loadtxt(path, delimiter=',', ndmin=2), metadata


def records_frame(records):
    "CountRecords as a data frame with the standard columns"
    return pandas.DataFrame([record.row() for record in records],
                            columns=list(RECORD_COLUMNS))


def write_records_csv(path, records):
    with atomic_write(path) as stream:
        records_frame(records).to_csv(stream, index=False,
                                      float_format='%.12g')
    return path


def read_records_csv(path):
    "Returns a list of CountRecords"
    frame = pandas.read_csv(path, dtype={'setting': str})
    missing = set(RECORD_COLUMNS) - set(frame.columns)
    if missing:
        raise ConfigError("{} lacks columns {}".format(path, sorted(missing)))
    return [CountRecord(
        setting=row.setting, mask_offset=float(row.mask_offset),
        duration_s=float(row.duration_s),
        singles_alice=int(row.singles_alice), singles_bob=int(row.singles_bob),
        coincidences=int(row.coincidences))
        for row in frame.itertuples(index=False)]


def write_frame_csv(path, frame):
    with atomic_write(path) as stream:
        frame.to_csv(stream, index=False, float_format='%.12g')
    return path


def dumps_report(report):
    "Sorted-key JSON, identical for identical input"
    return json.dumps(report, indent=2, sort_keys=True,
                      default=to_serializable) + "\n"


def write_json(path, report):
    with atomic_write(path) as stream:
        stream.write(dumps_report(report))
    return path
