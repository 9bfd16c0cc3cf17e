"""CSV ingestion with header checks."""

import csv
import logging

_logger = logging.getLogger(__name__)

REQUIRED = ("id", "timestamp", "value")


def ingest(path, sink):
    _logger.info("ingesting %s", path)
    rows = 0
    handle = open(path, newline="")
    try:
        reader = csv.DictReader(handle)
        missing = [c for c in REQUIRED if c not in (reader.fieldnames or [])]
        if missing:
            _logger.warn(f"{path} lacks columns: {missing}")
            return 0
        for record in reader:
            sink.write(record)
            rows += 1
    except csv.Error:
        _logger.exception("malformed csv in %s", path)
        raise
    finally:
        handle.close()
        _logger.debug("closed %s after %d rows", path, rows)
    return rows
