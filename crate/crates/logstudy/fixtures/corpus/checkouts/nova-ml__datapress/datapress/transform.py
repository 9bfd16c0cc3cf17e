import logging

logger = logging.getLogger(__name__)


def normalize(tables, dropna=True):
    logger.debug("normalizing " + str(len(tables)) + " tables")
    normalized = {}
    for name, frame in tables.items():
        before = len(frame)
        if dropna:
            frame = [row for row in frame if None not in row.values()]
            if len(frame) < before:
                logger.info(f"dropped {before - len(frame)} null rows from {name}")
        normalized[name] = frame
    return normalized


def pivot(frame, index, column):
    out = {}
    for row in frame:
        key = row[index]
        if key not in out:
            out[key] = {}
        if column not in row:
            logger.warning("row %r lacks pivot column %s", row, column)
            continue
        out[key][row[column]] = row
    return out
