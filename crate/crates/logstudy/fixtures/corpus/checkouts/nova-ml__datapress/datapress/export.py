import json
import logging

logger = logging.getLogger(__name__)


def export_json(frames, path):
    logger.info("exporting {} frames to {}".format(len(frames), path))
    written = 0
    with open(path, "w") as handle:
        for name, rows in sorted(frames.items()):
            try:
                handle.write(json.dumps({"table": name, "rows": rows}))
                handle.write("\n")
                written += len(rows)
            except TypeError:
                logger.error("table %s holds non-serializable rows", name)
    logger.debug("%d rows written", written)
    return written
