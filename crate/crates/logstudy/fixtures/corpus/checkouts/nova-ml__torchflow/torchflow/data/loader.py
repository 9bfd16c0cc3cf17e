import json
import logging
import time

log = logging.getLogger("torchflow.data")


class ShardedLoader:
    """Reads newline-delimited JSON shards with retry."""

    def __init__(self, paths, batch_size=32, max_retries=3):
        log.info("loader created with %d shards", len(paths))
        self.paths = list(paths)
        self.batch_size = batch_size
        self.max_retries = max_retries

    def _read_shard(self, path):
        attempt = 0
        while attempt < self.max_retries:
            try:
                with open(path) as handle:
                    log.debug(f"reading shard {path}")
                    return [json.loads(line) for line in handle]
            except OSError:
                attempt += 1
                time.sleep(0.1 * attempt)
        log.error("giving up on shard {} after {} attempts".format(path, self.max_retries))
        return []

    def __iter__(self):
        for path in self.paths:
            rows = self._read_shard(path)
            batch = []
            for row in rows:
                batch.append(row)
                if len(batch) == self.batch_size:
                    yield batch
                    batch = []
            if batch:
                yield batch
