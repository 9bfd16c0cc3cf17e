"""Sequential experiment runner."""

import logging
import time

logger = logging.getLogger("gradientlab.runner")


def run_all(experiments, budget_seconds):
    started = time.monotonic()
    results = {}
    queue = list(experiments)
    while queue:
        experiment = queue.pop(0)
        elapsed = time.monotonic() - started
        if elapsed > budget_seconds:
            logging.warning("budget exhausted with %d experiments pending", len(queue) + 1)
            break
        logger.info(f"running {experiment.name} ({elapsed:.0f}s elapsed)")
        results[experiment.name] = experiment.run()
    logger.debug("completed %d experiments", len(results))
    return results
