import logging

logger = logging.getLogger(__name__)


def watch(stream, thresholds):
    alerts = 0
    for sample in stream:
        match sample.kind:
            case "loss":
                if sample.value > thresholds.get("loss", 1.0):
                    logger.warning(f"loss spike: {sample.value}")
                    alerts += 1
            case "grad_norm":
                logger.debug("grad norm %.3f", sample.value)
            case _:
                logger.info(f"ignoring sample kind {sample.kind}")
    try:
        rate = alerts / len(thresholds)
    except ZeroDivisionError:
        logger.exception("no thresholds configured")
        raise
    else:
        logger.info("alert rate %.2f", rate)
    return alerts
