import logging

logger = logging.getLogger(__name__)

MAX_PASSES = 5


def validate(frame, rules):
    """Apply repair rules until the frame is stable."""
    passes = 0
    while passes < MAX_PASSES:
        violations = [rule.check(frame) for rule in rules]
        violations = [v for v in violations if v]
        if not violations:
            logger.debug("frame stable after %d passes", passes)
            return frame
        elif passes == MAX_PASSES - 1:
            logger.critical("frame still invalid after %d passes: %s", passes + 1, violations)
            raise ValueError(violations)
        else:
            logger.info(f"pass {passes}: repairing {len(violations)} violations")
            for violation in violations:
                frame = violation.repair(frame)
        passes += 1
    return frame
