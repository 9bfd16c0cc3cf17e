def incomplete(
    logger.info("this file never parsed")
