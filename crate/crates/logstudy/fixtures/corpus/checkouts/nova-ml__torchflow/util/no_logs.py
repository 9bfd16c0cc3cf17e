import logging


def quiet_logger(name):
    handler = logging.NullHandler()
    instance = logging.getLogger(name)
    instance.addHandler(handler)
    return instance
