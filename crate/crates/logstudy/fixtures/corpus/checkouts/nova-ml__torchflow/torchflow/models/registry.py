import functools
import logging

logging.info("model registry imported")

_REGISTRY = {}


def register(name):
    def wrap(cls):
        @functools.wraps(cls)
        def factory(*args, **kwargs):
            return cls(*args, **kwargs)

        if name in _REGISTRY:
            # Duplicate registrations shadow silently otherwise.
            logging.critical("model name %r registered twice", name)
        _REGISTRY[name] = factory
        logging.debug(f"registered model {name}")
        return cls

    return wrap


def build(name, **kwargs):
    if name not in _REGISTRY:
        logging.error(f"unknown model {name}; known: {sorted(_REGISTRY)}")
        raise KeyError(name)
    return _REGISTRY[name](**kwargs)
