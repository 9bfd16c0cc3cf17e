import logging

logger = logging.getLogger(__name__)


class CheckpointCallback:
    def __init__(self, directory, keep=3):
        self.directory = directory
        self.keep = keep
        self.saved = []

    async def on_epoch_end(self, epoch, metrics):
        logger.debug("epoch %d metrics: %s", epoch, metrics)
        if metrics.get("loss") is None:
            logger.warning("no loss reported; skipping checkpoint")
            return
        path = f"{self.directory}/epoch-{epoch}.ckpt"
        self.saved.append(path)
        while len(self.saved) > self.keep:
            dropped = self.saved.pop(0)
            logger.info(f"pruned old checkpoint {dropped}")

    async def on_train_end(self, metrics):
        logger.info("training finished with final metrics %s", metrics)
