"""Training entry points."""

import logging
import math

logger = logging.getLogger(__name__)


def train(model, loader, epochs, lr=1e-3):
    logger.info(f"starting training for {epochs} epochs with lr={lr}")
    history = []
    for epoch in range(epochs):
        total = 0.0
        for batch in loader:
            loss = model.step(batch, lr)
            total += loss
            if math.isnan(loss):
                logger.error("loss became NaN at epoch %d", epoch)
                return history
        mean_loss = total / max(len(loader), 1)
        history.append(mean_loss)
        if mean_loss < 1e-6:
            logger.info(f"converged at epoch {epoch} with loss {mean_loss}")
            break
        elif epoch % 10 == 0:
            logger.debug("epoch %d mean loss %.4f", epoch, mean_loss)
    return history


def evaluate(model, loader):
    logger.debug("running evaluation pass")
    correct = 0
    seen = 0
    try:
        for batch in loader:
            preds = model.predict(batch.inputs)
            correct += (preds == batch.labels).sum()
            seen += len(batch.labels)
    except RuntimeError:
        # Device mismatches surface here in multi-GPU runs.
        logger.exception("evaluation aborted")
        raise
    accuracy = correct / seen if seen else 0.0
    if accuracy < 0.5:
        logger.warning(f"accuracy {accuracy:.2f} is below the random baseline")
    return accuracy
