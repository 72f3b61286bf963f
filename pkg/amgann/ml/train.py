import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Union

from amgann.constants import DEFAULT_NORMALIZATION, LOG_DATE_FORMAT, LOG_FORMAT, LOG_LEVEL, VIEW_SIZE
from amgann.exceptions import AmgAnnError
from amgann.ml.config.settings import (
    BATCH_SIZE, DEFAULT_ARCHITECTURE, LEARNING_RATE, MAX_EPOCHS, MODELS_DIR, PATIENCE, RANDOM_STATE,
)
from amgann.ml.models.trainer import SurrogateTrainer
from amgann.ml.utils.data_loader import DataLoader

logger = logging.getLogger(__name__)


def run_training(corpus: Optional[Union[str, Path]] = None, second: Optional[Union[str, Path]] = None,
                 split_dir: Optional[Union[str, Path]] = None,
                 out: Union[str, Path] = MODELS_DIR / "surrogate.amgn",
                 architecture: str = DEFAULT_ARCHITECTURE, mode: str = DEFAULT_NORMALIZATION,
                 m: int = VIEW_SIZE, seed: int = RANDOM_STATE, max_epochs: int = MAX_EPOCHS,
                 patience: int = PATIENCE, learning_rate: float = LEARNING_RATE,
                 batch_size: int = BATCH_SIZE) -> Dict[str, object]:
    """
    Load a corpus (or a split directory), train a surrogate, evaluate it and
    save it to ``out``.

    Returns:
        Dict[str, object]: Train/validation/test metrics, per source on the
        test set, plus the best epoch
    """
    logger.info("--- Starting Training Pipeline ---")

    # 1. Load data
    data_loader = DataLoader(mode=mode, seed=seed)
    if split_dir is not None:
        train, val, test = data_loader.load_split_dir(split_dir)
    elif corpus is not None:
        train, val, test = data_loader.load_data(corpus, second)
    else:
        raise ValueError("either a corpus or a split directory is required")
    if train.views.shape[1] != m:
        logger.warning(f"Corpus views are {train.views.shape[1]}x{train.views.shape[1]}, using that instead of m={m}")
        m = train.views.shape[1]
    logger.info(f"Training data: {len(train)}, validation: {len(val)}, test: {len(test)}")

    # 2. Train
    trainer = SurrogateTrainer(architecture, m=m, seed=seed, mode=mode, learning_rate=learning_rate,
                               batch_size=batch_size, max_epochs=max_epochs, patience=patience)
    logger.info(f"Architecture {trainer.model.config.to_row()}, mode {mode}")
    history = trainer.train(train, val)

    # 3. Evaluate
    scores = {
        "train": trainer.evaluate(train),
        "val": trainer.evaluate(val),
        "test": trainer.evaluate_by_source(test),
        "best_epoch": history.best_epoch,
        "epochs": len(history.train_loss),
    }
    logger.info(f"Train loss {scores['train']['loss']:.3e}, MAE {scores['train']['mae']:.3e}")
    logger.info(f"Validation loss {scores['val']['loss']:.3e}, MAE {scores['val']['mae']:.3e}")
    for source, metrics in scores["test"].items():
        logger.info(f"Test ({source}) loss {metrics['loss']:.3e}, MAE {metrics['mae']:.3e}")

    # 4. Save
    trainer.save_model(out, scores)
    logger.info(f"Model saved successfully to {out}")
    logger.info("--- Training Pipeline Finished ---")
    return scores


def main(argv=None) -> int:
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    parser = argparse.ArgumentParser(description="Train the convergence-factor surrogate")
    parser.add_argument("--corpus", type=Path, help="Dataset 1 corpus (or any single corpus)")
    parser.add_argument("--corpus2", type=Path, help="Dataset 2 corpus; enables the dataset-3 split")
    parser.add_argument("--split-dir", type=Path, help="Directory with train/val/test corpora")
    parser.add_argument("--out", type=Path, default=MODELS_DIR / "surrogate.amgn")
    parser.add_argument("--arch", default=DEFAULT_ARCHITECTURE)
    parser.add_argument("--mode", default=DEFAULT_NORMALIZATION)
    parser.add_argument("--seed", type=int, default=RANDOM_STATE)
    parser.add_argument("--epochs", type=int, default=MAX_EPOCHS)
    args = parser.parse_args(argv)
    try:
        run_training(args.corpus, args.corpus2, args.split_dir, args.out, args.arch, args.mode,
                     seed=args.seed, max_epochs=args.epochs)
    except (AmgAnnError, FileNotFoundError, ValueError) as e:
        logger.error(f"An error occurred during model training or evaluation: {str(e)}", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
