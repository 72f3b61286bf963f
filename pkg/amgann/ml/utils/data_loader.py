from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from pydantic import BaseModel, model_validator
from sklearn.model_selection import train_test_split

from amgann.constants import DEFAULT_NORMALIZATION
from amgann.dataset.corpus import Sample, read_corpus
from amgann.exceptions import ContractViolation
from amgann.ml.config.settings import (
    DATASET3_TEST_FRACTION_DS1, DATASET3_TEST_FRACTION_DS2, DATASET3_VAL_TRAIN_RATIO,
    RANDOM_STATE, TEST_SIZE, VAL_SIZE,
)
from amgann.ml.utils.pooling import normalize

logger = logging.getLogger(__name__)


class SplitSpec(BaseModel):
    """Train/validation/test fractions of a plain split."""
    train: float = 1.0 - TEST_SIZE - VAL_SIZE
    val: float = VAL_SIZE
    test: float = TEST_SIZE

    @model_validator(mode="after")
    def _fractions(self) -> "SplitSpec":
        if min(self.train, self.val, self.test) < 0 or abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise ValueError(f"split fractions must be non-negative and sum to 1, "
                             f"got {self.train}, {self.val}, {self.test}")
        return self


@dataclass
class SampleArrays:
    """Network inputs and targets of a set of samples, in corpus order."""
    views: np.ndarray
    log_h: np.ndarray
    theta: np.ndarray
    rho: np.ndarray
    samples: List[Sample]

    def __len__(self) -> int:
        return self.rho.shape[0]

    def subset(self, index: Sequence[int]) -> "SampleArrays":
        index = np.asarray(index, dtype=np.int64)
        return SampleArrays(self.views[index], self.log_h[index], self.theta[index],
                            self.rho[index], [self.samples[i] for i in index])

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], mode: str = DEFAULT_NORMALIZATION) -> "SampleArrays":
        if not samples:
            raise ContractViolation("no samples to build arrays from")
        views = [normalize(sample.view, mode).values for sample in samples]
        return cls(
            views=np.stack(views),
            log_h=np.array([s.record.neg_log2_h for s in samples], dtype=np.float64),
            theta=np.array([s.record.theta for s in samples], dtype=np.float64),
            rho=np.array([s.record.rho for s in samples], dtype=np.float64),
            samples=list(samples),
        )


def split(samples: Sequence[Sample], spec: Optional[SplitSpec] = None,
          seed: int = RANDOM_STATE) -> Tuple[List[Sample], List[Sample], List[Sample]]:
    """Shuffled train/validation/test partition with the given fractions."""
    spec = spec or SplitSpec()
    index = np.arange(len(samples))
    if len(index) < 3:
        raise ContractViolation("a split needs at least 3 samples")
    rest, test = train_test_split(index, test_size=spec.test, random_state=seed)
    train, val = train_test_split(rest, test_size=spec.val / (spec.train + spec.val), random_state=seed)
    return tuple([samples[i] for i in sorted(part)] for part in (train, val, test))


def split_dataset3(ds1: Sequence[Sample], ds2: Sequence[Sample],
                   seed: int = RANDOM_STATE) -> Tuple[List[Sample], List[Sample], List[Sample]]:
    """
    Dataset 3: the test set takes half of dataset 1 and a fifth of dataset 2;
    what remains of both is split 1:3 into validation and training.
    """
    keep1, test1 = train_test_split(np.arange(len(ds1)), test_size=DATASET3_TEST_FRACTION_DS1, random_state=seed)
    keep2, test2 = train_test_split(np.arange(len(ds2)), test_size=DATASET3_TEST_FRACTION_DS2, random_state=seed)
    remaining = [ds1[i] for i in sorted(keep1)] + [ds2[i] for i in sorted(keep2)]
    val_parts, train_parts = DATASET3_VAL_TRAIN_RATIO
    train, val = train_test_split(np.arange(len(remaining)),
                                  test_size=val_parts / (val_parts + train_parts), random_state=seed)
    test = [ds1[i] for i in sorted(test1)] + [ds2[i] for i in sorted(test2)]
    logger.info(f"Dataset 3: {len(keep1)} + {len(keep2)} samples for training/validation, "
                f"{len(test1)} + {len(test2)} for testing")
    return ([remaining[i] for i in sorted(train)], [remaining[i] for i in sorted(val)], test)


class DataLoader:
    """Loads corpus files and turns them into network-ready arrays."""

    def __init__(self, mode: str = DEFAULT_NORMALIZATION, seed: int = RANDOM_STATE):
        self.mode = str(getattr(mode, "value", mode))
        self.seed = seed

    def load_samples(self, paths: Union[str, Path, Sequence[Union[str, Path]]]) -> List[Sample]:
        if isinstance(paths, (str, Path)):
            paths = [paths]
        samples: List[Sample] = []
        for path in paths:
            loaded = read_corpus(path)
            logger.info(f"Loaded {len(loaded)} samples from {path}")
            samples.extend(loaded)
        return samples

    def arrays(self, samples: Sequence[Sample]) -> SampleArrays:
        return SampleArrays.from_samples(samples, self.mode)

    def load_data(self, corpus: Union[str, Path], second: Optional[Union[str, Path]] = None
                  ) -> Tuple[SampleArrays, SampleArrays, SampleArrays]:
        """
        Load and split: plain 60/20/20 for one corpus, the dataset-3 rule when
        a second corpus (dataset 2) is given.
        """
        first = self.load_samples(corpus)
        if second is None:
            parts = split(first, seed=self.seed)
        else:
            parts = split_dataset3(first, self.load_samples(second), seed=self.seed)
        train, val, test = (self.arrays(part) for part in parts)
        logger.info(f"Split sizes: train={len(train)}, val={len(val)}, test={len(test)}")
        return train, val, test

    def load_split_dir(self, directory: Union[str, Path]) -> Tuple[SampleArrays, SampleArrays, SampleArrays]:
        """Load train/val/test corpora written by the split command."""
        directory = Path(directory)
        return tuple(self.arrays(self.load_samples(directory / f"{name}.amgs"))
                     for name in ("train", "val", "test"))
