"""
Corpus files: one binary frame per sample, appendable and resumable.

Frame layout (all integers little-endian):

    magic b"AMGS" | version u8 | header length u32 | JSON header |
    payload length u32 | payload | b"\\n"

The header is a SampleRecord; the payload is the raw pooled View
(m^2 float64 sums followed by m^2 int64 counts). Normalization happens
when a corpus is loaded for training.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Union
import json
import logging
import struct

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from amgann.constants import CORPUS_MAGIC, CORPUS_VERSION
from amgann.exceptions import CorpusFormatError
from amgann.fem.problem import ProblemSpec
from amgann.ml.utils.pooling import View
from amgann.utils import sanitize_json

logger = logging.getLogger(__name__)

_PREFIX = struct.Struct("<BI")
_LENGTH = struct.Struct("<I")
_TERMINATOR = b"\n"

SampleKey = Tuple[str, Tuple[float, ...], int, float]


class SampleRecord(BaseModel):
    """Metadata and targets of one (problem, theta) sample."""
    model_config = ConfigDict(frozen=True)

    dataset: str
    pattern: str
    epsilon: Optional[float] = None
    epsilons: Optional[Tuple[float, float]] = None
    N: int
    solution: str
    neg_log2_h: int
    theta: float = Field(gt=0.0, le=1.0)
    rho: float = Field(ge=0.0)
    iterations: int
    converged: bool
    n: int
    n_coarse: int
    m: int
    elapsed_mean: float = 0.0
    elapsed_std: float = 0.0
    repetitions: int = 0

    @property
    def exponents(self) -> Tuple[float, ...]:
        return (self.epsilon,) if self.epsilon is not None else tuple(self.epsilons)

    @property
    def case_key(self) -> Tuple[str, Tuple[float, ...], int]:
        """(pattern, exponents, N): the test case of the sample."""
        return (self.pattern, self.exponents, self.N)

    @property
    def key(self) -> SampleKey:
        return (self.pattern, self.exponents, self.N, round(self.theta, 12))

    def problem(self) -> ProblemSpec:
        return ProblemSpec.from_record(self.model_dump(include={"pattern", "epsilon", "epsilons", "N", "solution"}))


@dataclass(frozen=True)
class Sample:
    record: SampleRecord
    view: View


def encode_frame(sample: Sample) -> bytes:
    header = json.dumps(sanitize_json(sample.record.model_dump()), sort_keys=True).encode("utf-8")
    payload = sample.view.to_bytes()
    return b"".join([
        CORPUS_MAGIC,
        _PREFIX.pack(CORPUS_VERSION, len(header)),
        header,
        _LENGTH.pack(len(payload)),
        payload,
        _TERMINATOR,
    ])


def _decode_frames(data: bytes) -> Tuple[List[Sample], int]:
    """
    Decode consecutive frames.

    Returns the samples and the offset just past the last complete frame;
    an incomplete trailing frame is left undecoded.
    """
    samples: List[Sample] = []
    offset = 0
    magic_len = len(CORPUS_MAGIC)
    while offset < len(data):
        start = offset
        head_end = start + magic_len + _PREFIX.size
        if head_end > len(data):
            break
        if data[start:start + magic_len] != CORPUS_MAGIC:
            raise CorpusFormatError(f"bad frame magic at byte {start}")
        version, header_len = _PREFIX.unpack(data[start + magic_len:head_end])
        if version != CORPUS_VERSION:
            raise CorpusFormatError(f"unsupported corpus version {version} at byte {start}")
        header_end = head_end + header_len
        if header_end + _LENGTH.size > len(data):
            break
        (payload_len,) = _LENGTH.unpack(data[header_end:header_end + _LENGTH.size])
        payload_start = header_end + _LENGTH.size
        frame_end = payload_start + payload_len + len(_TERMINATOR)
        if frame_end > len(data):
            break
        if data[frame_end - 1:frame_end] != _TERMINATOR:
            raise CorpusFormatError(f"frame at byte {start} is not newline-terminated")
        try:
            record = SampleRecord(**json.loads(data[head_end:header_end].decode("utf-8")))
            view = View.from_bytes(data[payload_start:frame_end - 1], record.m, record.n)
        except ValueError as exc:
            raise CorpusFormatError(f"bad frame at byte {start}: {exc}") from exc
        samples.append(Sample(record=record, view=view))
        offset = frame_end
    return samples, offset


def read_corpus(path: Union[str, Path]) -> List[Sample]:
    """Read every complete frame; a truncated trailing frame is ignored with a warning."""
    data = Path(path).read_bytes()
    samples, good = _decode_frames(data)
    if good != len(data):
        logger.warning(f"{path}: ignoring {len(data) - good} bytes of an incomplete trailing frame")
    return samples


def completed_keys(path: Union[str, Path]) -> Set[SampleKey]:
    path = Path(path)
    if not path.exists():
        return set()
    return {sample.record.key for sample in read_corpus(path)}


class CorpusWriter:
    """
    Appending writer. Opening an existing file drops an incomplete trailing
    frame left by an interrupted run.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.written = 0
        self._fh = None

    def __enter__(self) -> "CorpusWriter":
        if self.path.exists():
            data = self.path.read_bytes()
            _, good = _decode_frames(data)
            if good != len(data):
                logger.warning(f"Truncating {len(data) - good} bytes of an incomplete frame in {self.path}")
                with open(self.path, "r+b") as fh:
                    fh.truncate(good)
        self._fh = open(self.path, "ab")
        return self

    def write(self, sample: Sample) -> None:
        self._fh.write(encode_frame(sample))
        self._fh.flush()
        self.written += 1

    def write_all(self, samples: Iterable[Sample]) -> None:
        for sample in samples:
            self.write(sample)

    def __exit__(self, *exc) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def write_corpus(path: Union[str, Path], samples: Iterable[Sample]) -> int:
    """Write ``samples`` to a fresh corpus file."""
    path = Path(path)
    if path.exists():
        path.unlink()
    with CorpusWriter(path) as writer:
        writer.write_all(samples)
    return writer.written


def records_frame(samples: Iterable[Sample]) -> pd.DataFrame:
    rows: List[Dict[str, Any]] = []
    for sample in samples:
        row = sample.record.model_dump()
        epsilons = row.pop("epsilons")
        row["epsilon1"], row["epsilon2"] = (epsilons if epsilons is not None else (None, None))
        rows.append(row)
    return pd.DataFrame(rows)


def export_csv(samples: Iterable[Sample], path: Union[str, Path]) -> Path:
    """One CSV row per sample, metadata and targets only."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = records_frame(samples)
    frame.to_csv(path, index=False)
    logger.info(f"Exported {len(frame)} records to {path}")
    return path
