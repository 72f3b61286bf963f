import numpy as np
import pytest
from pydantic import ValidationError

from amgann.dataset.corpus import write_corpus
from amgann.exceptions import ContractViolation
from amgann.ml.utils.data_loader import DataLoader, SampleArrays, SplitSpec, split, split_dataset3
from amgann.ml.utils.pooling import normalize


def _keys(samples):
    return [s.record.key for s in samples]


def _corpus(make_sample, dataset, count, pattern="a"):
    return [make_sample(dataset=dataset, pattern=pattern, epsilon=float(i // 10), cells=8,
                        theta=round(0.1 + 0.05 * (i % 10), 12), seed=i)
            for i in range(count)]


def test_plain_split_sizes_and_disjointness(make_sample):
    samples = _corpus(make_sample, "ds1", 50)
    train, val, test = split(samples, seed=7)
    assert (len(train), len(val), len(test)) == (30, 10, 10)
    keys = _keys(train) + _keys(val) + _keys(test)
    assert len(set(keys)) == 50


def test_split_is_seeded(make_sample):
    samples = _corpus(make_sample, "ds1", 30)
    assert _keys(split(samples, seed=1)[2]) == _keys(split(samples, seed=1)[2])
    assert _keys(split(samples, seed=1)[2]) != _keys(split(samples, seed=2)[2])


def test_split_spec_validation():
    with pytest.raises(ValidationError):
        SplitSpec(train=0.5, val=0.5, test=0.5)
    assert SplitSpec().train == pytest.approx(0.6)


def test_split_needs_samples(make_sample):
    with pytest.raises(ContractViolation):
        split(_corpus(make_sample, "ds1", 2))


def test_dataset3_composition(make_sample):
    ds1 = _corpus(make_sample, "ds1", 40)
    ds2 = _corpus(make_sample, "ds2", 50, pattern="b")
    train, val, test = split_dataset3(ds1, ds2, seed=0)
    assert sum(s.record.dataset == "ds1" for s in test) == 20
    assert sum(s.record.dataset == "ds2" for s in test) == 10
    assert len(train) + len(val) == 60
    assert len(val) == 15
    ids = [(s.record.dataset,) + s.record.key for s in train + val + test]
    assert len(set(ids)) == 90


def test_sample_arrays(make_sample):
    samples = _corpus(make_sample, "ds1", 5)
    arrays = SampleArrays.from_samples(samples, "mean-scaled")
    assert arrays.views.shape == (5, 4, 4)
    assert np.array_equal(arrays.views[2], normalize(samples[2].view, "mean-scaled").values)
    assert list(arrays.theta) == [s.record.theta for s in samples]
    assert np.all(arrays.log_h == 3.0)
    sub = arrays.subset([4, 0])
    assert len(sub) == 2 and sub.samples[0] is samples[4]
    with pytest.raises(ContractViolation):
        SampleArrays.from_samples([])


def test_loader_reads_corpora_and_split_dirs(tmp_path, make_sample):
    write_corpus(tmp_path / "ds1.amgs", _corpus(make_sample, "ds1", 20))
    write_corpus(tmp_path / "ds2.amgs", _corpus(make_sample, "ds2", 10, pattern="c"))
    loader = DataLoader(mode="sum-scaled", seed=3)

    train, val, test = loader.load_data(tmp_path / "ds1.amgs")
    assert (len(train), len(val), len(test)) == (12, 4, 4)

    train, val, test = loader.load_data(tmp_path / "ds1.amgs", tmp_path / "ds2.amgs")
    assert len(test) == 10 + 2

    for name, part in zip(("train", "val", "test"), split(loader.load_samples(tmp_path / "ds1.amgs"))):
        write_corpus(tmp_path / "split" / f"{name}.amgs", part)
    parts = loader.load_split_dir(tmp_path / "split")
    assert [len(p) for p in parts] == [12, 4, 4]
