import json

import numpy as np
import pytest

from amgann.exceptions import ContractViolation
from amgann.ml.models.network import SurrogateModel
from amgann.ml.models.trainer import AdamState, SurrogateTrainer, adam_step
from amgann.ml.utils.data_loader import SampleArrays


def _linear_data(count, m=6, seed=0):
    rng = np.random.default_rng(seed)
    theta = np.linspace(0.12, 0.72, count)
    return SampleArrays(
        views=rng.standard_normal((count, m, m)),
        log_h=np.full(count, 4.0),
        theta=theta,
        rho=0.1 + 0.5 * theta,
        samples=[],
    )


def test_adam_first_step_moves_by_learning_rate():
    p = np.array([1.0, -2.0])
    g = np.array([0.3, -4.0])
    state = AdamState.zeros_like([p])
    adam_step([p], [g], state, lr=0.01)
    assert np.allclose(p, [0.99, -1.99])
    assert state.t == 1


def test_adam_constant_gradient_steps_by_learning_rate():
    p = np.array([1.0, -2.0, 0.5])
    g = np.array([0.3, -4.0, 1e-2])
    state = AdamState.zeros_like([p])
    for _ in range(999):
        adam_step([p], [g], state, lr=0.01)
    before = p.copy()
    adam_step([p], [g], state, lr=0.01)
    assert np.allclose(before - p, 0.01 * np.sign(g), rtol=1e-5)


def test_adam_zero_gradient_leaves_parameters():
    p = np.array([1.0, -2.0])
    state = AdamState.zeros_like([p])
    for _ in range(5):
        adam_step([p], [np.zeros(2)], state, lr=0.01)
    assert np.array_equal(p, [1.0, -2.0])


def test_training_is_deterministic():
    data = _linear_data(12)
    histories = []
    for _ in range(2):
        trainer = SurrogateTrainer("2 1 0.25 - - - 4 4 1", m=6, seed=5, batch_size=4, max_epochs=4)
        histories.append(trainer.train(data, data).to_dict())
    assert histories[0] == histories[1]


def test_early_stopping_restores_best():
    data = _linear_data(8)
    trainer = SurrogateTrainer("2 1 0 - - - 4 4 1", m=6, seed=1, learning_rate=0.0,
                               max_epochs=100, patience=2)
    history = trainer.train(data, data)
    assert history.stopped_early
    assert history.best_epoch == 0
    assert len(history.val_loss) == 3


def test_best_validation_weights_kept():
    data = _linear_data(10)
    trainer = SurrogateTrainer("2 1 0 - - - 4 4 1", m=6, seed=1, learning_rate=5e-2,
                               batch_size=3, max_epochs=30, patience=30)
    history = trainer.train(data, data)
    assert trainer.evaluate(data)["loss"] == pytest.approx(min(history.val_loss))


def test_overfits_ten_samples():
    data = _linear_data(10)
    trainer = SurrogateTrainer("4 1 0 - - - 16 16 2", m=6, seed=0, learning_rate=5e-3,
                               batch_size=10, max_epochs=1000, patience=1000)
    trainer.train(data, data)
    assert trainer.evaluate(data)["loss"] < 1e-6


def test_empty_sets_rejected():
    data = _linear_data(4)
    empty = data.subset([])
    with pytest.raises(ContractViolation):
        SurrogateTrainer("2 1 0 - - - 4 4 1", m=6).train(data, empty)


def test_evaluate_by_source(make_sample):
    samples = [make_sample(dataset="ds1" if i % 2 else "ds2", theta=0.1 + 0.05 * i, seed=i, m=6)
               for i in range(6)]
    data = SampleArrays.from_samples(samples)
    report = SurrogateTrainer("2 1 0 - - - 4 4 1", m=6).evaluate_by_source(data)
    assert set(report) == {"all", "ds1", "ds2"}
    assert set(report["ds1"]) == {"loss", "mae"}


def test_save_model_writes_sidecar(tmp_path):
    data = _linear_data(6)
    trainer = SurrogateTrainer("2 1 0 - - - 4 4 1", m=6, seed=3, max_epochs=2)
    trainer.train(data, data)
    path = tmp_path / "surrogate.amgn"
    trainer.save_model(path, {"test": trainer.evaluate(data)})
    sidecar = json.loads(path.with_suffix(".json").read_text())
    assert sidecar["architecture"] == "2 1 0 - - - 4 4 1"
    assert len(sidecar["history"]["train_loss"]) == 2
    reloaded = SurrogateTrainer("2 1 0 - - - 4 4 1", m=6)
    reloaded.load_model(path)
    assert np.allclose(reloaded.predict(data), trainer.predict(data))
    assert isinstance(reloaded.model, SurrogateModel) and reloaded.seed == 3
