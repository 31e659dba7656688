import math

import numpy as np
import pytest
import torch

from varmark.errors import Divergence
from varmark.lang import parse_function
from varmark.nn.batch import collate
from varmark.nn.model import ModelBundle
from varmark.teacher import train_corpus_teacher
from varmark.train import (
    METRIC_FIELDS,
    TrainConfig,
    Trainer,
    naturalness_loss,
    prepare_samples,
    total_loss,
    train,
    watermark_loss,
)
from varmark.vocab import build_vocabs

SMALL = dict(feature_dim=16, head_dim=16, hidden=16, batch_size=16, dropout=0.0)


def test_watermark_loss_values():
    assert watermark_loss(torch.tensor([0.0, 1.0, 0.0, 0.0]), 1).item() == 0.0
    assert watermark_loss(torch.full((4,), 0.25), 2).item() == pytest.approx(math.log(4))
    assert watermark_loss(torch.tensor([0.7, 0.1, 0.1, 0.1]), 0).item() == pytest.approx(-math.log(0.7))
    batch = torch.tensor([[0.7, 0.1, 0.1, 0.1], [0.25] * 4])
    assert watermark_loss(batch, torch.tensor([0, 3])).item() == pytest.approx((-math.log(0.7) + math.log(4)) / 2)


def test_naturalness_loss_values():
    onehot = torch.eye(3)[None]
    logp = torch.log(torch.where(onehot > 0, 1.0, 1e-30))
    assert naturalness_loss(logp, onehot).item() == pytest.approx(0.0, abs=1e-6)
    label = torch.tensor([[1.0, 0.0, 0.0]])
    assert naturalness_loss(torch.tensor([[-1.0, -2.0, -3.0]]), label).item() == pytest.approx(1.0)


def test_naturalness_loss_random_case():
    rng = np.random.default_rng(0)
    phi = rng.dirichlet(np.ones(3), size=(2, 4))
    theta = rng.dirichlet(np.ones(3), size=(2, 4))
    expected = np.mean([-(phi[b] * np.log(theta[b])).sum() for b in range(2)])
    got = naturalness_loss(torch.tensor(np.log(theta)), torch.tensor(phi)).item()
    assert got == pytest.approx(expected)


def test_naturalness_ignores_zero_labels_under_neg_inf():
    logp = torch.tensor([[0.0, float("-inf")]])
    assert naturalness_loss(logp, torch.tensor([[1.0, 0.0]])).item() == 0.0


def test_total_loss_endpoints():
    a, b = torch.tensor(2.0), torch.tensor(5.0)
    assert total_loss(a, b, 1.0).item() == 2.0
    assert total_loss(a, b, 0.0).item() == 5.0
    assert total_loss(a, b, 0.6).item() == pytest.approx(3.2)
    assert TrainConfig().alpha == 0.6 and TrainConfig().lr == 0.00025 and TrainConfig().tau == 0.5


@pytest.mark.parametrize("bad", [dict(alpha=1.5), dict(alpha=-0.1), dict(tau=0.0), dict(bits_per_var=0)])
def test_config_invariants(bad):
    with pytest.raises(ValueError):
        TrainConfig(**bad)


def test_config_from_file(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[train]\nalpha = 0.8\nepochs = 3\n")
    cfg = TrainConfig.from_file(p, seed=7)
    assert (cfg.alpha, cfg.epochs, cfg.seed) == (0.8, 3, 7)
    p.write_text("[train]\nbogus = 1\n")
    with pytest.raises(ValueError):
        TrainConfig.from_file(p)


@pytest.fixture(scope="module")
def setup(small_functions):
    fns = small_functions[:12]
    vocabs = build_vocabs(fns)
    teacher = train_corpus_teacher(fns)
    cfg = TrainConfig(alpha=1.0, lr=1e-3, **SMALL)
    samples = prepare_samples(fns, vocabs, teacher, cfg)
    return fns, vocabs, teacher, cfg, samples


def _fresh(setup, **over):
    fns, vocabs, teacher, cfg, samples = setup
    cfg = TrainConfig(**{**cfg.__dict__, **over})
    bundle = ModelBundle.create(cfg.model_config(), vocabs, seed=0)
    return Trainer(bundle, cfg), samples


def test_samples_carry_label_rows(setup):
    *_, cfg, samples = setup
    s = samples[0]
    assert s.label.shape == (cfg.max_name_len + 1, len(setup[1].names))
    assert np.allclose(s.label[0].sum(), 1.0, atol=1e-6)


def test_one_step_decreases_wa_loss_on_that_sample(setup):
    trainer, samples = _fresh(setup, lr=1e-3)
    sample = [samples[0]]
    chunk = np.array([2])
    batch = collate([sample[0].graph], trainer.bundle.vocabs)

    def l_wa():
        trainer.gen.manual_seed(123)
        trainer.model.train()
        with torch.no_grad():
            return trainer.forward(batch, torch.from_numpy(chunk), None)[0].item()

    before = l_wa()
    trainer.gen.manual_seed(123)
    trainer.step(sample, chunk)
    assert l_wa() < before


def test_straight_through_reaches_embedding_encoder(setup):
    trainer, samples = _fresh(setup, alpha=1.0)
    batch = collate([s.graph for s in samples[:8]], trainer.bundle.vocabs)
    trainer.model.zero_grad()
    l_wa, _, l_t = trainer.forward(batch, torch.arange(8) % 4, None)
    l_t.backward()
    m = trainer.model
    for p in [*m.emb_encoder.parameters(), m.decoder.out.weight, m.emb_nodes.kinds.weight]:
        assert p.grad is not None and p.grad.norm().item() > 0


def test_chunks_are_uniform_within_three_sigma(setup, monkeypatch):
    trainer, samples = _fresh(setup)
    seen = []
    monkeypatch.setattr(trainer, "step", lambda s, c: (seen.extend(c.tolist()), (0.0, 0.0, 0.0))[1])
    many = samples * (4000 // len(samples) + 1)
    trainer.epoch(many)
    n = len(seen)
    counts = np.bincount(seen, minlength=4)
    sigma = math.sqrt(n * 0.25 * 0.75)
    assert np.all(np.abs(counts - n / 4) < 3 * sigma)


def test_nan_loss_raises_divergence(setup):
    trainer, samples = _fresh(setup)
    with torch.no_grad():
        trainer.model.classifier.fc2.bias.fill_(float("nan"))
    with pytest.raises(Divergence):
        trainer.epoch(samples[:4])


def test_training_is_reproducible(small_functions):
    tr, va = small_functions[:10], small_functions[10:14]
    teacher = train_corpus_teacher(tr)
    cfg = TrainConfig(epochs=2, seed=5, **SMALL)
    a = train(tr, va, teacher, cfg)
    b = train(tr, va, teacher, cfg)
    assert a.metrics_csv() == b.metrics_csv()
    assert a.metrics_csv().splitlines()[0] == ",".join(METRIC_FIELDS)
    assert len(a.metrics_csv().splitlines()) == 3
    for k, v in a.bundle.model.state_dict().items():
        assert torch.equal(v, b.bundle.model.state_dict()[k])


@pytest.mark.slow
def test_toy_corpus_channel_is_learnable():
    """50 functions, L=2: the four heads separate the four classes."""
    from varmark.corpus import split_corpus, synthesize

    recs = synthesize(60, seed=11)
    tr, va, _ = split_corpus(recs, valid_frac=10 / 60, test_frac=0.0, seed=0)
    P = lambda rs: [parse_function(r["code"], fn_id=r["id"]) for r in rs]  # noqa: E731
    trf, vaf = P(tr), P(va)
    assert len(trf) == 50
    # watermark-only objective; see the decisions ledger for the blended case
    cfg = TrainConfig(alpha=1.0, lr=1e-3, epochs=200, patience=10, batch_size=16)
    res = train(trf, vaf, train_corpus_teacher(trf), cfg)
    assert max(r["val_bitacc"] for r in res.metrics) > 0.9
    assert len(res.metrics) <= 200
