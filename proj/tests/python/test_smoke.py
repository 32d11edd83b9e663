import math

import numpy as np
import pytest

import qsan


def random_rho(rng, d, m=3):
    kets = rng.normal(size=(m, d)) + 1j * rng.normal(size=(m, d))
    kets /= np.linalg.norm(kets, axis=1, keepdims=True)
    w = rng.random(m)
    w /= w.sum()
    return sum(wi * np.outer(k, k.conj()) for wi, k in zip(w, kets))


def test_softmax_channels():
    v = np.array([1.0, 2.0, 3.0])
    e = np.exp(v - v.max())
    assert np.allclose(qsan.softmax_signed(v, "pos"), e / e.sum())
    neg = np.exp(-v - (-v).max())
    assert np.allclose(qsan.softmax_signed(v, "neg"), -neg / neg.sum())
    with pytest.raises(ValueError):
        qsan.softmax_signed(v, "sideways")


def test_cmul_matches_numpy():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    assert np.allclose(qsan.cmul(a, b), a @ b, atol=1e-12)
    with pytest.raises(ValueError):
        qsan.cmul(a, a)


def test_superpose_matches_cartesian_sum():
    rng = np.random.default_rng(2)
    r1, p1 = qsan.word_to_state(rng.random(4), rng.uniform(-3, 3, 4))
    r2, p2 = qsan.word_to_state(rng.random(4), rng.uniform(-3, 3, 4))
    assert math.isclose(np.sum(r1**2), 1.0, abs_tol=1e-12)
    amp, phase = qsan.superpose(r1, p1, r2, p2)
    total = r1 * np.exp(1j * p1) + r2 * np.exp(1j * p2)
    assert np.allclose(amp * np.exp(1j * phase), total, atol=1e-9)


def test_mixture_is_a_density_matrix():
    rng = np.random.default_rng(3)
    rho = qsan.mixture(rng.random((5, 4)), rng.uniform(-3, 3, (5, 4)), rng.normal(size=5))
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert math.isclose(np.trace(rho).real, 1.0, abs_tol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_affinity_and_measurement_oracles():
    rng = np.random.default_rng(4)
    s = [random_rho(rng, 3) for _ in range(2)]
    c = [random_rho(rng, 3) for _ in range(4)]
    m, l = qsan.affinity(s, c)
    expected = np.array([[np.trace(si @ cj).real for cj in c] for si in s])
    assert np.allclose(m, expected, atol=1e-12)
    assert np.allclose(l, np.tanh(expected), atol=1e-12)

    states = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    q = qsan.measure(s[0], states)
    oracle = [(v.conj() @ s[0] @ v).real / (v.conj() @ v).real for v in states]
    assert np.allclose(q, oracle, atol=1e-12)


def test_preprocess_report():
    long = ["long comment one", "long comment two", "long comment three"]
    corpus = [
        qsan.CorpusExample("a", 1, ["post"], long + [long[0], "tiny"]),
        qsan.CorpusExample("b", 0, ["post"], long[:2]),
    ]
    kept, report = qsan.preprocess(corpus)
    assert [e.id for e in kept] == ["a"]
    assert report["duplicate_comments"] == 1
    assert report["short_comments"] == 1
    assert report["sparse_posts"] == 1


def test_train_save_load_explain(tmp_path):
    corpus = qsan.separable_corpus(8, seed=3)
    seen = []
    config = {"d": 4, "k": 3, "z": 4, "epochs": 5}
    model, losses = qsan.fit(corpus, config, on_epoch=lambda e, l: seen.append((e, l)))
    assert len(losses) == 5
    assert [l for _, l in seen] == losses
    assert model.config["d"] == 4
    assert "embedding.amplitude" in model.parameter_names()

    metrics = model.evaluate(corpus)
    assert metrics["tp"] + metrics["fp"] + metrics["fn"] + metrics["tn"] == 8

    path = tmp_path / "m.ckpt"
    model.save(path)
    back = qsan.Model.load(path)
    for ex in corpus:
        assert back.predict(ex) == model.predict(ex)

    record = model.explain(corpus[0], k=2)
    assert record["id"] == corpus[0].id
    assert len(record["important"]) == 2

    corpus_path = tmp_path / "c.jsonl"
    qsan.write_corpus(corpus_path, corpus)
    loaded, errors = qsan.load_corpus(corpus_path)
    assert loaded == corpus and errors == []

    with pytest.raises(qsan.CheckpointError):
        (tmp_path / "bad.ckpt").write_bytes(b"not a checkpoint")
        qsan.Model.load(tmp_path / "bad.ckpt")
    with pytest.raises(ValueError):
        qsan.fit(corpus, {"unknown_key": 1})


def test_gradcheck_passes():
    worst, per_param = qsan.gradcheck(seed=7)
    assert worst < 1e-4
    assert len(per_param) > 0
