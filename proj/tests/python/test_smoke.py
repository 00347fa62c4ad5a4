"""Smoke tests for the python module: imports, core numerics, and a tiny
end-to-end train/rank/explain round trip."""

import math

import pytest

import attnrank


def test_version_and_tokenize():
    assert attnrank.__version__
    assert attnrank.tokenize("Who is Chairman?") == ["who", "is", "chairman", "?"]
    assert attnrank.tokenize("") == []


def test_lrelu_and_softmax():
    assert attnrank.lrelu([3.0], 0.01) == [3.0]
    assert attnrank.lrelu([-2.0], 0.01) == pytest.approx([-0.02])
    w = attnrank.softmax([0.0, 0.0, 0.0])
    assert w == pytest.approx([1 / 3] * 3)
    assert sum(attnrank.softmax([1000.0, 999.0])) == pytest.approx(1.0)


def test_overlap_flags():
    flags = attnrank.overlap_flags(["who", "is"], ["is", "bob"])
    assert flags == [1, 0]


def test_metrics():
    def question(grades):
        ranked = [
            attnrank.RankedCandidate(f"a{i}", 1.0 - 0.1 * i, g, 5) for i, g in enumerate(grades)
        ]
        return attnrank.RankedQuestion("q", ranked)

    assert attnrank.mrr([question([1, 0])]) == 1.0
    assert attnrank.mrr([question([0, 1, 0]), question([0, 0, 0, 1])]) == pytest.approx(0.375)
    assert attnrank.ndcg([question([3, 2, 1])]) == 1.0
    expected = (7.0 / math.log2(3.0)) / 7.0
    assert attnrank.ndcg([question([0, 3])]) == pytest.approx(expected, abs=1e-12)


def test_vocab_and_embeddings(tmp_path):
    corpus = [attnrank.tokenize("the cat sat"), attnrank.tokenize("the dog ran")]
    vocab = attnrank.build_vocab(corpus, 1)
    assert vocab.contains("the")
    assert vocab.lookup("zebra") == 1  # UNK

    emb = attnrank.train_word2vec(corpus, vocab, 8, attnrank.SkipGramConfig(), seed=3)
    assert emb.dim() == 8
    assert emb.vocab_size() == vocab.size()
    assert emb.row(0) == [0.0] * 8  # PAD row frozen

    path = str(tmp_path / "emb.bin")
    attnrank.save_embeddings(path, vocab, emb)
    vocab2, emb2 = attnrank.load_embeddings(path)
    assert vocab2.index_to_token == vocab.index_to_token
    assert emb2.row(2) == emb.row(2)


@pytest.fixture(scope="module")
def toy_model():
    spec = attnrank.SyntheticSpec()
    spec.train_questions = 10
    spec.test_questions = 3
    spec.seed = 5
    split = attnrank.generate_synthetic(spec)

    corpus = [attnrank.tokenize(g.question) for g in split.train]
    for g in split.train:
        corpus.extend(attnrank.tokenize(c.answer) for c in g.candidates)
    vocab = attnrank.build_vocab(corpus, 1)
    w2v = attnrank.SkipGramConfig()
    w2v.epochs = 3
    emb = attnrank.train_word2vec(corpus, vocab, 12, w2v, seed=5)

    mcfg = attnrank.ModelConfig()
    for field in ("emb_dim", "att_dim", "hidden1_dim", "hidden2_dim", "head_hidden_dim"):
        setattr(mcfg, field, 12)
    tcfg = attnrank.TrainConfig()
    tcfg.batch_size = 16
    tcfg.epochs = 60
    tcfg.seed = 5
    tcfg.early_stopping = True

    result = attnrank.train(split.train, split.train, tcfg, mcfg, vocab, emb)
    return split, vocab, emb, mcfg, result


def test_training_learns_the_toy_task(toy_model):
    split, vocab, emb, mcfg, result = toy_model
    best = max(e.dev_mrr for e in result.history if e.dev_mrr is not None)
    assert best == 1.0
    assert result.history[-1].mean_loss < result.history[0].mean_loss


def test_ranking_and_report(toy_model):
    split, vocab, emb, mcfg, result = toy_model
    run = attnrank.rank_dataset(result.best, mcfg, vocab, emb, split.train)
    assert attnrank.mrr(run) == 1.0

    report = attnrank.length_bucket_report(run, [5, 25])
    assert report.n_questions == 10
    assert sum(b.n_questions for b in report.buckets) == 10

    ranked = attnrank.rank_answers(result.best, mcfg, vocab, emb, split.train[0])
    weights = ranked.answer_traces[0].weights
    assert sum(weights) == pytest.approx(1.0, abs=1e-6)


def test_forward_and_checkpoint(toy_model, tmp_path):
    split, vocab, emb, mcfg, result = toy_model
    g = split.train[0]
    q = attnrank.tokenize(g.question)
    a = attnrank.tokenize(g.candidates[0].answer)
    out = attnrank.forward(q, a, result.best, mcfg, vocab, emb)
    assert 0.0 < out.relevance_prob < 1.0

    path = str(tmp_path / "model.ckpt")
    attnrank.save_checkpoint(path, mcfg, result.best)
    cfg2, params2 = attnrank.load_checkpoint(path)
    out2 = attnrank.forward(q, a, params2, cfg2, vocab, emb)
    assert out2.relevance_prob == out.relevance_prob


def test_explain_html(toy_model):
    split, vocab, emb, mcfg, result = toy_model
    g = split.train[0]
    answers = [c.answer for c in g.candidates]
    html = attnrank.explain_html(g.question, answers, result.best, mcfg, vocab, emb)
    assert html.startswith("<!DOCTYPE html")
    assert "rgba(46,160,67" in html
    assert "http" not in html


def test_errors_are_catchable():
    with pytest.raises(attnrank.Error):
        attnrank.softmax([])
    with pytest.raises(attnrank.Error):
        attnrank.build_vocab([], 1)
