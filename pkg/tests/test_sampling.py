import numpy as np
import numpy.testing as npt
import pytest

from chronoseq.generation import SamplingConfig, apply_decoding_controls, sample_token_id
from helpers import MarkovModel, chi2_sf_even


def test_config_validation():
    with pytest.raises(ValueError):
        SamplingConfig(temperature=0.0)
    with pytest.raises(ValueError):
        SamplingConfig(top_p=0.0)
    with pytest.raises(ValueError):
        SamplingConfig(repetition_penalty=0.5)
    with pytest.raises(ValueError):
        SamplingConfig(top_k=-1)


def test_neutral_controls_reproduce_softmax():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=9)
    probs = apply_decoding_controls(logits, [0, 3], SamplingConfig())
    want = np.exp(logits - logits.max())
    want /= want.sum()
    npt.assert_allclose(probs, want, atol=1e-12)


def test_temperature_zero_limit_is_greedy():
    rng = np.random.default_rng(1)
    for _ in range(100):
        logits = rng.normal(size=12)
        probs = apply_decoding_controls(logits, [], SamplingConfig(temperature=1e-9))
        assert probs.argmax() == logits.argmax()
        assert probs[logits.argmax()] == pytest.approx(1.0)
        assert sample_token_id(probs, np.random.default_rng(0)) == logits.argmax()


def test_top_k_keeps_k_tokens():
    logits = np.array([3.0, 2.0, 1.0, 0.0, -1.0])
    probs = apply_decoding_controls(logits, [], SamplingConfig(top_k=2))
    assert (probs > 0).sum() == 2
    assert set(np.nonzero(probs)[0]) == {0, 1}
    assert probs.sum() == pytest.approx(1.0)


def test_top_k_one_is_deterministic():
    rng = np.random.default_rng(2)
    logits = rng.normal(size=8)
    probs = apply_decoding_controls(logits, [], SamplingConfig(top_k=1))
    for seed in range(10):
        assert sample_token_id(probs, np.random.default_rng(seed)) == logits.argmax()


def test_top_p_keeps_smallest_cover():
    logits = np.log(np.array([0.5, 0.3, 0.15, 0.05]))
    probs = apply_decoding_controls(logits, [], SamplingConfig(top_p=0.7))
    assert set(np.nonzero(probs)[0]) == {0, 1}
    npt.assert_allclose(probs[:2], [0.625, 0.375], atol=1e-12)
    # top_p always keeps at least one token
    probs = apply_decoding_controls(logits, [], SamplingConfig(top_p=1e-9))
    assert (probs > 0).sum() == 1


def test_repetition_penalty_strictly_lowers_repeated_probability():
    rng = np.random.default_rng(3)
    for _ in range(50):
        logits = rng.normal(scale=2.0, size=10)
        t = int(rng.integers(0, 10))
        p1 = apply_decoding_controls(logits, [t], SamplingConfig(repetition_penalty=1.0))
        p2 = apply_decoding_controls(logits, [t], SamplingConfig(repetition_penalty=2.0))
        assert p2[t] < p1[t]


def test_repetition_penalty_lowers_every_repeated_logit():
    # with several repeated tokens, each penalized LOGIT strictly drops even
    # though renormalization may not lower every probability
    logits = np.array([4.0, -3.0, 1.0, 0.5, -0.5])
    context = [0, 1, 4]
    pen = SamplingConfig(repetition_penalty=2.0)
    z = logits.copy()
    z[[0, 1, 4]] = [2.0, -6.0, -1.0]
    want = np.exp(z - z.max())
    want /= want.sum()
    npt.assert_allclose(apply_decoding_controls(logits, context, pen), want, atol=1e-12)


def test_control_order_penalty_before_temperature_before_filters():
    # with a repeated top token and penalty, the kept top-k set must change:
    # penalty applies first, demoting the repeated token before the filter
    logits = np.array([5.0, 4.9, 1.0, 0.5])
    cfg = SamplingConfig(top_k=1, repetition_penalty=3.0)
    probs = apply_decoding_controls(logits, [0], cfg)
    assert probs.argmax() == 1  # token 0 was demoted below token 1 before top-k


def test_neutral_sampling_follows_model_distribution_chi2():
    model = MarkovModel({"default": {"c:1": 0.5, "c:2": 0.3, "[END]": 0.2}})
    logits = model.logits_after(model.vocab.id_of("c:1"))
    probs = apply_decoding_controls(logits, [], SamplingConfig())
    rng = np.random.default_rng(1234)
    n = 10_000
    counts = np.zeros(len(probs))
    for _ in range(n):
        counts[sample_token_id(probs, rng)] += 1
    keep = probs > 0
    expected = probs[keep] * n
    chi2 = float(((counts[keep] - expected) ** 2 / expected).sum())
    p_value = chi2_sf_even(chi2, dof=2)
    assert p_value > 0.01


def test_chi2_helper_matches_closed_form():
    for x in (0.1, 1.0, 5.0, 10.0):
        assert chi2_sf_even(x, 2) == pytest.approx(np.exp(-x / 2))
    # dof 4: exp(-x/2) * (1 + x/2)
    for x in (0.5, 2.0, 7.0):
        assert chi2_sf_even(x, 4) == pytest.approx(np.exp(-x / 2) * (1 + x / 2))
