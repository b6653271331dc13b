import numpy as np
import pytest
from pydantic import ValidationError

from errors import ConfigError
from plasticity import RuleId
from space import (
    ALPHA_BOUNDS,
    BETA_BOUNDS,
    DEFAULT_SPACE,
    Configuration,
    SearchSpaceDef,
    decode_config,
    encode_config,
    random_config,
    sample_pool,
)


def test_encode_unit_values():
    x = encode_config(Configuration(rule=RuleId.LMSR, alpha=1, beta1=1, beta2=1, beta3=1))
    assert len(x) == 12
    assert x[:8].tolist() == [0, 0, 0, 1, 0, 0, 0, 0]
    assert x[8:].tolist() == [0, 0, 0, 0]


def test_encode_alpha_lower_bound():
    assert encode_config(Configuration(rule=RuleId.GMR, alpha=1e-3))[8] == pytest.approx(-3.0, abs=1e-12)


def test_round_trip_random_configs():
    rng = np.random.default_rng(0)
    for _ in range(100):
        config = random_config(DEFAULT_SPACE, rng)
        back = decode_config(encode_config(config))
        assert back.rule == config.rule
        for name in ("alpha", "beta1", "beta2", "beta3"):
            assert getattr(back, name) == pytest.approx(getattr(config, name), rel=1e-12)


def test_out_of_space_rule():
    narrow = SearchSpaceDef(rules=(RuleId.LMSR, RuleId.GMR))
    with pytest.raises(ConfigError):
        encode_config(Configuration(rule=RuleId.MOR, alpha=0.1), narrow)


def test_out_of_bounds_value():
    narrow = SearchSpaceDef(bounds={"alpha": (0.01, 0.1), "beta1": BETA_BOUNDS, "beta2": BETA_BOUNDS, "beta3": BETA_BOUNDS})
    with pytest.raises(ConfigError, match="alpha"):
        encode_config(Configuration(rule=RuleId.LMSR, alpha=0.5), narrow)


def test_inverted_bounds_rejected():
    with pytest.raises(ConfigError):
        SearchSpaceDef(bounds={"alpha": (1.0, 0.1), "beta1": BETA_BOUNDS, "beta2": BETA_BOUNDS, "beta3": BETA_BOUNDS})


@pytest.mark.parametrize("alpha", [ALPHA_BOUNDS[0] / 2, 1.5])
def test_configuration_alpha_bounds(alpha):
    with pytest.raises(ValidationError):
        Configuration(rule=RuleId.LMSR, alpha=alpha)


def test_configuration_unknown_rule():
    with pytest.raises(ValidationError):
        Configuration(rule="XYZ", alpha=0.1)


def test_every_rule_drawn():
    rng = np.random.default_rng(1)
    rules = {random_config(DEFAULT_SPACE, rng).rule for _ in range(10_000)}
    assert rules == set(RuleId)


def test_draws_inside_bounds():
    rng = np.random.default_rng(2)
    for _ in range(2000):
        c = random_config(DEFAULT_SPACE, rng)
        assert ALPHA_BOUNDS[0] <= c.alpha <= ALPHA_BOUNDS[1]
        for beta in (c.beta1, c.beta2, c.beta3):
            assert BETA_BOUNDS[0] <= beta <= BETA_BOUNDS[1]


def test_same_rng_state_same_config():
    assert random_config(DEFAULT_SPACE, np.random.default_rng(7)) == random_config(
        DEFAULT_SPACE, np.random.default_rng(7)
    )


def test_draws_are_log_uniform():
    rng = np.random.default_rng(3)
    alphas = np.array([random_config(DEFAULT_SPACE, rng).alpha for _ in range(4000)])
    # a third of the log range per decade
    share_below = np.mean(alphas < 1e-2)
    assert share_below == pytest.approx(1 / 3, abs=0.03)


def test_pool_rows_decode_inside_box():
    X = sample_pool(DEFAULT_SPACE, np.random.default_rng(4), 500)
    assert X.shape == (500, 12)
    assert (X[:, :8].sum(axis=1) == 1).all()
    for row in X:
        decode_config(row)


def test_digest_is_stable():
    c = Configuration(rule=RuleId.SLR, alpha=0.25, beta1=0.5)
    assert c.digest() == Configuration(rule="SLR", alpha=0.25, beta1=0.5).digest()
    assert c.digest() != Configuration(rule=RuleId.SLR, alpha=0.25, beta1=0.25).digest()
    assert 0 <= c.digest() < 2**64
