import pytest
from hypothesis import given, strategies as st

from sifirank.config import ExperimentConfig, config_from_dict, config_hash, load_config
from sifirank.errors import ConfigError


def write(tmp_path, text):
    p = tmp_path / "c.toml"
    p.write_text(text)
    return p


def test_defaults_load():
    cfg = load_config()
    assert cfg.network.kind == "ba" and cfg.runs == 100 and cfg.seed == 0
    assert cfg.classification.bucket_quantiles == (0.5, 0.9)


def test_file_values_and_int_to_float(tmp_path):
    cfg = load_config(write(tmp_path, "seed = 4\n[network]\nkind = 'complete'\nn = 12\n"
                                      "[solvency]\nphi = 1\n"))
    assert cfg.seed == 4 and cfg.network.n == 12 and cfg.solvency.phi == 1.0
    assert isinstance(cfg.solvency.phi, float)


@pytest.mark.parametrize("text", [
    "[network]\nnodes = 5\n",
    "colour = 'red'\n",
    "[network]\nn = 'fifty'\n",
    "[network]\nn = 5.5\n",
    "[classification]\nbucket_quantiles = [0.9, 0.5]\n",
    "[shocks]\nfraction_hit = 0\n",
    "runs = 1\n",
    "network = 3\n",
    "[network\n",
])
def test_strict_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, text))


def test_hash_ignores_key_order():
    a = config_from_dict({"network": {"n": 40, "kind": "ba"}, "seed": 2})
    b = config_from_dict({"seed": 2, "network": {"kind": "ba", "n": 40}})
    assert a.hash() == b.hash()


def test_hash_changes_with_semantics():
    base = ExperimentConfig()
    assert base.hash() != base.with_seed(1).hash()
    assert base.hash() != config_from_dict({"shocks": {"magnitude_mean": 11.0}}).hash()
    # an explicitly stated default is not a semantic change
    assert base.hash() == config_from_dict({"solvency": {"phi": 1.0}}).hash()


@given(st.integers(0, 2**31))
def test_seed_override(seed):
    cfg = ExperimentConfig().with_seed(seed)
    assert cfg.seed == seed and config_hash(cfg) == config_hash(ExperimentConfig(seed=seed))
