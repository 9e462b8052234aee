import pytest

from rxnspan.config import RunConfig, load_config, parse_config
from rxnspan.errors import ConfigError


def test_defaults_round_trip():
    cfg = RunConfig().validate()
    again = parse_config(cfg.to_text())
    assert again.to_dict() == cfg.to_dict()


def test_unknown_key_names_key():
    with pytest.raises(ConfigError, match="decode.bogus"):
        parse_config("decode.bogus = 1\n")
    with pytest.raises(ConfigError, match="nosection.x"):
        RunConfig().set("nosection.x", 1)


def test_coercion_and_comments():
    cfg = parse_config("# comment\ndecode.epochs = 7  # trailing\nchemmask.enabled = yes\n"
                       "decode.learning_rate = 0.5\n")
    assert cfg.decode.epochs == 7 and cfg.chemmask.enabled is True and cfg.decode.learning_rate == 0.5
    with pytest.raises(ConfigError):
        parse_config("decode.epochs = many\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("decode.epochs 7\n")


@pytest.mark.parametrize("line", [
    "decode.kind = rnn", "encode.paragraph_mode = sum", "corpus.validation_fraction = 1.0",
    "decode.window = 0", "decode.patience = -1", "decode.learning_rate = 0",
])
def test_validation_rejects(line):
    with pytest.raises(ConfigError):
        parse_config(line + "\n")


def test_contextualize_auto():
    assert RunConfig.from_dict({"decode.kind": "crf"}).contextualize
    assert not RunConfig.from_dict({"decode.kind": "linear"}).contextualize
    assert RunConfig.from_dict({"decode.kind": "linear", "decode.contextualize": "true"}).contextualize


def test_label_set_and_overrides(tmp_path):
    (tmp_path / "c.cfg").write_text("corpus.labels = REACTION, WORKUP\n")
    cfg = load_config(tmp_path / "c.cfg", {"decode.epochs": "3"})
    assert cfg.label_set == {"REACTION", "WORKUP"} and cfg.decode.epochs == 3
    assert RunConfig().label_set is None
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
