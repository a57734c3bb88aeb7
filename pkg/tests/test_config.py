"""Configuration parsing: key=value files, range syntax, fail-closed keys."""

import pytest

from blindssr.config import (
    ConfigError,
    RunConfig,
    parse_config,
    parse_number_list,
)


@pytest.fixture()
def cfg_file(tmp_path):
    def write(text):
        path = tmp_path / "run.cfg"
        path.write_text(text)
        return str(path)
    return write


class TestNumberLists:

    def test_comma_list(self):
        assert parse_number_list("10,15, 20") == (10.0, 15.0, 20.0)

    def test_range_inclusive_endpoints(self):
        values = parse_number_list("0.05:1.5:0.05")
        assert len(values) == 30
        assert values[0] == 0.05
        assert values[-1] == 1.5
        # every point is a clean short decimal, not an accumulation artifact
        assert 0.3 in values and 0.7 in values

    def test_range_and_literals_mix(self):
        assert parse_number_list("1, 1.2:1.8:0.2, 2") == (
            1.0, 1.2, 1.4, 1.6, 1.8, 2.0)

    def test_inf_literal(self):
        assert parse_number_list("2,inf") == (2.0, float("inf"))

    def test_misaligned_range_rejected(self):
        with pytest.raises(ConfigError, match="step"):
            parse_number_list("0.1:1.0:0.23")

    def test_bad_token_rejected(self):
        with pytest.raises(ConfigError):
            parse_number_list("1,two,3")

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            parse_number_list("")


class TestKvFile:

    def test_comments_and_blank_lines(self, cfg_file):
        path = cfg_file(
            "# grid under test\n"
            "\n"
            "n_stage1 = 15   # one size\n"
            "n_min_ratios = 1.2\n"
            "n_max_ratios = 2\n"
            "delta0 = 0.95\n"
            "replications = 1000\n"
            "master_seed = 7\n")
        config = parse_config(path)
        assert config.n_stage1 == (15,)
        assert config.master_seed == 7
        assert config.grid_spec().cell_count() == 1

    def test_duplicate_key_rejected(self, cfg_file):
        path = cfg_file("workers = 1\nworkers = 2\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(path)

    def test_unknown_key_rejected(self, cfg_file):
        path = cfg_file("n_stage1 = 15\nturbo = yes\n")
        with pytest.raises(ConfigError, match="turbo"):
            parse_config(path)

    def test_missing_equals_rejected(self, cfg_file):
        path = cfg_file("n_stage1 15\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config(path)

    def test_bad_value_reported_with_key(self, cfg_file):
        path = cfg_file("replications = soon\n")
        with pytest.raises(ConfigError, match="replications"):
            parse_config(path)


class TestOverrides:

    BASE = {
        "n_stage1": "15",
        "n_min_ratios": "1.2",
        "n_max_ratios": "2",
        "delta0": "0.95",
        "replications": "1000",
        "master_seed": "7",
    }

    def test_overrides_win_over_file(self, cfg_file):
        path = cfg_file("".join(f"{k} = {v}\n" for k, v in self.BASE.items()))
        config = parse_config(path, overrides={"replications": 5000,
                                               "workers": 4})
        assert config.replications == 5000
        assert config.workers == 4
        assert config.master_seed == 7

    def test_none_overrides_are_skipped(self, cfg_file):
        path = cfg_file("".join(f"{k} = {v}\n" for k, v in self.BASE.items()))
        config = parse_config(path, overrides={"replications": None})
        assert config.replications == 1000

    def test_string_overrides_go_through_parsers(self):
        config = parse_config(overrides=dict(self.BASE))
        assert config.n_stage1 == (15,)
        assert config.replications == 1000

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(overrides={"bogus": 1})

    def test_invalid_workers(self):
        with pytest.raises(ConfigError, match="workers"):
            parse_config(overrides={"workers": 0})

    def test_seed_range_checked(self):
        with pytest.raises(ConfigError, match="master_seed"):
            parse_config(overrides={"master_seed": 2 ** 64})


class TestGridSpecBridge:

    def test_missing_keys_are_listed(self):
        with pytest.raises(ConfigError, match="master_seed"):
            parse_config(overrides={"n_stage1": "15"}).grid_spec()

    def test_ratio_ordering_enforced(self):
        config = parse_config(overrides={
            "n_stage1": "10", "n_min_ratios": "2", "n_max_ratios": "1.5",
            "delta0": "1", "replications": "10", "master_seed": "1"})
        with pytest.raises(ConfigError, match="ratio"):
            config.grid_spec()

    def test_full_published_grid_size(self):
        config = parse_config(overrides={
            "n_stage1": "10,15,20,25,30,40,50,60",
            "n_min_ratios": "1:2:0.2",
            "n_max_ratios": "2,2.5,3,3.5,4,inf",
            "delta0": "0.05:1.5:0.05",
            "replications": "1000000",
            "master_seed": "20240817"})
        grid = config.grid_spec()
        assert grid.cell_count() == 8640
        assert grid.n_max_ratios[-1] == float("inf")

    def test_defaults(self):
        config = RunConfig()
        assert config.sigma == 1.0
        assert config.alpha == 0.05
        assert config.beta == 0.10
        assert config.workers == 1
