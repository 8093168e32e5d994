import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicml.space import ConfigPoint, Dimension, SpaceError, parse_space


def test_ads_space_cardinality(ads_space):
    # 3 strategies on 11 layers, 5 batch sizes, 10 reservation choices
    assert ads_space.cardinality() == 3**11 * 5 * 10 == 8_857_350


def test_reduced_space_cardinality(reduced_space):
    assert reduced_space.cardinality() == 3**3 * 5 * 10 == 1350


def test_llm_space_loads(llm_space):
    assert "log2_gpus" in llm_space.names
    gpus = llm_space.dimension("log2_gpus")
    assert 2 ** gpus.values[0] == 8 and 2 ** gpus.values[-1] == 16384


def test_decimal_steps_are_exact():
    d = Dimension.from_doc({"name": "r", "kind": "decimal", "min": "0.77", "max": "0.85", "step": "0.01"})
    assert d.size == 9
    assert d.values[3] == 0.80
    assert d.index(0.83) == 6


@pytest.mark.parametrize(
    "doc",
    [
        {"name": "a", "kind": "categorical", "values": ["x"]},
        {"name": "a", "kind": "categorical", "values": ["x", "x"]},
        {"name": "a", "kind": "int", "min": 1, "max": 5, "step": 3},
        {"name": "a", "kind": "int", "min": 5, "max": 1, "step": 1},
        {"name": "a", "kind": "int", "min": 1, "max": 5, "step": 0},
        {"name": "a", "kind": "int", "min": 1.5, "max": 5.5, "step": 1},
        {"name": "a", "kind": "weird"},
        {"name": "a", "kind": "int", "min": 1, "max": 5},
    ],
)
def test_invalid_dimensions_rejected(doc):
    with pytest.raises(SpaceError):
        Dimension.from_doc(doc)


def test_duplicate_dimension_names_rejected():
    with pytest.raises(SpaceError):
        parse_space({"dimensions": [{"name": "a", "kind": "bool"}, {"name": "a", "kind": "bool"}]})


def test_unparseable_document():
    with pytest.raises(SpaceError):
        parse_space("dimensions: [unclosed")


def test_enumeration_is_lexicographic(tiny_space):
    configs = list(tiny_space.enumerate())
    assert len(configs) == tiny_space.cardinality() == 24
    idx = [tuple(tiny_space.indices(c)) for c in configs]
    assert idx == sorted(idx)
    assert configs[0].as_dict() == {"a": "x", "b": 1, "c": False}
    assert configs[1].as_dict() == {"a": "x", "b": 1, "c": True}


def test_empty_space_has_one_config():
    space = parse_space({"name": "empty", "dimensions": []})
    assert space.cardinality() == 1
    assert list(space.enumerate()) == [space.from_indices([])]


def test_sample_uniform_is_deterministic(reduced_space):
    assert reduced_space.sample_uniform(7) == reduced_space.sample_uniform(7)


def test_sample_indices_cover_all_values(tiny_space, rng):
    idx = tiny_space.sample_indices(rng, 2000)
    for j, size in enumerate(tiny_space.sizes):
        assert set(idx[:, j]) == set(range(size))


def test_validate_rejects_missing_and_unknown_values(tiny_space):
    with pytest.raises(SpaceError):
        tiny_space.validate({"a": "x", "b": 1})
    with pytest.raises(SpaceError):
        tiny_space.validate({"a": "w", "b": 1, "c": True})
    with pytest.raises(SpaceError):
        tiny_space.validate({"a": "x", "b": 1.5, "c": True})


def test_validate_reorders(tiny_space):
    cfg = tiny_space.validate({"c": True, "b": 2, "a": "y"})
    assert [k for k, _ in cfg.items] == ["a", "b", "c"]


def test_onehot_layout(tiny_space):
    v = tiny_space.encode_onehot({"a": "z", "b": 3, "c": True})
    assert v.tolist() == [0, 0, 1, 0, 0, 1, 0, 0, 1]


def test_decode_onehot_rejects_bad_block(tiny_space):
    with pytest.raises(SpaceError):
        tiny_space.decode_onehot([1, 1, 0, 1, 0, 0, 0, 1, 0])


def test_mixed_encoding(tiny_space):
    v, layout = tiny_space.encode_mixed({"a": "z", "b": 3, "c": True})
    assert v.tolist() == [2.0, 3.0, 1.0]
    assert layout.categorical == (True, False, True)


def test_config_key_ignores_space_reference():
    a = ConfigPoint((("x", 1), ("y", 2)), "s", 1)
    b = ConfigPoint((("y", 2), ("x", 1)), None, None)
    assert a.key() == b.key()


def test_space_doc_round_trip(ads_space):
    again = parse_space(ads_space.to_doc())
    assert again == ads_space


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 1349))
def test_encodings_round_trip(reduced_space, k):
    cfg = reduced_space.from_indices(np.unravel_index(k, reduced_space.sizes))
    assert reduced_space.decode_onehot(reduced_space.encode_onehot(cfg)) == cfg
    assert reduced_space.decode_mixed(reduced_space.encode_mixed(cfg)[0]) == cfg
    assert reduced_space.validate(cfg.as_dict()) == cfg


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=13))
def test_llm_round_trip(llm_space, raw):
    idx = [r % s for r, s in zip(raw + [0] * len(llm_space), llm_space.sizes)]
    cfg = llm_space.from_indices(idx)
    assert llm_space.indices(cfg).tolist() == idx
    assert llm_space.decode_mixed(llm_space.encode_mixed(cfg)[0]) == cfg


def test_small_space_examples():
    one_bool = parse_space({"dimensions": [{"name": "flag", "kind": "bool"}]})
    assert one_bool.sizes == (2,)
    assert one_bool.encode_onehot({"flag": True}).tolist() == [0, 1]
    mixed = parse_space(
        {"dimensions": [{"name": "flag", "kind": "bool"}, {"name": "c", "kind": "categorical", "values": [1, 2, 3]}]}
    )
    assert mixed.cardinality() == 6
    assert mixed.encode_onehot({"flag": False, "c": "2"}).tolist() == [1, 0, 0, 1, 0]
    empty = parse_space({"dimensions": []})
    assert empty.encode_mixed({})[0].shape == (0,)


def test_bool_sampling_frequency():
    space = parse_space({"dimensions": [{"name": "flag", "kind": "bool"}]})
    n = 10_000
    hits = sum(space.sample_uniform(s)["flag"] for s in range(n))
    assert abs(hits - n / 2) <= 3 * (n * 0.25) ** 0.5


def test_ads_space_encoding(ads_space):
    assert len(ads_space) == 13
    cfg = ads_space.sample_uniform(3)
    v = ads_space.encode_onehot(cfg)
    assert v.shape == (48,) and v.sum() == 13


def test_mixed_numeric_slot(llm_space):
    cfg = llm_space.sample_uniform(0).as_dict()
    cfg.update(log2_seq_len=13, precision="FP8")
    v, layout = llm_space.encode_mixed(cfg)
    j, k = llm_space.names.index("log2_seq_len"), llm_space.names.index("precision")
    assert (v[j], layout.categorical[j]) == (13.0, False)
    assert (v[k], layout.categorical[k]) == (1.0, True)
