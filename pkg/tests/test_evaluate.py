import numpy as np
import pytest

from cubicml.evaluate import PredictorSpec, fit_eval, make_split, split_curve
from cubicml.loop import derive_seed
from cubicml.metrics import CorrelationError
from cubicml.predictor import GbdtConfig, MlpConfig
from cubicml.sim import LlmSimulator, generate_dataset
from cubicml.store import JobRecord, SplitError

SMALL_GBDT = GbdtConfig(n_trees=60)


@pytest.fixture(scope="module")
def llm_records(llm_space):
    return generate_dataset(llm_space, LlmSimulator(), 200, derive_seed(7, "dataset"), "scale-correlated",
                            failure_rate=0.1)


def test_spec_validation():
    with pytest.raises(ValueError):
        PredictorSpec("svm")


@pytest.mark.parametrize("strategy", ["random", "temporal", "scale"])
def test_make_split_uses_completed_only(llm_records, strategy):
    split = make_split(llm_records, strategy, seed=3)
    both = split.train + split.valid
    assert all(r.completed for r in both)
    assert len({id(r) for r in both}) == len(both)
    if strategy == "scale":
        assert max(r.scale for r in split.train) <= 3072 < 4096 <= min(r.scale for r in split.valid)
    if strategy == "temporal":
        assert max(r.timestamp for r in split.train) <= min(r.timestamp for r in split.valid)


def test_make_split_rejects_unknown(llm_records):
    with pytest.raises(SplitError):
        make_split(llm_records, "alphabetical")


def test_fit_eval_gbdt(llm_space, llm_records):
    split = make_split(llm_records, "random", seed=1)
    res = fit_eval(llm_space, split, PredictorSpec("gbdt", gbdt=GbdtConfig(n_trees=60, log_target=True)), 0)
    assert len(res.predicted) == len(res.actual) == len(split.valid)
    assert np.all(np.isfinite(res.predicted))
    assert res.report.spearman > 0.5
    again = fit_eval(llm_space, split, PredictorSpec("gbdt", gbdt=GbdtConfig(n_trees=60, log_target=True)), 0)
    np.testing.assert_array_equal(res.predicted, again.predicted)


def test_fit_eval_mlp_runs(llm_space, llm_records):
    split = make_split(llm_records, "random", seed=1)
    spec = PredictorSpec("mlp", mlp=MlpConfig(members=2, hidden=32, epochs=10))
    res = fit_eval(llm_space, split, spec, 0)
    assert np.all(np.isfinite(res.predicted))
    assert -1 <= res.report.kendall <= 1


def test_fit_eval_needs_two_per_side(llm_space, llm_records):
    done = [r for r in llm_records if r.completed]
    split = make_split(done[:3], "temporal", valid_fraction=0.34)
    with pytest.raises(SplitError):
        fit_eval(llm_space, split, PredictorSpec(gbdt=SMALL_GBDT), 0)


def test_split_curve(llm_space, llm_records):
    split = make_split(llm_records, "random", seed=2)
    pts = split_curve(llm_space, split, [20, 60], PredictorSpec(gbdt=SMALL_GBDT), perturbations=3, seed=0)
    assert [p.size for p in pts] == [20, 60]
    for p in pts:
        assert set(p.mean) >= {"kendall", "pearson", "spearman"}
        assert all(v >= 0 for v in p.std.values())


def test_constant_metric_history_is_degenerate(tiny_space):
    recs = [JobRecord(c, "completed", 1.0, float(i)) for i, c in enumerate(tiny_space.enumerate())]
    split = make_split(recs, "random", seed=0)
    with pytest.raises(CorrelationError):
        fit_eval(tiny_space, split, PredictorSpec(gbdt=SMALL_GBDT), 0)
