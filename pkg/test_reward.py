"""
Reward tests
Correctness, format score, the combined reward and training record emission
"""
import json
import random
from datetime import date

import pytest

from llm_integration import compliant_answer, stub_distill, stub_predict
from modules.prediction.parser import parse_prediction
from modules.reward.models import RecordKind, RewardWeights
from modules.reward.records import (
    build_candidate_request, build_distillation_request, emit_records, group_id, write_records,
)
from modules.reward.scorer import correctness, format_score, reward, score_text
from modules.shared.errors import DataError, WeightInvariantError
from modules.shared.models import Direction
from modules.threshold_labeler.models import LabeledSample

U, D, S = Direction.UP, Direction.DOWN, Direction.SIDE
DAY = date(2024, 3, 1)

VALID = {
    't1': {'up': 0.6, 'down': 0.25, 'side': 0.15, 'confidence': 0.7},
    't5': {'up': 0.2, 'down': 0.2, 'side': 0.6, 'confidence': 0.5},
    't20': {'up': 0.1, 'down': 0.7, 'side': 0.2, 'confidence': 0.4},
}
# Dominant directions of VALID
PREDICTED = {1: U, 5: S, 20: D}


def answer(document=None):
    return f"<think>\nreasoning\n</think>\n{json.dumps(document or VALID)}"


def sample(day=DAY, code='508000', labels=(U, S, D), missing=()):
    return LabeledSample(fund_code=code, date=day, theta=0.004, eps1=0.004, eps5=0.0089, eps20=0.0179,
                         r_fwd_1=0.01, r_fwd_5=0.0, r_fwd_20=-0.03,
                         label_1=labels[0], label_5=labels[1], label_20=labels[2], missing_horizons=missing)


def payload(day=DAY, code='508000'):
    return {'fund_code': code, 'as_of': day.isoformat(), 'price_context': {
        'chg_1d': 0.01, 'chg_5d': 0.0, 'chg_20d': -0.05, 'eps1': 0.004, 'eps5': 0.0089, 'eps20': 0.0179}}


@pytest.mark.parametrize('labels, weights, expected', [
    ({1: U, 5: S, 20: D}, RewardWeights(), 1.0),
    ({1: U, 5: S, 20: U}, RewardWeights(), 2 / 3),
    ({1: D, 5: D, 20: D}, RewardWeights(w1=0.2, w5=0.3, w20=0.5), 0.5),
    ({1: D, 5: U, 20: S}, RewardWeights(), 0.0),
])
def test_correctness(labels, weights, expected):
    value, indicators = correctness(parse_prediction(answer()), labels, weights)
    assert value == pytest.approx(expected, abs=1e-12)
    assert value == pytest.approx(sum(weights.horizon_weight(k) * i for k, i in indicators.items()))


def test_correctness_reads_parsed_documents_too():
    assert correctness(VALID, PREDICTED)[0] == pytest.approx(1.0)
    assert correctness({}, PREDICTED) == (0.0, {1: 0, 5: 0, 20: 0})


def test_stub_output_scores_full_format():
    for dominant in ({'t1': U, 't5': U, 't20': U}, {'t1': S, 't5': D, 't20': U}):
        assert format_score(compliant_answer(dominant, 'x')).total == 1.0
    assert format_score(stub_predict(json.dumps(payload()))).total == 1.0


@pytest.mark.parametrize('text, basic', [
    ('just prose', 0.0),
    ('<think>thinking</think> and prose', 0.5),
])
def test_format_score_without_json(text, basic):
    score = format_score(text)
    assert (score.basic, score.fields, score.numeric) == (basic, 0.0, 0.0)
    assert score.total == pytest.approx(0.3 * basic)


def test_format_score_one_failed_sum_check():
    document = json.loads(json.dumps(VALID))
    document['t5']['side'] = 0.5
    score = format_score(answer(document))
    assert score.basic == 1.0 and score.fields == 1.0
    assert score.numeric == pytest.approx(8 / 9)
    assert score.total == pytest.approx(0.9556, abs=1e-4)


def test_format_score_partial_fields():
    document = {'t1': VALID['t1'], 't5': {'up': 0.2, 'down': 0.2}}
    score = format_score(answer(document))
    assert score.fields == pytest.approx(6 / 12)
    assert score.numeric == pytest.approx(3 / 9)


@pytest.mark.parametrize('c, f, expected', [(1.0, 1.0, 1.0), (1.0, 0.5, 0.9), (0.0, 0.0, 0.0)])
def test_reward(c, f, expected):
    assert reward(c, f, RewardWeights(alpha=0.8, beta=0.2)) == pytest.approx(expected)


def test_reward_is_one_for_full_marks_under_any_weights():
    assert reward(1.0, 1.0, RewardWeights(alpha=0.5, beta=0.5, w1=0.6, w5=0.2, w20=0.2)) == pytest.approx(1.0)


@pytest.mark.parametrize('fields', [
    {'alpha': 0.7, 'beta': 0.2},
    {'w1': 0.5, 'w5': 0.5, 'w20': 0.5},
    {'alpha': 1.2, 'beta': -0.2},
])
def test_weight_invariants(fields):
    with pytest.raises(WeightInvariantError):
        RewardWeights(**fields)


def random_text(rng):
    def horizon():
        values = [rng.random() for _ in range(3)]
        if rng.random() < 0.7:
            total = sum(values)
            values = [v / total for v in values]
        data = dict(zip(('up', 'down', 'side'), values))
        data['confidence'] = rng.uniform(-0.2, 1.2)
        for key in list(data):
            if rng.random() < 0.1:
                del data[key]
        return data

    document = {key: horizon() for key in ('t1', 't5', 't20') if rng.random() < 0.9}
    body = json.dumps(document) if rng.random() < 0.9 else 'no json'
    return ('<think>r</think>' if rng.random() < 0.5 else '') + body


def test_reward_bounded_on_fuzzed_texts():
    rng = random.Random(7)
    for _ in range(10_000):
        labels = {k: rng.choice((U, D, S)) for k in (1, 5, 20)}
        breakdown = score_text(random_text(rng), labels)
        assert 0.0 <= breakdown.reward <= 1.0
        assert 0.0 <= breakdown.correctness <= 1.0
        assert 0.0 <= breakdown.format_score <= 1.0


def test_reward_depends_on_argmax_only():
    labels = {1: U, 5: S, 20: U}
    nudged = json.loads(json.dumps(VALID))
    nudged['t1'].update(up=0.5, down=0.3, side=0.2)
    nudged['t20'].update(up=0.15, down=0.65)
    assert score_text(answer(nudged), labels) == score_text(answer(), labels)


def test_reward_monotone_in_indicators():
    weights = RewardWeights()
    base = score_text(answer(), {1: D, 5: D, 20: U}, weights)
    better = score_text(answer(), {1: U, 5: D, 20: U}, weights)
    assert (base.i1, better.i1) == (0, 1)
    assert better.reward >= base.reward
    assert better.reward - base.reward == pytest.approx(weights.alpha * weights.w1)


def test_gspo_records_share_a_group():
    texts = [answer(), answer(), compliant_answer({'t1': D, 't5': D, 't20': D}, 'y'), 'garbage']
    records = emit_records([sample()], {('508000', DAY): payload()}, {('508000', DAY): texts})
    assert len(records) == 4
    assert {r.group_id for r in records} == {group_id('508000', DAY)}
    assert [r.candidate_index for r in records] == [0, 1, 2, 3]
    assert records[0].reward == records[1].reward
    assert records[0].reward.reward == pytest.approx(1.0)
    assert records[3].reward.format_score == 0.0
    assert records[0].labels == {'label_1': 'up', 'label_5': 'side', 'label_20': 'down'}


def test_sft_records_carry_no_reward():
    records = emit_records([sample()], {('508000', DAY): payload()}, {('508000', DAY): ['teacher text']},
                           kind='sft')
    assert len(records) == 1
    assert records[0].reward is None
    assert records[0].to_dict()['reward'] is None
    assert records[0].to_dict()['record_kind'] == 'sft'


def test_emit_records_order_and_skips():
    later = date(2024, 3, 4)
    samples = [sample(later, '508000'), sample(DAY, '508000'), sample(DAY, '180101'),
               sample(date(2024, 3, 5), missing=(20,))]
    inputs = {('508000', DAY): payload(), ('508000', later): payload(later),
              ('180101', DAY): payload(code='180101')}
    candidates = {key: ['a'] for key in inputs}
    records = emit_records(samples, inputs, candidates)
    assert [(r.fund_code, r.date) for r in records] == [('180101', DAY), ('508000', DAY), ('508000', later)]


def test_emit_records_rejects_date_mismatch_and_missing_candidates():
    with pytest.raises(DataError, match='does not match'):
        emit_records([sample()], {('508000', DAY): payload(date(2024, 3, 4))}, {('508000', DAY): ['a']})
    with pytest.raises(DataError, match='no candidates'):
        emit_records([sample()], {('508000', DAY): payload()}, {})


def test_write_records(tmp_path):
    records = emit_records([sample()], {('508000', DAY): payload()}, {('508000', DAY): [answer()]})
    path = write_records(records, tmp_path / 'reward' / 'gspo.jsonl')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert len(lines) == 1
    row = json.loads(lines[0])
    assert row['metadata'] == {'fund_code': '508000', 'date': '2024-03-01'}
    assert row['target_or_candidate_text'] == answer()
    assert row['reward']['i1'] == 1


def test_distillation_request_reaches_realized_labels():
    request = build_distillation_request(sample(), payload(), system='teacher')
    assert request.kind == 'distill'
    text = stub_distill(request.user)
    assert correctness(parse_prediction(text), {1: U, 5: S, 20: D})[0] == pytest.approx(1.0)


def test_candidate_requests_differ_only_by_seed():
    first = build_candidate_request(payload(), 0)
    second = build_candidate_request(payload(), 1)
    assert first.user == second.user
    assert (first.seed, second.seed) == (0, 1)
    assert first.tag == 'candidate|508000|2024-03-01|0'
    assert first.temperature == 1.0
