"""
Training record emission
SFT targets from teacher distillation and scored GSPO candidates, as JSONL
"""
import json
import logging
import uuid
from pathlib import Path

from llm_integration import ChatRequest, canonical_json
from modules.reward.models import RecordKind, RewardWeights, TrainingRecord
from modules.reward.scorer import score_text
from modules.shared.errors import DataError
from modules.shared.models import HORIZONS

GROUP_NAMESPACE = uuid.uuid5(uuid.NAMESPACE_URL, 'reits-agents/training-groups')


def group_id(fund_code, day):
    return str(uuid.uuid5(GROUP_NAMESPACE, f"{fund_code}|{day.isoformat()}"))


def sample_labels(sample):
    return {k: sample.label(k) for k in HORIZONS}


def realized_movement(sample):
    data = {}
    for k in HORIZONS:
        data[f"label_{k}"] = sample.label(k).value if sample.label(k) else None
        data[f"r_fwd_{k}"] = getattr(sample, f"r_fwd_{k}")
    return data


def build_distillation_request(sample, payload, system=''):
    """Teacher request: the prediction input together with the movement that followed"""
    return ChatRequest(
        system=system,
        user=canonical_json({'input': payload, 'realized': realized_movement(sample)}),
        tag=f"distill|{sample.fund_code}|{sample.date.isoformat()}",
    )


def emit_records(samples, inputs, candidates, kind=RecordKind.GSPO_CANDIDATE, weights=None, policy=None):
    """One record per (sample, candidate), ordered by fund, date and candidate index

    inputs and candidates are keyed by (fund_code, date). Samples lacking a
    label on any horizon or lacking an input payload are skipped.
    """
    kind = RecordKind(kind)
    weights = weights or RewardWeights()
    records = []
    skipped = 0
    for sample in sorted(samples, key=lambda s: (s.fund_code, s.date)):
        key = (sample.fund_code, sample.date)
        payload = inputs.get(key)
        if not sample.complete or payload is None:
            skipped += 1
            continue
        if payload.get('as_of') != sample.date.isoformat():
            raise DataError(f"{sample.fund_code}: label date {sample.date.isoformat()} "
                            f"does not match payload date {payload.get('as_of')}")
        texts = candidates.get(key, ())
        if kind is RecordKind.GSPO_CANDIDATE and not texts:
            raise DataError(f"{sample.fund_code} {sample.date.isoformat()}: no candidates to score")
        labels = sample_labels(sample)
        for index, text in enumerate(texts):
            breakdown = score_text(text, labels, weights, policy) if kind is RecordKind.GSPO_CANDIDATE else None
            records.append(TrainingRecord(
                record_kind=kind,
                fund_code=sample.fund_code,
                date=sample.date,
                group_id=group_id(sample.fund_code, sample.date),
                candidate_index=index,
                input_payload=payload,
                text=text,
                labels={f"label_{k}": labels[k].value for k in HORIZONS},
                reward=breakdown,
            ))
    if skipped:
        logging.info(f"Skipped {skipped} samples without complete labels or inputs")
    return records


def write_records(records, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + '\n')
    logging.info(f"✅ Wrote {len(records)} training records to {path}")
    return path


def build_candidate_request(payload, index, system='', temperature=1.0):
    """Sampled prediction request for GSPO candidate index within one group"""
    return ChatRequest(
        system=system,
        user=canonical_json(payload),
        tag=f"candidate|{payload['fund_code']}|{payload['as_of']}|{index}",
        temperature=temperature,
        seed=index,
    )
