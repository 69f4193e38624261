"""
Reward commands
reward: assemble prediction inputs for labeled samples, obtain teacher targets
(SFT) and sampled candidates (GSPO) through the gateway, score and write JSONL
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
from flask import Blueprint

from modules.reward.models import RecordKind
from modules.reward.records import build_candidate_request, build_distillation_request, emit_records, write_records
from modules.shared.cli import (
    GatewayFactory, build_strategy, exit_codes, open_store, prompt_library, resolve_config, run_options,
)
from modules.shared.errors import InsufficientHistoryError
from modules.threshold_labeler.commands import in_period
from modules.threshold_labeler.thresholds import annotate

reward_bp = Blueprint('reward', __name__, cli_group=None)

KINDS = ('sft', 'gspo', 'both')


def fund_training_texts(store, code, config, strategy, gateway, prompts, kinds):
    """(samples, inputs, sft targets, gspo candidates) for one fund"""
    meta = store.fund_meta.get(code)
    samples = annotate(store.fund_series(code), config.thresholds, code,
                       listing_date=meta.listing_date if meta else None,
                       min_listing_days=config.min_listing_days)
    samples = [s for s in in_period(samples, config.period) if s.complete]
    distill_system = prompts.render('distill') if prompts else ''
    candidate_system = strategy.predictor.system_prompt()

    inputs, targets, candidates = {}, {}, {}
    for sample in samples:
        key = (code, sample.date)
        try:
            payload = strategy.prediction_payload(store.as_of(sample.date), code)
        except InsufficientHistoryError as e:
            logging.warning(f"⚠️ {code} {sample.date.isoformat()}: no prediction input ({e})")
            continue
        inputs[key] = payload
        if 'sft' in kinds:
            targets[key] = [gateway.complete(build_distillation_request(sample, payload, distill_system))]
        if 'gspo' in kinds:
            candidates[key] = [gateway.complete(build_candidate_request(payload, i, candidate_system))
                               for i in range(config.reward_candidates)]
    return samples, inputs, targets, candidates


@reward_bp.cli.command('reward')
@run_options
@click.option('--kind', type=click.Choice(KINDS), default='both', show_default=True,
              help='Training records to emit')
@exit_codes
def reward(config_path, mode, jobs, funds, period, output_dir, kind):
    """SFT and scored GSPO training records under <out>/reward"""
    config = resolve_config(config_path, mode, jobs, funds, period, output_dir)
    kinds = {'sft', 'gspo'} if kind == 'both' else {kind}
    store = open_store(config)
    prompts = prompt_library(config)
    gateway = GatewayFactory().gateway(config.gateway)
    strategy = build_strategy(config, gateway, prompts)

    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        results = list(pool.map(
            lambda code: fund_training_texts(store, code, config, strategy, gateway, prompts, kinds),
            sorted(store.funds)))

    samples, inputs, targets, candidates = [], {}, {}, {}
    for fund_samples, fund_inputs, fund_targets, fund_candidates in results:
        samples.extend(fund_samples)
        inputs.update(fund_inputs)
        targets.update(fund_targets)
        candidates.update(fund_candidates)

    target = Path(config.output_dir) / 'reward'
    if 'sft' in kinds:
        records = emit_records(samples, inputs, targets, RecordKind.SFT, config.reward, config.validation)
        write_records(records, target / 'sft.jsonl')
    if 'gspo' in kinds:
        records = emit_records(samples, inputs, candidates, RecordKind.GSPO_CANDIDATE,
                               config.reward, config.validation)
        write_records(records, target / 'gspo.jsonl')
    click.echo(f"Training records for {len(inputs)} fund-dates -> {target}")
