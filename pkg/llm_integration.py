"""
LLM gateway
OpenAI-compatible chat completions with retry, record/replay cassettes and
deterministic stub responders for offline runs
"""
import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import requests
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from modules.shared.errors import (
    ConfigError, CredentialError, GatewayError, GatewayResponseError, ReplayMissError,
    RetriesExhaustedError,
)
from modules.shared.models import DIRECTION_ORDER, Direction, HORIZONS, HORIZON_KEYS

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class GatewayMode(str, Enum):
    LIVE = 'live'
    REPLAY = 'replay'
    RECORD = 'record'
    STUB = 'stub'


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    tag: str
    temperature: float = 0.2
    max_tokens: int = 4096
    # Sampling seed; distinguishes otherwise identical candidate requests
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.user:
            raise ValueError(f"request {self.tag}: user message is empty")
        if not 0 <= self.temperature <= 2:
            raise ValueError(f"request {self.tag}: temperature {self.temperature} outside [0, 2]")

    @property
    def kind(self):
        """Caller kind, the first field of the tag (e.g. 'prediction' in 'prediction|508000|2024-03-01')"""
        return self.tag.split('|', 1)[0]


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = 'https://api.deepseek.com/v1'
    model_name: str = 'deepseek-reasoner'
    api_key_env: str = 'LLM_API_KEY'
    timeout_s: float = 120.0
    max_retries: int = 3
    backoff_base_s: float = 1.0
    mode: GatewayMode = GatewayMode.STUB
    endpoint_path: str = '/chat/completions'
    max_inflight: int = 4
    cassette_path: Optional[str] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'mode', GatewayMode(self.mode))
        except ValueError:
            raise ConfigError('gateway.mode', f"unknown mode {self.mode!r}")
        if self.max_retries < 0:
            raise ConfigError('gateway.max_retries', "must be >= 0")
        if self.max_inflight < 1:
            raise ConfigError('gateway.max_inflight', "must be >= 1")

    @classmethod
    def from_app_config(cls, config, **overrides):
        """Gateway defaults from the Flask app config, with explicit overrides"""
        values = dict(
            base_url=config['LLM_BASE_URL'],
            model_name=config['LLM_MODEL'],
            api_key_env=config['LLM_API_KEY_ENV'],
            timeout_s=config['LLM_TIMEOUT_S'],
            max_retries=config['LLM_MAX_RETRIES'],
            backoff_base_s=config['LLM_BACKOFF_BASE_S'],
            mode=config['LLM_MODE'],
            endpoint_path=config['LLM_ENDPOINT_PATH'],
            max_inflight=config['LLM_MAX_INFLIGHT'],
            cassette_path=config['LLM_CASSETTE'],
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_mode(self, mode):
        return replace(self, mode=GatewayMode(mode))

    @property
    def url(self):
        return f"{self.base_url.rstrip('/')}/{self.endpoint_path.lstrip('/')}"


def canonical_json(data):
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(',', ':'))


def canonical_user(text):
    """JSON payloads are re-serialized with sorted keys so key order never changes a digest"""
    try:
        return canonical_json(json.loads(text))
    except (TypeError, ValueError):
        return text


def request_digest(model_name, request):
    document = {'model': model_name, 'system': request.system, 'user': canonical_user(request.user)}
    if request.seed is not None:
        document['seed'] = request.seed
    return hashlib.sha256(canonical_json(document).encode('utf-8')).hexdigest()


class Cassette:
    """JSONL store of recorded responses keyed by request digest (later lines win)"""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries = {}
        if self.path.exists():
            with self.path.open(encoding='utf-8') as handle:
                for line_no, line in enumerate(handle, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                        self._entries[record['digest']] = record
                    except (ValueError, KeyError):
                        raise GatewayError(f"{self.path}:{line_no}: malformed cassette record")
            logging.info(f"📼 Loaded {len(self._entries)} cassette entries from {self.path}")

    def __len__(self):
        return len(self._entries)

    def __contains__(self, digest):
        return digest in self._entries

    def get(self, digest):
        record = self._entries.get(digest)
        return None if record is None else record['response']

    def append(self, digest, request, model_name, response):
        record = {'digest': digest, 'model': model_name, 'tag': request.tag, 'response': response}
        with self._lock:
            self._entries[digest] = record
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open('a', encoding='utf-8') as handle:
                handle.write(canonical_json(record) + '\n')


class PromptLibrary:
    """System prompt templates rendered with Jinja2"""

    def __init__(self, prompt_dir):
        self.prompt_dir = Path(prompt_dir)
        self.env = Environment(loader=FileSystemLoader(str(self.prompt_dir)), autoescape=False,
                               undefined=StrictUndefined)

    def render(self, name, **context):
        return self.env.get_template(f"{name}.j2").render(**context).strip()


class LLMGateway:
    """Shared chat-completion client; thread safe, in-flight requests capped"""

    def __init__(self, config, cassette=None, sleep=time.sleep, session=None):
        self.config = config
        self.sleep = sleep
        self.session = session or requests.Session()
        self._inflight = threading.BoundedSemaphore(config.max_inflight)
        self.stubs = default_stubs()
        if cassette is None and config.mode in (GatewayMode.REPLAY, GatewayMode.RECORD):
            if not config.cassette_path:
                raise ConfigError('gateway.cassette', f"{config.mode.value} mode needs a cassette path")
            cassette = Cassette(config.cassette_path)
        self.cassette = cassette

    @property
    def mode(self):
        return self.config.mode

    def register_stub(self, kind, responder):
        self.stubs[kind] = responder

    def complete(self, request):
        """Response text for the request according to the gateway mode"""
        mode = self.config.mode
        if mode is GatewayMode.STUB:
            responder = self.stubs.get(request.kind)
            if responder is None:
                raise GatewayResponseError(f"no stub responder for request kind {request.kind!r}")
            return responder(request.user)

        digest = request_digest(self.config.model_name, request)
        if mode is GatewayMode.REPLAY:
            text = self.cassette.get(digest)
            if text is None:
                raise ReplayMissError(digest, request.tag)
            logging.debug(f"📼 Replayed {request.tag} ({digest[:12]})")
            return text

        text = self._post(request)
        if mode is GatewayMode.RECORD:
            self.cassette.append(digest, request, self.config.model_name, text)
            logging.info(f"📼 Recorded {request.tag} ({digest[:12]})")
        return text

    def _api_key(self):
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise CredentialError(self.config.api_key_env)
        return key

    def _post(self, request):
        headers = {'Authorization': f"Bearer {self._api_key()}", 'Content-Type': 'application/json'}
        body = {
            'model': self.config.model_name,
            'messages': [
                {'role': 'system', 'content': request.system},
                {'role': 'user', 'content': request.user},
            ],
            'temperature': request.temperature,
            'max_tokens': request.max_tokens,
        }
        if request.seed is not None:
            body['seed'] = request.seed
        attempts = self.config.max_retries + 1
        last_status = None
        for attempt in range(attempts):
            try:
                with self._inflight:
                    response = self.session.post(self.config.url, json=body, headers=headers,
                                                 timeout=self.config.timeout_s)
                last_status = response.status_code
            except (requests.Timeout, requests.ConnectionError) as e:
                last_status = 'timeout' if isinstance(e, requests.Timeout) else 'connection error'
                response = None

            if response is not None and response.status_code == 200:
                logging.info(f"📡 {request.tag}: 200 from {self.config.url}")
                return _response_text(response, request.tag)
            if response is not None and response.status_code not in RETRYABLE_STATUS:
                logging.error(f"❌ {request.tag}: status {response.status_code} from {self.config.url}")
                raise GatewayResponseError(f"request {request.tag} rejected with status {response.status_code}")

            if attempt < attempts - 1:
                delay = self.config.backoff_base_s * 2 ** attempt
                logging.warning(f"⚠️ {request.tag}: {last_status}, retrying in {delay:.1f}s "
                                f"({attempt + 1}/{self.config.max_retries})")
                self.sleep(delay)
        raise RetriesExhaustedError(request.tag, attempts, last_status)


def _response_text(response, tag):
    """Message content; a separate reasoning channel is folded into the think block"""
    try:
        message = response.json()['choices'][0]['message']
    except (ValueError, KeyError, IndexError, TypeError):
        raise GatewayResponseError(f"request {tag}: malformed completion body")
    content = message.get('content') or ''
    reasoning = message.get('reasoning_content')
    if reasoning and '<think>' not in content:
        return f"<think>\n{reasoning.strip()}\n</think>\n{content.strip()}"
    return content


# --- stub responders ---

DOMINANT_P = 0.6
SECOND_P = 0.25
THIRD_P = 0.15
STUB_CONFIDENCE = 0.5


def stub_distribution(dominant):
    """Dominant 0.6; 0.25 to side after a trend (to up after side); 0.15 to the rest"""
    dominant = Direction(dominant)
    second = Direction.SIDE if dominant is not Direction.SIDE else Direction.UP
    third = next(d for d in DIRECTION_ORDER if d not in (dominant, second))
    probs = {dominant: DOMINANT_P, second: SECOND_P, third: THIRD_P}
    return {'up': probs[Direction.UP], 'down': probs[Direction.DOWN], 'side': probs[Direction.SIDE],
            'confidence': STUB_CONFIDENCE}


def compliant_answer(directions, reasoning):
    """Think block plus the pinned prediction JSON for the given dominant directions"""
    body = {key: stub_distribution(directions[key]) for key in HORIZON_KEYS}
    return f"<think>\n{reasoning}\n</think>\n{json.dumps(body)}"


def _load_payload(user_text):
    try:
        payload = json.loads(user_text)
    except ValueError:
        raise GatewayResponseError("stub input is not a JSON payload")
    if not isinstance(payload, dict):
        raise GatewayResponseError("stub input is not a JSON object")
    return payload


def stub_predict(user_text):
    """Per horizon k: up if chg_k >= eps_k, down if chg_k <= -eps_k, else side"""
    from modules.threshold_labeler.thresholds import classify

    payload = _load_payload(user_text)
    try:
        context = payload['price_context']
        directions = {}
        lines = []
        for k, key in zip(HORIZONS, HORIZON_KEYS):
            chg = float(context[f"chg_{k}d"])
            eps = float(context[f"eps{k}"])
            directions[key] = classify(chg, eps)
            lines.append(f"T+{k}: change {chg:+.4%} against threshold {eps:.4%} -> {directions[key].value}")
    except (KeyError, TypeError, ValueError):
        raise GatewayResponseError("stub prediction input lacks price_context changes/thresholds")
    return compliant_answer(directions, '\n'.join(lines))


def stub_distill(user_text):
    """Teacher answer whose dominant directions equal the realized labels"""
    payload = _load_payload(user_text)
    try:
        realized = payload['realized']
        directions = {key: Direction(realized[f"label_{k}"]) for k, key in zip(HORIZONS, HORIZON_KEYS)}
    except (KeyError, TypeError, ValueError):
        raise GatewayResponseError("stub distillation input lacks realized labels")
    lines = [f"T+{k}: realized move {realized.get(f'r_fwd_{k}')} -> {directions[key].value}"
             for k, key in zip(HORIZONS, HORIZON_KEYS)]
    return compliant_answer(directions, '\n'.join(lines))


def stub_decide(user_text):
    from modules.backtest.decision import RuleDecisionPolicy

    payload = _load_payload(user_text)
    signal, reason = RuleDecisionPolicy().decide_from_payload(payload)
    return f"<think>\n{reason}\n</think>\n{json.dumps({'action': signal.value, 'reason': reason})}"


def default_stubs():
    return {'prediction': stub_predict, 'candidate': stub_predict, 'distill': stub_distill,
            'decision': stub_decide}

