import os
import logging
from flask import Flask

# Load environment variables from .env file if it exists
try:
    from dotenv import load_dotenv
    load_dotenv()
    logging.info("Environment variables loaded from .env file")
except ImportError:
    logging.info("python-dotenv not installed, using system environment variables")
except Exception as e:
    logging.warning(f"Could not load .env file: {e}")

# Configure logging
logging.basicConfig(
    level=getattr(logging, os.environ.get('LOG_LEVEL', 'INFO').upper(), logging.INFO),
    format='%(asctime)s - %(levelname)s - %(message)s'
)

# Create Flask app (hosts configuration and the CLI command groups)
app = Flask(__name__)

# LLM gateway configuration
app.config['LLM_BASE_URL'] = os.environ.get('LLM_BASE_URL', 'https://api.deepseek.com/v1')
app.config['LLM_ENDPOINT_PATH'] = os.environ.get('LLM_ENDPOINT_PATH', '/chat/completions')
app.config['LLM_MODEL'] = os.environ.get('LLM_MODEL', 'deepseek-reasoner')
app.config['LLM_API_KEY_ENV'] = os.environ.get('LLM_API_KEY_ENV', 'LLM_API_KEY')
app.config['LLM_MODE'] = os.environ.get('LLM_MODE', 'stub')
app.config['LLM_TIMEOUT_S'] = float(os.environ.get('LLM_TIMEOUT_S', '120'))
app.config['LLM_MAX_RETRIES'] = int(os.environ.get('LLM_MAX_RETRIES', '3'))
app.config['LLM_BACKOFF_BASE_S'] = float(os.environ.get('LLM_BACKOFF_BASE_S', '1.0'))
app.config['LLM_MAX_INFLIGHT'] = int(os.environ.get('LLM_MAX_INFLIGHT', '4'))
app.config['LLM_CASSETTE'] = os.environ.get('LLM_CASSETTE', 'cassettes/llm.jsonl')

# Run defaults
app.config['REITS_OUTPUT_DIR'] = os.environ.get('REITS_OUTPUT_DIR', 'out')
app.config['REITS_PROMPT_DIR'] = os.environ.get(
    'REITS_PROMPT_DIR',
    os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates', 'prompts'))

# Register module command groups
from modules.main_controller import register_modules

register_modules(app)
