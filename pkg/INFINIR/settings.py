"""
Django settings for the INFINIR project (infinitary rewriting engine).
"""

from pathlib import Path
import os
from dotenv import load_dotenv
load_dotenv()

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY', 'infinir-local-only-7q2v!x9k@c3m#r8w$e1t&y5u')

DEBUG = os.environ.get('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = os.environ.get('ALLOWED_HOSTS', 'localhost,127.0.0.1').split(',')

# Application definition
INSTALLED_APPS = [
    # Engine apps
    'common',
    'terms',
    'rewriting',
    'relations',
    'proofs',
    'compression',
    'console',
]

# The engine keeps no state; the database is never opened.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# ==============================================================================
# ENGINE SETTINGS
# ==============================================================================

# Proof search budget (overridable per call with --budget-goals/--budget-split/--budget-nodes)
SEARCH_MAX_GOALS = int(os.environ.get('INFINIR_MAX_GOALS', 10000))
SEARCH_MAX_SPLIT = int(os.environ.get('INFINIR_MAX_SPLIT', 8))
SEARCH_MAX_NEW_TERM_NODES = int(os.environ.get('INFINIR_MAX_NEW_TERM_NODES', 256))

# Maximum number of terms in a universe built by close_universe (--universe-budget)
UNIVERSE_BUDGET = int(os.environ.get('INFINIR_UNIVERSE_BUDGET', 64))

# Extra approximation depth tried by extract_prefix before giving up
PREFIX_MAX_SLACK = int(os.environ.get('INFINIR_PREFIX_MAX_SLACK', 16))

# Compression: most levels a compressed reduction may have
COMPRESS_MAX_NODES = int(os.environ.get('INFINIR_COMPRESS_MAX_NODES', 256))
ORED_CHECK_DEPTH = int(os.environ.get('INFINIR_ORED_CHECK_DEPTH', 8))

# INFINIR_SEED is reserved: every engine is deterministic, so it is never read.

# Logging Configuration
LOGS_DIR = Path(os.environ.get('INFINIR_LOGS_DIR', BASE_DIR / 'logs'))

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'infinir.log',
            'formatter': 'verbose',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'error.log',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'error_file'],
            'level': 'INFO',
            'propagate': True,
        },
        'terms': {
            'handlers': ['file', 'error_file'],
            'level': 'INFO',
            'propagate': False,
        },
        'rewriting': {
            'handlers': ['file', 'error_file'],
            'level': 'INFO',
            'propagate': False,
        },
        'relations': {
            'handlers': ['file', 'error_file'],
            'level': os.environ.get('INFINIR_RELATIONS_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
        'proofs': {
            'handlers': ['file', 'error_file'],
            'level': 'INFO',
            'propagate': False,
        },
        'compression': {
            'handlers': ['file', 'error_file'],
            'level': 'INFO',
            'propagate': False,
        },
        'console': {
            'handlers': ['file', 'error_file'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}

# Create logs directory if it doesn't exist
LOGS_DIR.mkdir(parents=True, exist_ok=True)
