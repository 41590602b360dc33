"""
Django development settings for the Ground War testbed.
"""

from dotenv import load_dotenv

from .base import *

# Pick up GROUNDWAR_* overrides from a local .env before anything reads them
load_dotenv(BASE_DIR / '.env')

DEBUG = True

# Database - SQLite for development
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

GROUNDWAR['OUTPUT_DIR'] = Path(os.environ.get('GROUNDWAR_OUTPUT_DIR', GROUNDWAR['OUTPUT_DIR']))
GROUNDWAR['WORKERS'] = int(os.environ.get('GROUNDWAR_WORKERS', GROUNDWAR['WORKERS']))
