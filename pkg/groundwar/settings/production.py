"""
Django production settings for the Ground War testbed.
For long batch runs (full-size tournaments and sweeps) on a shared machine.
"""

from .base import *
import os

DEBUG = False

# Database location is set per machine; results databases get large
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('GROUNDWAR_DB_PATH', BASE_DIR / 'groundwar.sqlite3'),
    }
}

SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'your-production-secret-key-change-me')

# Per-decision DEBUG output is far too chatty for 39,000-game tournaments
LOGGING['loggers']['core']['level'] = os.environ.get('GROUNDWAR_LOG_LEVEL', 'WARNING')
