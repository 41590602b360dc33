"""
Django base settings for the Ground War testbed.
Shared settings for all environments.
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Only used by Django internals; nothing here is served over HTTP.
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-dev-key-change-in-production')

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    # Local apps
    'core.apps.CoreConfig',
]

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Run defaults for the management commands.
# Every value can be overridden per run with a command flag.
GROUNDWAR = {
    'DEFAULT_CONFIG': BASE_DIR / 'configs' / 'defaults.json',
    'CONFIG_DIR': BASE_DIR / 'configs',
    'OUTPUT_DIR': Path(os.environ.get('GROUNDWAR_OUTPUT_DIR', BASE_DIR / 'results')),
    'WORKERS': int(os.environ.get('GROUNDWAR_WORKERS', '1')),
    'LOG_LEVEL': os.environ.get('GROUNDWAR_LOG_LEVEL', 'INFO'),
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': GROUNDWAR['LOG_LEVEL'],
            'propagate': False,
        },
    },
}
