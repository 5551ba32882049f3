"""
Django settings for the mcmc-desk project.

The project has no web surface: Django provides the app registry, the
settings layer and the ``manage.py`` command runner for the sampling,
toy-chain and diagnostics batches.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from dotenv import load_dotenv
import os

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("SECRET_KEY", "mcmc-desk-local-only")

DEBUG = os.environ.get("DEBUG", "False") == "True"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "target.apps.TargetConfig",
    "samplers.apps.SamplersConfig",
    "toy.apps.ToyConfig",
    "diagnostics.apps.DiagnosticsConfig",
    "cli.apps.CliConfig",
]


# Database
# No app defines models; the in-memory database keeps `manage.py test`
# and `manage.py check` working out of the box.

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Sampling runs

MCMC_DEFAULT_SEED = int(os.environ.get("MCMC_DEFAULT_SEED", 0))
MCMC_OUTPUT_DIR = Path(os.environ.get("MCMC_OUTPUT_DIR", BASE_DIR / "runs"))
MCMC_HISTORY_LIMIT = int(os.environ.get("MCMC_HISTORY_LIMIT", 1_000_000))
MCMC_LOG_LEVEL = os.environ.get("MCMC_LOG_LEVEL", "INFO")


# Logging

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": MCMC_LOG_LEVEL,
            "propagate": False,
        }
        for app in ("target", "samplers", "toy", "diagnostics", "cli")
    },
}
