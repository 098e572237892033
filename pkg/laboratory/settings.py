"""
Django settings for the laboratory project.

Generated by 'django-admin startproject' using Django 5.2.6 and trimmed
down to what a command-line numerical laboratory needs: no database, no
URL routing, no templates.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()

# Only used by Django internals (signing); nothing here is served.
SECRET_KEY = os.environ.get("SECRET_KEY", "django-insecure-laboratory")

DEBUG = os.environ.get("DEBUG", "0") == "1"

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "rest_framework",
    "geometry.apps.GeometryConfig",
    "initial_data.apps.InitialDataConfig",
    "np_constants.apps.NpConstantsConfig",
    "time_integral.apps.TimeIntegralConfig",
    "evolution.apps.EvolutionConfig",
    "asymptotics.apps.AsymptoticsConfig",
    "cli.apps.CliConfig",
]

# Nothing is persisted in a database; results are CSV and JSON files.
DATABASES = {}

# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "laboratory": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "laboratory",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": os.environ.get("LAB_LOG_LEVEL", "INFO"),
            "propagate": False,
        }
        for app in (
            "geometry",
            "initial_data",
            "np_constants",
            "time_integral",
            "evolution",
            "asymptotics",
            "cli",
        )
    },
}

LAB = {
    "OUTPUT_DIR": Path(os.environ.get("LAB_OUTPUT_DIR", BASE_DIR / "output")),
    "THREADS": int(os.environ.get("LAB_THREADS", 1)),
    "BUDGET_CELLS": int(os.environ.get("LAB_BUDGET_CELLS", 6_000_000_000)),
    "SCHEMA_VERSION": 1,
    "SCHEMA_DIR": BASE_DIR / "schemas",
    # geometry
    "REFERENCE_RADIUS_FACTOR": 10.0,
    "TORTOISE_RTOL": 1e-13,
    "TABLE_RADIUS_FACTOR": 1e6,
    "TABLE_RATIO": 1.05,
    "AUDIT_RADIUS_FACTOR": 1e3,
    # np_constants
    "EXTRACTION_RADIUS_FACTOR": 200.0,
    "EXTRACTION_RADII": 6,
    "VANISHING_FLOOR": 1e-10,
    # time_integral
    "TIME_INTEGRAL_RTOL": 1e-12,
    "TIME_INTEGRAL_FAR_FACTOR": 1e5,
    # evolution
    "AUDIT_FRACTION": 0.01,
    "AUDIT_MAX_CELLS": 200_000,
    "AUDIT_SEED": 20_240_601,
    "HORIZON_PROXY_RSTAR": -50.0,
    "HORIZON_SENSITIVITY_RSTAR": -75.0,
    # asymptotics
    "SIGNAL_NOISE_FACTOR": 10.0,
    "FIT_WINDOW_FRACTION": 0.5,
    "MIN_WINDOW_DECADES": 1.0,
    "INDEX_SAMPLES": 256,
}
