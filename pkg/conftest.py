import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "laboratory.settings")
django.setup()
