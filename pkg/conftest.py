import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "metaestim.settings")
django.setup()
