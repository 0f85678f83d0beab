import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'grea.settings')
django.setup()
