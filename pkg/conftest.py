import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'INFINIR.settings')
django.setup()
