import os

bind = f"0.0.0.0:{os.getenv('PORT', '8000')}"
# Buscas são CPU-bound: ajuste WEB_CONCURRENCY ao número de núcleos.
workers = int(os.getenv("WEB_CONCURRENCY", "2"))
threads = int(os.getenv("GUNICORN_THREADS", "2"))
timeout = int(os.getenv("GUNICORN_TIMEOUT", "300"))
accesslog = "-"
errorlog = "-"
