"""
Environment settings for memograph. Values come from the process environment, optionally
seeded from a ``.env`` file next to the working directory.
"""
import os

from dotenv import load_dotenv

from memograph.constants import DEFAULT_DIM, DEFAULT_EMBEDDING_SEED

load_dotenv()

STORE_DIR = os.environ.get("MEMOGRAPH_STORE_DIR", "./store")
LOG_LEVEL = os.environ.get("MEMOGRAPH_LOG_LEVEL", "INFO")
LOG_DIR = os.environ.get("MEMOGRAPH_LOG_DIR")

EMBEDDING_DIM = int(os.environ.get("MEMOGRAPH_EMBEDDING_DIM", DEFAULT_DIM))
EMBEDDING_SEED = int(os.environ.get("MEMOGRAPH_EMBEDDING_SEED", DEFAULT_EMBEDDING_SEED))

WORKERS = int(os.environ.get("MEMOGRAPH_WORKERS", 1))
