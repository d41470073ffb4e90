"""
Shared configuration for the test suite.
Loads optional overrides from environment variables (.env file).
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Look for .env in the project root
env_path = Path(__file__).parent.parent / ".env"
load_dotenv(dotenv_path=env_path)

# Base seed for every randomized test
TEST_SEED = int(os.getenv("G2G_TEST_SEED", "20240917"))

# Set RUN_SLOW_TESTS=0 to skip the large Monte Carlo acceptance runs
RUN_SLOW_TESTS = os.getenv("RUN_SLOW_TESTS", "1") != "0"

# Directory holding the worked campaign configurations
CONFIG_DIR = Path(__file__).parent.parent / "configs"

