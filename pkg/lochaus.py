"""
lochaus - Hausdorff and local Hausdorff dimension of finite metric samples.

Features:
- Dimension estimates from optimal and greedy covers
- Local dimension fields and local Hausdorff premeasures
- Ahlfors regularity and log-Hoelder certificates for sampled measures
- Fixture generators with known dimensions
- A property suite re-checking every estimate against brute-force oracles
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False, log_file: Optional[Path] = None) -> None:
    """Configure the root logger: stderr always, a file when requested."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    argv = sys.argv[1:] if argv is None else argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('-v', '--verbose', action='store_true')
    pre.add_argument('--log-file', type=Path)
    known, _ = pre.parse_known_args(argv)
    setup_logging(known.verbose, known.log_file)

    from core.cli import run

    code = run(argv)
    logger.debug(f"exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
