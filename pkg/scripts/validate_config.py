#!/usr/bin/env python3
"""
lochaus Configuration Validator

This script validates lochaus configuration files against the schema.
Usage: python scripts/validate_config.py [config_file]
"""

import sys
import argparse
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.config_loader import ConfigLoader


def validate_config(config_path: Path, quiet: bool = False) -> bool:
    """
    Validate a lochaus configuration file.

    Args:
        config_path: Path to the configuration file
        quiet: Only print errors

    Returns:
        True if valid, False otherwise
    """
    if not quiet:
        print(f"Validating: {config_path}")
        print("=" * 60)

    loader = ConfigLoader()
    config = loader.load(config_path)
    errors = loader.get_errors()

    if errors or config is None:
        print("❌ Validation FAILED")
        print("\nErrors found:")
        for error in errors:
            print(f"\n{error}")
        return False

    if quiet:
        return True

    print("✅ Validation PASSED")
    print("-" * 60)
    for name, value in config.model_dump(mode='json').items():
        shown = "(default)" if value is None else value
        print(f"  {name}: {shown}")
    print("=" * 60)
    return True


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(
        description='Validate lochaus configuration files',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python scripts/validate_config.py lochaus_config.yaml
  python scripts/validate_config.py /path/to/run.json
        """
    )

    parser.add_argument(
        'config_file',
        nargs='?',
        default=ConfigLoader.DEFAULT_YAML_FILE,
        help=f'Path to configuration file (default: {ConfigLoader.DEFAULT_YAML_FILE})'
    )

    parser.add_argument(
        '-q', '--quiet',
        action='store_true',
        help='Quiet mode - only show errors'
    )

    args = parser.parse_args()

    try:
        valid = validate_config(Path(args.config_file), quiet=args.quiet)
        sys.exit(0 if valid else 1)
    except KeyboardInterrupt:
        print("\n\nValidation cancelled.")
        sys.exit(130)


if __name__ == '__main__':
    main()
