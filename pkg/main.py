import sys

from scripts.cli.cli import main

# 命令行入口，子命令与参数见 scripts/cli/cli.py
if __name__ == "__main__":
    sys.exit(main())
