import sys

from oracle_adapter.cli import main

sys.exit(main())
