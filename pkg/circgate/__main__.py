import sys

from circgate.cli import main

sys.exit(main())
