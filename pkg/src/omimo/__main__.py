import sys

from omimo.cli import main

sys.exit(main())
