import sys

from gridrobust.cli import main

sys.exit(main())
