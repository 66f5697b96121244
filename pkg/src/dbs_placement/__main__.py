import sys

from dbs_placement.cli import main

sys.exit(main())
