import sys

from cutspace.cli import main

sys.exit(main())
