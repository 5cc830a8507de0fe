import sys

from windreserve.cli import main

sys.exit(main())
