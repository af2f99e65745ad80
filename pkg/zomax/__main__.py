import sys

from zomax.cli import main

sys.exit(main())
