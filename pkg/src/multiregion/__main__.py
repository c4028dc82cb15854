import sys

from multiregion.cli import main

sys.exit(main())
