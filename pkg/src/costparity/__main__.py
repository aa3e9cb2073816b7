import sys

from costparity.cli import main

sys.exit(main())
