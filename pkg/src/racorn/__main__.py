import sys

from racorn.cli import main

sys.exit(main())
