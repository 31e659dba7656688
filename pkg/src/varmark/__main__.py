import sys

from varmark.cli import main

sys.exit(main())
