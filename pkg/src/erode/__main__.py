import sys

from erode.cli import main

sys.exit(main())
