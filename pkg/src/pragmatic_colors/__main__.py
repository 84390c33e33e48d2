import sys

from pragmatic_colors.cli import main

sys.exit(main())
