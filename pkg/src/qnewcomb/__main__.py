import sys

from qnewcomb.cli import main

sys.exit(main())
