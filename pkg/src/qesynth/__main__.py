import sys

from qesynth.cli import main

sys.exit(main())
