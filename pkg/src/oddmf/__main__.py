import sys

from oddmf.cli import main

sys.exit(main())
