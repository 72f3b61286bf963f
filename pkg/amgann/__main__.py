import sys

from amgann.main import cli_main

sys.exit(cli_main())
