import sys

from onlineage.cli import main

sys.exit(main())
