import sys

from densify.main import main

sys.exit(main())
