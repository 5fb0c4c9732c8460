import sys

from lopc.main import main

sys.exit(main())
