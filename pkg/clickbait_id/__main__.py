import sys

from clickbait_id.cli import main

sys.exit(main())
