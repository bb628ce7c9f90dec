import sys

from mcts_jssp.cli import main

sys.exit(main())
