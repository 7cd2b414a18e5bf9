from weakcomm.cli import main
import sys
sys.exit(main())
